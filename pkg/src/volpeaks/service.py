"""Live session service: UDP telemetry in, frames and state events out.

Three cooperating threads own the pipeline:

* the UDP receiver decodes datagrams into the sample queue;
* the session thread drains that queue (UDP and HTTP-injected samples share
  it), applies interaction steps — it is the sole state writer — and fans
  state events out to subscribers;
* the render thread watches the session revision and re-renders only when it
  changed, at most at the configured frame cap, publishing PNG frames.

HTTP handlers read immutable snapshots; ``PUT /state/tf`` validates the whole
payload before swapping it in, so readers never observe a half-applied
transfer function.
"""

from __future__ import annotations

import asyncio
import json
import queue
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from fastapi import FastAPI, Response, WebSocket, WebSocketDisconnect

from .controllers import Button, ControllerSample, Device
from .interaction import Gains, Session, SessionSnapshot
from .net import DEFAULT_PORT, ProtocolError, UdpReceiver, decode_packet
from .render import RenderSettings, frame_volume, render_frame
from .transfer import TransferFunction, TransferFunctionFormatError
from .volume import Volume, histogram, load_volume

DEFAULT_HTTP_PORT = 7780
DEFAULT_FRAME_CAP = 30
DEFAULT_IMAGE_SIZE = (512, 512)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ServiceConfig:
    volume_path: str
    tf_path: str | None = None
    udp_port: int = DEFAULT_PORT
    http_port: int = DEFAULT_HTTP_PORT
    image_size: tuple[int, int] = DEFAULT_IMAGE_SIZE
    settings: RenderSettings = None  # type: ignore[assignment]
    gains: Gains = None  # type: ignore[assignment]
    frame_cap: float = DEFAULT_FRAME_CAP
    threads: int = 1

    def __post_init__(self):
        if self.settings is None:
            object.__setattr__(self, "settings", RenderSettings())
        if self.gains is None:
            object.__setattr__(self, "gains", Gains())
        if not 1 <= self.frame_cap <= 120:
            raise ConfigError(f"frame cap must be in [1, 120], got {self.frame_cap}")
        if self.udp_port == self.http_port and self.udp_port != 0:
            raise ConfigError(f"UDP and HTTP ports must differ (both {self.udp_port})")
        w, h = self.image_size
        if w < 1 or h < 1:
            raise ConfigError(f"image size must be positive, got {self.image_size}")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")


class VolumeService:
    """Owns the volume, interaction session and render loop."""

    def __init__(self, config: ServiceConfig):
        self.config = config
        self.volume: Volume = load_volume(config.volume_path)
        tf = None
        if config.tf_path is not None:
            tf = TransferFunction.from_json(Path(config.tf_path).read_text())
        self.session = Session(tf=tf, gains=config.gains)
        self.camera = frame_volume(self.volume.meta, config.image_size)
        self._lock = threading.Lock()
        self._receiver = UdpReceiver(port=config.udp_port)
        self._subscribers: list[queue.Queue] = []
        self._sub_lock = threading.Lock()
        self._latest_png: bytes | None = None
        self._rendered_revision = -1
        self._first_frame = threading.Event()
        self._render_wake = threading.Event()
        self._stop = threading.Event()
        self._threads: list[threading.Thread] = []
        self.frames_rendered = 0

    # -- lifecycle --------------------------------------------------------

    @property
    def udp_port(self) -> int:
        return self._receiver.port

    @property
    def stats(self) -> dict:
        counters = self._receiver.stats.as_dict()
        counters["frames_rendered"] = self.frames_rendered
        return counters

    def start(self) -> "VolumeService":
        self._receiver.start()
        for name, target in (
            ("session", self._session_loop),
            ("render", self._render_loop),
        ):
            thread = threading.Thread(target=target, name=name, daemon=True)
            thread.start()
            self._threads.append(thread)
        self._render_wake.set()  # publish the initial frame
        return self

    def stop(self):
        self._stop.set()
        self._render_wake.set()
        for thread in self._threads:
            thread.join(timeout=5.0)
        self._threads.clear()
        self._receiver.stop()

    # -- subscriptions ----------------------------------------------------

    def subscribe(self) -> queue.Queue:
        q: queue.Queue = queue.Queue(maxsize=64)
        with self._sub_lock:
            self._subscribers.append(q)
        return q

    def unsubscribe(self, q: queue.Queue):
        with self._sub_lock:
            if q in self._subscribers:
                self._subscribers.remove(q)

    def _publish(self, kind: str, payload):
        with self._sub_lock:
            targets = list(self._subscribers)
        for q in targets:
            try:
                q.put_nowait((kind, payload))
            except queue.Full:
                # drop the oldest so slow clients see fresh data
                try:
                    q.get_nowait()
                except queue.Empty:
                    pass
                try:
                    q.put_nowait((kind, payload))
                except queue.Full:
                    pass

    # -- session thread ---------------------------------------------------

    def inject_sample(self, sample: ControllerSample):
        """HTTP-injected samples join the UDP queue unchanged."""
        self._receiver.samples.put(sample)

    def _session_loop(self):
        while not self._stop.is_set():
            try:
                sample = self._receiver.samples.get(timeout=0.1)
            except queue.Empty:
                continue
            self._apply(sample)

    def _apply(self, sample: ControllerSample) -> list[dict]:
        with self._lock:
            events = self.session.process(sample)
        for event in events:
            self._publish("event", event)
        self._render_wake.set()
        return events

    # -- state accessors (HTTP handlers call these) -----------------------

    def snapshot(self) -> SessionSnapshot:
        with self._lock:
            return self.session.snapshot()

    def tf_json(self) -> str:
        with self._lock:
            return self.session.tf.to_json()

    def set_tf(self, text: str):
        """Validate, then atomically replace the transfer function."""
        tf = TransferFunction.from_json(text)  # raises before any mutation
        with self._lock:
            self.session.tf = tf
            self.session.revision += 1
        self._publish("event", {"type": "tf_replaced"})
        self._render_wake.set()

    def histogram(self) -> list[int]:
        return histogram(self.volume).tolist()

    def clip_state(self) -> dict:
        with self._lock:
            plane = self.session.plane
        return {
            "enabled": plane.enabled,
            "normal": list(plane.normal),
            "offset": plane.offset,
        }

    def state_message(self) -> dict:
        snap = self.snapshot()
        return {
            "type": "state",
            "tf": json.loads(snap.tf.to_json(indent=None)),
            "context": snap.context.value,
            "edit_mode": snap.edit_mode.value,
            "bulb_color": list(snap.bulb_color),
            "clip": {
                "enabled": snap.plane.enabled,
                "normal": list(snap.plane.normal),
                "offset": snap.plane.offset,
            },
            "revision": snap.revision,
            "counters": self.stats,
        }

    # -- rendering --------------------------------------------------------

    def _render_snapshot(self, snap: SessionSnapshot) -> bytes:
        frame = render_frame(
            self.volume,
            snap.tf,
            self.camera,
            transform=snap.transform,
            plane=snap.plane,
            settings=self.config.settings,
            threads=self.config.threads,
        )
        return frame.to_png()

    def _render_loop(self):
        min_interval = 1.0 / float(self.config.frame_cap)
        last_render = 0.0
        while not self._stop.is_set():
            if not self._render_wake.wait(timeout=0.25):
                continue
            self._render_wake.clear()
            if self._stop.is_set():
                break
            snap = self.snapshot()
            if snap.revision == self._rendered_revision:
                continue
            wait = min_interval - (time.monotonic() - last_render)
            if wait > 0:
                time.sleep(wait)
            # re-snapshot after pacing so a burst collapses into one frame
            snap = self.snapshot()
            png = self._render_snapshot(snap)
            last_render = time.monotonic()
            self._rendered_revision = snap.revision
            self._latest_png = png
            self.frames_rendered += 1
            self._first_frame.set()
            self._publish("frame", png)

    def latest_frame(self, timeout: float = 30.0) -> bytes:
        """Most recent published frame; blocks for the initial render."""
        if not self._first_frame.wait(timeout):
            raise TimeoutError("no frame rendered yet")
        assert self._latest_png is not None
        return self._latest_png


def replay_trace(
    config: ServiceConfig, datagrams: list[bytes]
) -> tuple[bytes, bytes]:
    """Feed a recorded packet trace through a fresh pipeline synchronously.

    Returns (final TF JSON bytes, final frame PNG bytes). Uses the same
    decode and interaction paths as the live service, minus the threads, so
    the result is a pure function of the trace — replaying twice gives
    byte-identical outputs.
    """
    volume = load_volume(config.volume_path)
    tf = None
    if config.tf_path is not None:
        tf = TransferFunction.from_json(Path(config.tf_path).read_text())
    session = Session(tf=tf, gains=config.gains)
    for datagram in datagrams:
        try:
            sample, _seq = decode_packet(datagram)
        except ProtocolError:
            continue
        session.process(sample)
    snap = session.snapshot()
    camera = frame_volume(volume.meta, config.image_size)
    frame = render_frame(
        volume,
        snap.tf,
        camera,
        transform=snap.transform,
        plane=snap.plane,
        settings=config.settings,
        threads=config.threads,
    )
    return snap.tf.to_json().encode(), frame.to_png()


def _sample_from_json(obj: dict) -> ControllerSample:
    """Build a sample from the JSON body of ``POST /input/sample`` (same
    field names as trajectory keyframes)."""
    try:
        device = Device[str(obj["device"]).upper()]
        timestamp_us = int(obj.get("timestamp_us", 0))
        pos = tuple(float(v) for v in obj["pos"])
        quat = tuple(float(v) for v in obj["quat"])
        buttons = frozenset(Button[str(name).upper()] for name in obj.get("buttons", []))
        trigger = float(obj.get("trigger", 0.0))
    except KeyError as exc:
        raise ValueError(f"unknown name or missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ValueError(str(exc)) from None
    return ControllerSample(device, timestamp_us, pos, quat, buttons, trigger)


def create_app(service: VolumeService) -> FastAPI:
    """FastAPI app wired to a running service."""
    from fastapi.middleware.cors import CORSMiddleware

    app = FastAPI(title="volpeaks", docs_url=None, redoc_url=None)
    # the browser UI is served separately (static files), so allow any origin
    app.add_middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.get("/state/tf")
    def get_tf():
        return Response(service.tf_json(), media_type="application/json")

    @app.put("/state/tf")
    def put_tf(payload: dict):
        try:
            service.set_tf(json.dumps(payload))
        except (TransferFunctionFormatError, ValueError) as exc:
            return Response(
                json.dumps({"error": str(exc)}),
                status_code=422,
                media_type="application/json",
            )
        return {"ok": True}

    @app.get("/state/histogram")
    def get_histogram():
        return {"bins": service.histogram()}

    @app.get("/state/clip")
    def get_clip():
        return service.clip_state()

    @app.post("/input/sample")
    def post_sample(payload: dict):
        try:
            sample = _sample_from_json(payload)
        except ValueError as exc:
            return Response(
                json.dumps({"error": str(exc)}),
                status_code=422,
                media_type="application/json",
            )
        service.inject_sample(sample)
        return {"queued": True}

    @app.get("/frame/latest")
    def get_frame():
        try:
            png = service.latest_frame()
        except TimeoutError:
            return Response(
                json.dumps({"error": "no frame available"}),
                status_code=503,
                media_type="application/json",
            )
        return Response(png, media_type="image/png")

    def _poll(sub: queue.Queue):
        # bounded wait so the handler stays cancellable on disconnect/shutdown
        try:
            return sub.get(timeout=0.5)
        except queue.Empty:
            return None

    @app.websocket("/stream")
    async def stream(ws: WebSocket):
        await ws.accept()
        sub = service.subscribe()
        loop = asyncio.get_running_loop()
        try:
            await ws.send_text(json.dumps(service.state_message()))
            if service._latest_png is not None:
                await ws.send_bytes(service._latest_png)
            while True:
                item = await loop.run_in_executor(None, _poll, sub)
                if item is None:
                    continue
                kind, payload = item
                if kind == "frame":
                    await ws.send_bytes(payload)
                else:
                    await ws.send_text(json.dumps(payload))
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            service.unsubscribe(sub)

    return app


def serve(config: ServiceConfig):
    """Run the service plus HTTP app until interrupted. Blocking."""
    import uvicorn

    service = VolumeService(config).start()
    app = create_app(service)
    try:
        uvicorn.run(app, host="127.0.0.1", port=config.http_port, log_level="warning")
    finally:
        service.stop()
