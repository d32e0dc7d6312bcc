"""Scripted controller trajectories and the headless sample generator.

A trajectory is a list of per-device keyframes; the simulator resamples it
at a fixed rate, interpolating pose and trigger between keyframes and
holding button state from the latest keyframe at or before each tick. The
same script therefore always produces the same sample stream, which is what
makes record/replay tests possible.
"""

from __future__ import annotations

import json
import math
import socket
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Union

from .controllers import Button, ControllerSample, Device
from .geometry import qnormalize, qslerp
from .net import SEQ_MODULUS, encode_sample

Sink = Union[tuple[str, int], Callable[[ControllerSample, int], None]]


class TrajectoryFormatError(ValueError):
    """The trajectory JSON was readable but not a valid script."""


@dataclass(frozen=True)
class Keyframe:
    t: float
    device: Device
    position: tuple[float, float, float]
    orientation: tuple[float, float, float, float]  # w, x, y, z
    buttons: frozenset[Button]
    trigger: float


def _lerp(a: float, b: float, u: float) -> float:
    return a + (b - a) * u


def _parse_keyframe(obj: dict, index: int) -> Keyframe:
    where = f"keyframe {index}"
    try:
        t = float(obj["t"])
        device = Device[str(obj["device"]).upper()]
        pos = tuple(float(v) for v in obj["pos"])
        quat = tuple(float(v) for v in obj["quat"])
        buttons = frozenset(Button[str(name).upper()] for name in obj.get("buttons", []))
        trigger = float(obj.get("trigger", 0.0))
    except KeyError as exc:
        raise TrajectoryFormatError(f"{where}: unknown name or missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        raise TrajectoryFormatError(f"{where}: {exc}") from None
    if len(pos) != 3:
        raise TrajectoryFormatError(f"{where}: pos must have 3 components")
    if len(quat) != 4:
        raise TrajectoryFormatError(f"{where}: quat must have 4 components")
    if not all(math.isfinite(v) for v in (t, trigger, *pos, *quat)):
        raise TrajectoryFormatError(f"{where}: non-finite value")
    if not 0.0 <= trigger <= 1.0:
        raise TrajectoryFormatError(f"{where}: trigger out of range")
    norm = math.sqrt(sum(c * c for c in quat))
    if norm < 1e-9:
        raise TrajectoryFormatError(f"{where}: zero quaternion")
    return Keyframe(t, device, pos, qnormalize(quat), buttons, trigger)


class ScriptedTrajectory:
    """Keyframed controller motion for one or both devices."""

    def __init__(self, keyframes: list[Keyframe]):
        if not keyframes:
            raise TrajectoryFormatError("trajectory has no keyframes")
        self.tracks: dict[Device, list[Keyframe]] = {}
        for kf in keyframes:
            self.tracks.setdefault(kf.device, []).append(kf)
        for device, track in self.tracks.items():
            for a, b in zip(track, track[1:]):
                if b.t <= a.t:
                    raise TrajectoryFormatError(
                        f"{device.name} keyframe times must be strictly "
                        f"increasing (got {a.t} then {b.t})"
                    )
        self.duration = max(track[-1].t for track in self.tracks.values())

    @classmethod
    def from_json(cls, text: str) -> "ScriptedTrajectory":
        """Parse a script: a JSON array of keyframe objects. A wrapping
        ``{"keyframes": [...]}`` object is accepted too."""
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise TrajectoryFormatError(f"invalid JSON: {exc}") from None
        if isinstance(obj, dict) and isinstance(obj.get("keyframes"), list):
            obj = obj["keyframes"]
        if not isinstance(obj, list):
            raise TrajectoryFormatError("expected a JSON array of keyframes")
        return cls([_parse_keyframe(kf, i) for i, kf in enumerate(obj)])

    @classmethod
    def load(cls, path: str | Path) -> "ScriptedTrajectory":
        return cls.from_json(Path(path).read_text())

    def sample_at(self, device: Device, t: float) -> ControllerSample | None:
        """Sample one device's track at time ``t`` (seconds from script start).

        Pose and trigger interpolate between bracketing keyframes (slerp for
        orientation); buttons hold the latest keyframe at or before ``t``.
        Before the first keyframe the first pose is held with no buttons
        pressed, and past the last keyframe the last state is held.
        """
        track = self.tracks.get(device)
        if track is None:
            return None
        stamp = int(round(t * 1e6))
        if t <= track[0].t:
            first = track[0]
            buttons = first.buttons if t >= first.t else frozenset()
            return ControllerSample(
                device, stamp, first.position, first.orientation, buttons,
                first.trigger,
            )
        if t >= track[-1].t:
            last = track[-1]
            return ControllerSample(
                device, stamp, last.position, last.orientation, last.buttons,
                last.trigger,
            )
        # binary search for the bracketing pair
        lo, hi = 0, len(track) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if track[mid].t <= t:
                lo = mid
            else:
                hi = mid
        a, b = track[lo], track[hi]
        u = (t - a.t) / (b.t - a.t)
        position = tuple(_lerp(pa, pb, u) for pa, pb in zip(a.position, b.position))
        orientation = qslerp(a.orientation, b.orientation, u)
        trigger = _lerp(a.trigger, b.trigger, u)
        return ControllerSample(
            device, stamp, position, orientation, a.buttons, trigger
        )


@dataclass
class SimulationReport:
    ticks: int = 0
    samples_sent: int = 0
    per_device: dict = field(default_factory=dict)

    def note(self, device: Device):
        self.samples_sent += 1
        key = device.name.lower()
        self.per_device[key] = self.per_device.get(key, 0) + 1


def run_simulator(
    trajectory: ScriptedTrajectory,
    sink: Sink,
    rate: float = 90.0,
    duration: float | None = None,
) -> SimulationReport:
    """Resample the script at ``rate`` Hz and deliver every sample to ``sink``.

    ``sink`` is either a ``(host, port)`` pair — samples are sent as UDP
    telemetry datagrams — or a callable taking ``(sample, seq)``. Ticks run
    at t = 0, 1/rate, 2/rate, ... with no real-time pacing, so rate × duration
    ticks cover the script; sequence numbers count per device and wrap like
    the wire protocol's.
    """
    if not 1.0 <= rate <= 1000.0:
        raise ValueError(f"rate must be in [1, 1000] Hz, got {rate}")
    if duration is None:
        duration = trajectory.duration
    ticks = max(1, int(round(duration * rate)))

    sock = None
    if callable(sink):
        deliver = sink
    else:
        host, port = sink
        sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)

        def deliver(sample: ControllerSample, seq: int):
            sock.sendto(encode_sample(sample, seq), (host, port))

    report = SimulationReport(ticks=ticks)
    seqs = {device: 0 for device in trajectory.tracks}
    try:
        for i in range(ticks):
            t = i / rate
            for device in sorted(trajectory.tracks):
                sample = trajectory.sample_at(device, t)
                if sample is None:
                    continue
                deliver(sample, seqs[device])
                seqs[device] = (seqs[device] + 1) % SEQ_MODULUS
                report.note(device)
    finally:
        if sock is not None:
            sock.close()
    return report
