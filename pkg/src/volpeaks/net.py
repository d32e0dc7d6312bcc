"""Binary telemetry protocol and the UDP receiver.

Each datagram carries exactly one controller sample in a fixed 48-byte
little-endian layout:

    offset  size  field
    0       4     magic ``b"MVW1"``
    4       1     protocol version (1)
    5       1     device id (0 = main controller, 1 = nav pad)
    6       2     sequence number (wraps at 65536)
    8       8     timestamp, microseconds
    16      12    position x, y, z (float32, meters)
    28      16    orientation quaternion w, x, y, z (float32)
    44      2     button bitmask
    46      1     trigger, 0..255 mapping to 0.0..1.0
    47      1     reserved, must be 0 on encode (ignored on decode)

Decoding never raises bare struct errors: every malformed datagram maps to a
:class:`ProtocolError` subclass naming what was wrong, so receiver counters
and logs can distinguish truncation from corruption from version skew.
"""

from __future__ import annotations

import queue
import socket
import struct
import threading
from dataclasses import dataclass

from .controllers import Button, ControllerSample, Device

MAGIC = b"MVW1"
PROTOCOL_VERSION = 1
PACKET_SIZE = 48
DEFAULT_PORT = 7741
SEQ_MODULUS = 1 << 16

_LAYOUT = struct.Struct("<4sBBHQ3f4fHBB")
assert _LAYOUT.size == PACKET_SIZE

# Bit assignments for the button mask. Main-controller buttons occupy the low
# byte and nav-pad buttons the high byte so a dump is readable in hex.
BUTTON_BITS: dict[Button, int] = {
    Button.BIG: 1 << 0,
    Button.MODE_CH: 1 << 1,
    Button.MODE_W: 1 << 2,
    Button.ADD: 1 << 8,
    Button.DELETE: 1 << 9,
    Button.TOGGLE_ENABLE: 1 << 10,
    Button.SELECT_NEXT: 1 << 11,
    Button.CYCLE_COLOR: 1 << 12,
}
_BITS_TO_BUTTON = {bit: button for button, bit in BUTTON_BITS.items()}
_KNOWN_MASK = 0
for _bit in BUTTON_BITS.values():
    _KNOWN_MASK |= _bit


class ProtocolError(ValueError):
    """Base class for malformed telemetry datagrams."""


class PacketLengthError(ProtocolError):
    pass


class BadMagicError(ProtocolError):
    pass


class UnsupportedVersionError(ProtocolError):
    pass


class UnknownDeviceError(ProtocolError):
    pass


class BadFieldError(ProtocolError):
    """Payload fields decoded but failed validation (NaN pose, bad quat...)."""


def buttons_to_mask(buttons) -> int:
    mask = 0
    for button in buttons:
        mask |= BUTTON_BITS[Button(button)]
    return mask


def mask_to_buttons(mask: int) -> frozenset[Button]:
    return frozenset(
        button for bit, button in _BITS_TO_BUTTON.items() if mask & bit
    )


def encode_sample(sample: ControllerSample, seq: int) -> bytes:
    """Pack one sample into the 48-byte wire form."""
    if not 0 <= seq < SEQ_MODULUS:
        raise ValueError(f"sequence number out of range: {seq}")
    trigger = int(round(sample.trigger * 255.0))
    return _LAYOUT.pack(
        MAGIC,
        PROTOCOL_VERSION,
        int(sample.device),
        seq,
        sample.timestamp_us,
        *sample.position,
        *sample.orientation,
        buttons_to_mask(sample.buttons),
        trigger,
        0,
    )


def decode_packet(data: bytes) -> tuple[ControllerSample, int]:
    """Unpack one datagram; returns (sample, sequence number).

    Raises a :class:`ProtocolError` subclass identifying the first problem
    found; checks run in layout order so truncated packets report their
    length before anything else.
    """
    if len(data) != PACKET_SIZE:
        raise PacketLengthError(
            f"expected {PACKET_SIZE} bytes, got {len(data)}"
        )
    (
        magic,
        version,
        device_id,
        seq,
        timestamp_us,
        px,
        py,
        pz,
        qw,
        qx,
        qy,
        qz,
        mask,
        trigger_raw,
        _reserved,
    ) = _LAYOUT.unpack(data)
    if magic != MAGIC:
        raise BadMagicError(f"bad magic {magic!r}")
    if version != PROTOCOL_VERSION:
        raise UnsupportedVersionError(f"unsupported version {version}")
    try:
        device = Device(device_id)
    except ValueError:
        raise UnknownDeviceError(f"unknown device id {device_id}") from None
    if mask & ~_KNOWN_MASK:
        raise BadFieldError(f"unknown button bits 0x{mask & ~_KNOWN_MASK:04x}")
    try:
        sample = ControllerSample(
            device=device,
            timestamp_us=timestamp_us,
            position=(px, py, pz),
            orientation=(qw, qx, qy, qz),
            buttons=mask_to_buttons(mask),
            trigger=trigger_raw / 255.0,
        )
    except ValueError as exc:
        raise BadFieldError(str(exc)) from None
    return sample, seq


def _seq_went_backwards(prev: int, current: int) -> bool:
    """True when ``current`` is older than ``prev`` under wrap-around.

    The forward distance prev->current modulo 2^16 is compared against half
    the sequence space; anything in the far half counts as reordering.
    """
    return 0 < (prev - current) % SEQ_MODULUS < SEQ_MODULUS // 2


@dataclass
class ReceiverStats:
    received: int = 0
    malformed: int = 0
    reordered: int = 0
    overflow: int = 0

    def as_dict(self) -> dict:
        return {
            "received": self.received,
            "malformed": self.malformed,
            "reordered": self.reordered,
            "overflow": self.overflow,
        }


class UdpReceiver:
    """Listens for telemetry datagrams and queues the decoded samples.

    Decoded samples land in a bounded queue; when full, the oldest sample is
    dropped so the stream stays fresh under a slow consumer. The counters
    struct tallies packets received, rejects, per-device sequence reordering,
    and overflow drops.
    """

    def __init__(self, host: str = "127.0.0.1", port: int = DEFAULT_PORT,
                 queue_size: int = 1024):
        self.stats = ReceiverStats()
        self.samples: queue.Queue[ControllerSample] = queue.Queue(queue_size)
        self._last_seq: dict[Device, int] = {}
        self._sock = socket.socket(socket.AF_INET, socket.SOCK_DGRAM)
        self._sock.bind((host, port))
        self._sock.settimeout(0.2)
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None
        self._lock = threading.Lock()

    @property
    def port(self) -> int:
        return self._sock.getsockname()[1]

    def start(self) -> "UdpReceiver":
        self._thread = threading.Thread(
            target=self._run, name="udp-receiver", daemon=True
        )
        self._thread.start()
        return self

    def stop(self):
        self._stop.set()
        if self._thread is not None:
            self._thread.join()
            self._thread = None
        self._sock.close()

    def _run(self):
        while not self._stop.is_set():
            try:
                data, _addr = self._sock.recvfrom(4096)
            except socket.timeout:
                continue
            except OSError:
                break
            self.handle_datagram(data)

    def handle_datagram(self, data: bytes):
        """Decode and enqueue one datagram, updating the counters."""
        with self._lock:
            try:
                sample, seq = decode_packet(data)
            except ProtocolError:
                self.stats.malformed += 1
                return
            self.stats.received += 1
            prev = self._last_seq.get(sample.device)
            if prev is not None and _seq_went_backwards(prev, seq):
                self.stats.reordered += 1
            else:
                self._last_seq[sample.device] = seq
            try:
                self.samples.put_nowait(sample)
            except queue.Full:
                try:
                    self.samples.get_nowait()
                except queue.Empty:
                    pass
                self.stats.overflow += 1
                self.samples.put_nowait(sample)


def send_sample(sock: socket.socket, address: tuple[str, int],
                sample: ControllerSample, seq: int):
    sock.sendto(encode_sample(sample, seq % SEQ_MODULUS), address)
