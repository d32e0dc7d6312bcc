"""Scalar volume grids: loading, synthetic phantom generation, sampling, histograms.

A volume is a regular 3D grid of scalar voxels stored x-fastest (then y, then z).
Voxel values are 8- or 16-bit unsigned integers on disk and are normalized to
[0, 1] for all downstream consumers (transfer functions, rendering).

The world-space bounding box of a volume is centered at the origin with extent
``dims * spacing``; voxel (i, j, k) has its center at
``((i + 0.5) - nx / 2) * sx`` on the x axis (y, z analogous).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .kernels import trilinear_sample_point

HISTOGRAM_BINS = 256

# Phantom shell boundaries as fractions of the half-extent (Chebyshev radius),
# and the material value inside each shell.
PHANTOM_CORE_RADIUS = 0.45
PHANTOM_MIDDLE_RADIUS = 0.70
PHANTOM_OUTER_RADIUS = 0.90
PHANTOM_CORE_VALUE = 0.85
PHANTOM_MIDDLE_VALUE = 0.55
PHANTOM_OUTER_VALUE = 0.25
PHANTOM_MIN_DIM = 16


class VolumeFormatError(ValueError):
    """Raised for malformed volume metadata or raw payloads."""


class ValueType(enum.Enum):
    """Storage type of one voxel on disk."""

    U8 = "u8"
    U16LE = "u16le"

    @property
    def dtype(self) -> np.dtype:
        return np.dtype("u1") if self is ValueType.U8 else np.dtype("<u2")

    @property
    def max_raw(self) -> int:
        return 255 if self is ValueType.U8 else 65535


@dataclass(frozen=True)
class VolumeMeta:
    """Grid dimensions, voxel spacing and storage type of a volume."""

    dims: tuple[int, int, int]
    spacing: tuple[float, float, float]
    value_type: ValueType

    def __post_init__(self):
        if len(self.dims) != 3 or any(int(d) != d or d < 1 for d in self.dims):
            raise VolumeFormatError(f"dims must be three integers >= 1, got {self.dims}")
        if len(self.spacing) != 3 or any(not (s > 0) for s in self.spacing):
            raise VolumeFormatError(f"spacing must be three positive reals, got {self.spacing}")
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        object.__setattr__(self, "spacing", tuple(float(s) for s in self.spacing))

    @property
    def voxel_count(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def extent(self) -> tuple[float, float, float]:
        """World-space edge lengths of the bounding box."""
        return tuple(d * s for d, s in zip(self.dims, self.spacing))

    @property
    def half_extent(self) -> tuple[float, float, float]:
        return tuple(e / 2.0 for e in self.extent)


class Volume:
    """Immutable 3D scalar grid.

    ``data`` keeps the raw integer voxels exactly as stored on disk (flat,
    x-fastest); ``normalized`` is a cached float32 view in [0, 1] shaped
    (nz, ny, nx) so that C order matches the x-fastest layout.
    """

    def __init__(self, meta: VolumeMeta, data: np.ndarray):
        data = np.asarray(data, dtype=meta.value_type.dtype).reshape(-1)
        if data.size != meta.voxel_count:
            raise VolumeFormatError(
                f"data length {data.size} does not match dims {meta.dims} "
                f"({meta.voxel_count} voxels)"
            )
        self.meta = meta
        self._data = data
        self._data.setflags(write=False)
        nx, ny, nz = meta.dims
        norm = (data.astype(np.float32) / np.float32(meta.value_type.max_raw)).reshape(nz, ny, nx)
        norm.setflags(write=False)
        self._normalized = norm
        self._histogram = None

    @property
    def data(self) -> np.ndarray:
        """Raw stored voxels, flat, x-fastest. Read-only."""
        return self._data

    @property
    def normalized(self) -> np.ndarray:
        """Voxels normalized to [0, 1] as float32, shaped (nz, ny, nx). Read-only."""
        return self._normalized

    def value_at(self, i: int, j: int, k: int) -> float:
        """Normalized value of voxel (i, j, k) = (x, y, z) index."""
        return float(self._normalized[k, j, i])

    def raw_bytes(self) -> bytes:
        """Voxel payload exactly as serialized on disk (little-endian)."""
        return self._data.tobytes()


REQUIRED_META_KEYS = ("dims", "spacing", "type", "data")


def parse_meta_text(text: str) -> tuple[VolumeMeta, str]:
    """Parse a volume metadata file body.

    Returns the metadata and the raw-file reference (a path relative to the
    metadata file). Blank lines and ``#`` comments are allowed; unknown or
    missing keys are errors.
    """
    fields: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise VolumeFormatError(f"line {lineno}: expected 'key = value', got {stripped!r}")
        key, _, value = stripped.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in REQUIRED_META_KEYS:
            raise VolumeFormatError(f"line {lineno}: unknown key {key!r}")
        if key in fields:
            raise VolumeFormatError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    missing = [k for k in REQUIRED_META_KEYS if k not in fields]
    if missing:
        raise VolumeFormatError(f"missing required keys: {', '.join(missing)}")

    try:
        dims = tuple(int(p) for p in fields["dims"].split())
    except ValueError as exc:
        raise VolumeFormatError(f"dims: {fields['dims']!r} is not three integers") from exc
    try:
        spacing = tuple(float(p) for p in fields["spacing"].split())
    except ValueError as exc:
        raise VolumeFormatError(f"spacing: {fields['spacing']!r} is not three reals") from exc
    try:
        value_type = ValueType(fields["type"])
    except ValueError:
        raise VolumeFormatError(
            f"type: unknown value type {fields['type']!r} (expected 'u8' or 'u16le')"
        ) from None
    if not fields["data"]:
        raise VolumeFormatError("data: empty raw file reference")
    return VolumeMeta(dims, spacing, value_type), fields["data"]


def load_volume(meta_path: str | Path) -> Volume:
    """Load a volume from its metadata file and the raw file it references."""
    meta_path = Path(meta_path)
    if not meta_path.is_file():
        raise FileNotFoundError(f"volume metadata file not found: {meta_path}")
    meta, raw_ref = parse_meta_text(meta_path.read_text(encoding="utf-8"))
    raw_path = meta_path.parent / raw_ref
    if not raw_path.is_file():
        raise FileNotFoundError(f"raw volume file not found: {raw_path}")
    payload = raw_path.read_bytes()
    expected = meta.voxel_count * meta.value_type.dtype.itemsize
    if len(payload) != expected:
        raise VolumeFormatError(
            f"raw file {raw_path} has {len(payload)} bytes, expected {expected} "
            f"for dims {meta.dims} of type {meta.value_type.value}"
        )
    data = np.frombuffer(payload, dtype=meta.value_type.dtype)
    return Volume(meta, data)


def write_volume(volume: Volume, meta_path: str | Path, raw_name: str | None = None) -> Path:
    """Write a volume to a metadata file plus raw payload next to it."""
    meta_path = Path(meta_path)
    if raw_name is None:
        raw_name = meta_path.stem + ".raw"
    meta = volume.meta
    lines = [
        f"dims = {meta.dims[0]} {meta.dims[1]} {meta.dims[2]}",
        f"spacing = {meta.spacing[0]} {meta.spacing[1]} {meta.spacing[2]}",
        f"type = {meta.value_type.value}",
        f"data = {raw_name}",
    ]
    meta_path.parent.mkdir(parents=True, exist_ok=True)
    meta_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    (meta_path.parent / raw_name).write_bytes(volume.raw_bytes())
    return meta_path


def generate_phantom(
    dims: tuple[int, int, int] = (64, 64, 64),
    spacing: tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> Volume:
    """Deterministic three-material test volume.

    Nested axis-aligned box shells around the grid center: a core at value
    0.85 out to 45 % of the half-extent, a middle shell at 0.55 out to 70 %,
    an outer shell at 0.25 out to 90 %, background 0 beyond. Values are
    quantized to u16 storage (exact to within 8e-6 of the nominal values).
    """
    meta = VolumeMeta(tuple(dims), tuple(spacing), ValueType.U16LE)
    if any(d < PHANTOM_MIN_DIM for d in meta.dims):
        raise ValueError(f"phantom dims must each be >= {PHANTOM_MIN_DIM}, got {meta.dims}")
    nx, ny, nz = meta.dims
    # Per-axis voxel-center offset from the volume center, as a fraction of the
    # half-extent on that axis; spacing cancels out.
    fx = np.abs(np.arange(nx) + 0.5 - nx / 2.0) / (nx / 2.0)
    fy = np.abs(np.arange(ny) + 0.5 - ny / 2.0) / (ny / 2.0)
    fz = np.abs(np.arange(nz) + 0.5 - nz / 2.0) / (nz / 2.0)
    radius = np.maximum.reduce(
        np.broadcast_arrays(fz[:, None, None], fy[None, :, None], fx[None, None, :])
    )
    max_raw = meta.value_type.max_raw
    raw = np.select(
        [
            radius <= PHANTOM_CORE_RADIUS,
            radius <= PHANTOM_MIDDLE_RADIUS,
            radius <= PHANTOM_OUTER_RADIUS,
        ],
        [
            round(PHANTOM_CORE_VALUE * max_raw),
            round(PHANTOM_MIDDLE_VALUE * max_raw),
            round(PHANTOM_OUTER_VALUE * max_raw),
        ],
        default=0,
    ).astype(meta.value_type.dtype)
    return Volume(meta, raw.reshape(-1))


def sample_trilinear(volume: Volume, point: tuple[float, float, float]) -> float:
    """Trilinearly interpolated normalized value at a world-space point.

    Points outside the volume's bounding box return 0. Inside, the 8
    surrounding voxel centers are blended; indices are clamped at the faces so
    the outermost half-voxel shell is flat.
    """
    sx, sy, sz = volume.meta.spacing
    return float(
        trilinear_sample_point(
            volume.normalized, sx, sy, sz, float(point[0]), float(point[1]), float(point[2])
        )
    )


def histogram(volume: Volume) -> np.ndarray:
    """Voxel counts over 256 equal-width bins of the normalized range [0, 1].

    Value 1.0 falls in the last bin. Counts always sum to the voxel count.
    """
    if volume._histogram is None:
        norm = volume.data.astype(np.float64) / volume.meta.value_type.max_raw
        bins = np.minimum((norm * HISTOGRAM_BINS).astype(np.int64), HISTOGRAM_BINS - 1)
        counts = np.bincount(bins, minlength=HISTOGRAM_BINS)
        counts.setflags(write=False)
        volume._histogram = counts
    return volume._histogram
