"""CPU ray caster: per-pixel rays, interval clipping, front-to-back compositing.

Frames are deterministic: every pixel is computed independently from read-only
inputs, so output is bit-identical across runs, tile partitions and thread
counts. Parallelism is row bands on a thread pool; the kernels release the GIL.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .geometry import Camera, ClipPlane, Vec3, VolumeTransform, mat_transpose, vnormalize
from .transfer import LookupTable, TransferFunction
from .volume import Volume, VolumeMeta

TILE_ROWS = 16

DEFAULT_STEP_FACTOR = 0.5  # of the smallest voxel spacing
DEFAULT_REFERENCE_FACTOR = 1.0
DEFAULT_EARLY_TERMINATION = 0.99


@dataclass(frozen=True)
class RenderSettings:
    """Ray marching parameters.

    step_size / reference_step default to 0.5x / 1.0x the smallest voxel
    spacing of the rendered volume when left as None.
    early_termination_alpha 1.0 disables early ray termination.
    """

    step_size: float | None = None
    early_termination_alpha: float = DEFAULT_EARLY_TERMINATION
    reference_step: float | None = None
    background: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 1.0)

    def __post_init__(self):
        if self.step_size is not None and not (self.step_size > 0):
            raise ValueError(f"step_size must be > 0, got {self.step_size}")
        if self.reference_step is not None and not (self.reference_step > 0):
            raise ValueError(f"reference_step must be > 0, got {self.reference_step}")
        if not (0.0 < self.early_termination_alpha <= 1.0):
            raise ValueError(
                f"early_termination_alpha must be in (0, 1], got {self.early_termination_alpha}"
            )
        if len(self.background) != 4 or any(not (0.0 <= c <= 1.0) for c in self.background):
            raise ValueError(f"background must be RGBA in [0, 1], got {self.background}")

    def resolve(self, meta: VolumeMeta) -> tuple[float, float]:
        """Concrete (step, reference_step) for a volume."""
        smallest = min(meta.spacing)
        step = self.step_size if self.step_size is not None else DEFAULT_STEP_FACTOR * smallest
        ref = (
            self.reference_step
            if self.reference_step is not None
            else DEFAULT_REFERENCE_FACTOR * smallest
        )
        return step, ref


@dataclass
class FrameBuffer:
    """RGBA8 image, row-major with the origin at the top left."""

    pixels: np.ndarray  # (height, width, 4) uint8

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.ndim != 3 or self.pixels.shape[2] != 4:
            raise ValueError(f"pixels must be (H, W, 4) uint8, got {self.pixels.shape}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def to_ppm(self) -> bytes:
        """Binary PPM (P6); alpha is dropped."""
        header = f"P6\n{self.width} {self.height}\n255\n".encode("ascii")
        return header + np.ascontiguousarray(self.pixels[:, :, :3]).tobytes()

    def to_png(self) -> bytes:
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(self.pixels, mode="RGBA").save(buf, format="PNG")
        return buf.getvalue()

    def save(self, path) -> None:
        """Write PPM or PNG depending on the file extension."""
        path = str(path)
        if path.lower().endswith(".ppm"):
            data = self.to_ppm()
        elif path.lower().endswith(".png"):
            data = self.to_png()
        else:
            raise ValueError(f"unsupported image extension (use .ppm or .png): {path}")
        with open(path, "wb") as fh:
            fh.write(data)


def opacity_correct(alpha: float, step: float, reference_step: float) -> float:
    """Rescale a per-reference-step opacity to an arbitrary step length:
    1 - (1 - alpha) ** (step / reference_step)."""
    if not (step > 0 and reference_step > 0):
        raise ValueError("step and reference_step must be > 0")
    return 1.0 - (1.0 - alpha) ** (step / reference_step)


def camera_ray(camera: Camera, px: int, py: int) -> tuple[Vec3, Vec3]:
    """Pinhole ray (origin, unit direction) through the center of pixel
    (px, py); px runs right, py runs down from the top-left pixel."""
    w, h = camera.image_size
    if not (0 <= px < w and 0 <= py < h):
        raise ValueError(f"pixel ({px}, {py}) outside {w}x{h} image")
    forward, right, true_up = camera.basis()
    half_w, half_h = camera.half_extents()
    u = ((px + 0.5) / w) * 2.0 - 1.0
    v = 1.0 - ((py + 0.5) / h) * 2.0
    d = (
        forward[0] + u * half_w * right[0] + v * half_h * true_up[0],
        forward[1] + u * half_w * right[1] + v * half_h * true_up[1],
        forward[2] + u * half_w * right[2] + v * half_h * true_up[2],
    )
    return camera.eye, vnormalize(d)


def _pack_transform(transform: VolumeTransform | None) -> tuple[np.ndarray, np.ndarray]:
    if transform is None:
        transform = VolumeTransform.identity()
    rt = np.array(mat_transpose(transform.rotation), dtype=np.float64).reshape(9)
    t = np.array(transform.translation, dtype=np.float64)
    return rt, t


def _pack_plane(plane: ClipPlane | None) -> np.ndarray:
    if plane is None:
        plane = ClipPlane()
    return np.array(
        [*plane.normal, plane.offset, 1.0 if plane.enabled else 0.0], dtype=np.float64
    )


def clip_interval(
    origin: Vec3,
    direction: Vec3,
    meta: VolumeMeta,
    transform: VolumeTransform | None = None,
    plane: ClipPlane | None = None,
) -> tuple[float, float] | None:
    """Parametric interval of a world-space ray inside the transformed volume
    box, minus the clipped half-space. None when the ray misses; t_near >= 0."""
    rt, t = _pack_transform(transform)
    p5 = _pack_plane(plane)
    hx, hy, hz = meta.half_extent
    hit, t0, t1 = kernels.ray_interval(
        float(origin[0]), float(origin[1]), float(origin[2]),
        float(direction[0]), float(direction[1]), float(direction[2]),
        hx, hy, hz, rt, t, p5,
    )
    return (t0, t1) if hit else None


def _lut_arrays(
    lut: LookupTable, step: float, ref: float
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rgb = np.ascontiguousarray(lut.rgba[:, :3])
    alpha = np.ascontiguousarray(lut.rgba[:, 3])
    alpha_step = 1.0 - (1.0 - alpha) ** (step / ref)
    return rgb, alpha, alpha_step


def _params(settings: RenderSettings, step: float, ref: float) -> np.ndarray:
    return np.array(
        [step, ref, settings.early_termination_alpha, *settings.background], dtype=np.float64
    )


def composite_ray(
    origin: Vec3,
    direction: Vec3,
    interval: tuple[float, float],
    volume: Volume,
    lut: LookupTable,
    settings: RenderSettings | None = None,
) -> tuple[float, float, float, float]:
    """Composite one ray interval front to back; returns straight RGBA floats
    (already blended over the background color)."""
    settings = settings or RenderSettings()
    step, ref = settings.resolve(volume.meta)
    rgb, alpha, alpha_step = _lut_arrays(lut, step, ref)
    sx, sy, sz = volume.meta.spacing
    return kernels.composite_interval(
        volume.normalized, sx, sy, sz,
        float(origin[0]), float(origin[1]), float(origin[2]),
        float(direction[0]), float(direction[1]), float(direction[2]),
        float(interval[0]), float(interval[1]),
        rgb, alpha, alpha_step, _params(settings, step, ref),
    )


def render_frame(
    volume: Volume,
    tf: TransferFunction,
    camera: Camera,
    transform: VolumeTransform | None = None,
    plane: ClipPlane | None = None,
    settings: RenderSettings | None = None,
    threads: int = 1,
) -> FrameBuffer:
    """Render a full frame: build the lookup table once, composite every
    pixel's ray, quantize to RGBA8 (round half up)."""
    settings = settings or RenderSettings()
    step, ref = settings.resolve(volume.meta)
    lut = tf.build_lut()
    rgb, alpha, alpha_step = _lut_arrays(lut, step, ref)
    params = _params(settings, step, ref)

    width, height = camera.image_size
    forward, right, true_up = camera.basis()
    half_w, half_h = camera.half_extents()
    cam16 = np.array(
        [*camera.eye, *right, *true_up, *forward, half_w, half_h, float(width), float(height)],
        dtype=np.float64,
    )
    rt, t = _pack_transform(transform)
    p5 = _pack_plane(plane)
    spc = np.array(volume.meta.spacing, dtype=np.float64)
    out = np.empty((height, width, 4), dtype=np.uint8)

    bands = [(y, min(y + TILE_ROWS, height)) for y in range(0, height, TILE_ROWS)]

    def run(band):
        y0, y1 = band
        kernels.render_rows(
            out, y0, y1, cam16, rt, t, p5, volume.normalized, spc,
            rgb, alpha, alpha_step, params,
        )

    if threads <= 1:
        for band in bands:
            run(band)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, bands))
    return FrameBuffer(out)


def frame_volume(
    meta: VolumeMeta,
    image_size: tuple[int, int] = (512, 512),
    vertical_fov: float = math.radians(45.0),
    margin: float = 1.1,
) -> Camera:
    """Camera on the +z axis looking at the origin, pulled back far enough
    that the whole volume fits in view with the given margin."""
    hx, hy, hz = meta.half_extent
    radius = math.sqrt(hx * hx + hy * hy + hz * hz)
    distance = radius * margin / math.tan(vertical_fov / 2.0) + radius
    return Camera(
        eye=(0.0, 0.0, distance),
        look_at=(0.0, 0.0, 0.0),
        up=(0.0, 1.0, 0.0),
        vertical_fov=vertical_fov,
        image_size=image_size,
    )
