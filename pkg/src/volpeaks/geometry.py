"""View and pose state: cameras, volume transforms, clip planes.

Small pure-Python vector/matrix/quaternion helpers over plain tuples keep the
interactive state immutable and cheap to snapshot; the renderer converts to
numpy arrays at frame time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

Vec3 = tuple[float, float, float]
Quat = tuple[float, float, float, float]  # (w, x, y, z)
Mat3 = tuple[Vec3, Vec3, Vec3]  # rows

IDENTITY3: Mat3 = ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0))


def vadd(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2])


def vsub(a: Vec3, b: Vec3) -> Vec3:
    return (a[0] - b[0], a[1] - b[1], a[2] - b[2])


def vscale(a: Vec3, s: float) -> Vec3:
    return (a[0] * s, a[1] * s, a[2] * s)


def vdot(a: Vec3, b: Vec3) -> float:
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]


def vcross(a: Vec3, b: Vec3) -> Vec3:
    return (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )


def vnorm(a: Vec3) -> float:
    return math.sqrt(vdot(a, a))


def vnormalize(a: Vec3) -> Vec3:
    n = vnorm(a)
    if n == 0.0:
        raise ValueError("cannot normalize a zero vector")
    return (a[0] / n, a[1] / n, a[2] / n)


def mat_mul(a: Mat3, b: Mat3) -> Mat3:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(3)) for j in range(3)) for i in range(3)
    )


def mat_vec(m: Mat3, v: Vec3) -> Vec3:
    return (
        m[0][0] * v[0] + m[0][1] * v[1] + m[0][2] * v[2],
        m[1][0] * v[0] + m[1][1] * v[1] + m[1][2] * v[2],
        m[2][0] * v[0] + m[2][1] * v[1] + m[2][2] * v[2],
    )


def mat_transpose(m: Mat3) -> Mat3:
    return (
        (m[0][0], m[1][0], m[2][0]),
        (m[0][1], m[1][1], m[2][1]),
        (m[0][2], m[1][2], m[2][2]),
    )


def mat_det(m: Mat3) -> float:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def rotation_x(angle: float) -> Mat3:
    c, s = math.cos(angle), math.sin(angle)
    return ((1.0, 0.0, 0.0), (0.0, c, -s), (0.0, s, c))


def rotation_y(angle: float) -> Mat3:
    c, s = math.cos(angle), math.sin(angle)
    return ((c, 0.0, s), (0.0, 1.0, 0.0), (-s, 0.0, c))


def rotation_z(angle: float) -> Mat3:
    c, s = math.cos(angle), math.sin(angle)
    return ((c, -s, 0.0), (s, c, 0.0), (0.0, 0.0, 1.0))


def orthonormalize(m: Mat3) -> Mat3:
    """Nearest-ish rotation via Gram-Schmidt on the columns (det kept +1)."""
    c0 = vnormalize((m[0][0], m[1][0], m[2][0]))
    c1 = (m[0][1], m[1][1], m[2][1])
    c1 = vsub(c1, vscale(c0, vdot(c1, c0)))
    c1 = vnormalize(c1)
    c2 = vcross(c0, c1)
    return (
        (c0[0], c1[0], c2[0]),
        (c0[1], c1[1], c2[1]),
        (c0[2], c1[2], c2[2]),
    )


def orthonormality_error(m: Mat3) -> float:
    """Max absolute deviation of m^T m from the identity."""
    mt = mat_transpose(m)
    p = mat_mul(mt, m)
    err = 0.0
    for i in range(3):
        for j in range(3):
            target = 1.0 if i == j else 0.0
            err = max(err, abs(p[i][j] - target))
    return err


# -- quaternions (w, x, y, z) -------------------------------------------------


def qmul(a: Quat, b: Quat) -> Quat:
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (
        aw * bw - ax * bx - ay * by - az * bz,
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
    )


def qconj(q: Quat) -> Quat:
    return (q[0], -q[1], -q[2], -q[3])


def qnorm(q: Quat) -> float:
    return math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])


def qnormalize(q: Quat) -> Quat:
    n = qnorm(q)
    if n == 0.0:
        raise ValueError("cannot normalize a zero quaternion")
    return (q[0] / n, q[1] / n, q[2] / n, q[3] / n)


def qrotate(q: Quat, v: Vec3) -> Vec3:
    """Rotate vector v by unit quaternion q."""
    w, x, y, z = q
    # q * (0, v) * conj(q), expanded
    tx = 2.0 * (y * v[2] - z * v[1])
    ty = 2.0 * (z * v[0] - x * v[2])
    tz = 2.0 * (x * v[1] - y * v[0])
    return (
        v[0] + w * tx + (y * tz - z * ty),
        v[1] + w * ty + (z * tx - x * tz),
        v[2] + w * tz + (x * ty - y * tx),
    )


def qslerp(a: Quat, b: Quat, u: float) -> Quat:
    """Spherical linear interpolation along the shorter arc."""
    dot = a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3]
    if dot < 0.0:
        b = (-b[0], -b[1], -b[2], -b[3])
        dot = -dot
    if dot > 0.9995:
        out = tuple(a[i] + u * (b[i] - a[i]) for i in range(4))
        return qnormalize(out)
    theta = math.acos(min(dot, 1.0))
    s = math.sin(theta)
    wa = math.sin((1.0 - u) * theta) / s
    wb = math.sin(u * theta) / s
    return tuple(wa * a[i] + wb * b[i] for i in range(4))


def z_twist(q: Quat) -> float:
    """Signed rotation angle of q about the z axis (its twist component)."""
    w, _, _, z = q
    if w < 0.0:
        w, z = -w, -z
    if w == 0.0 and z == 0.0:
        return 0.0
    return 2.0 * math.atan2(z, w)


# -- view / pose state --------------------------------------------------------


@dataclass(frozen=True)
class Camera:
    """Pinhole camera: eye, look-at target, up hint, vertical FOV, image size."""

    eye: Vec3
    look_at: Vec3
    up: Vec3 = (0.0, 1.0, 0.0)
    vertical_fov: float = math.radians(45.0)
    image_size: tuple[int, int] = (512, 512)

    def __post_init__(self):
        if self.eye == self.look_at:
            raise ValueError("camera eye and look_at must differ")
        if not (0.0 < self.vertical_fov < math.pi):
            raise ValueError(f"vertical_fov must be in (0, pi), got {self.vertical_fov}")
        w, h = self.image_size
        if w < 1 or h < 1:
            raise ValueError(f"image_size must be >= 1 x 1, got {self.image_size}")

    def basis(self) -> tuple[Vec3, Vec3, Vec3]:
        """(forward, right, true up), all unit length."""
        forward = vnormalize(vsub(self.look_at, self.eye))
        right = vnormalize(vcross(forward, self.up))
        true_up = vcross(right, forward)
        return forward, right, true_up

    def half_extents(self) -> tuple[float, float]:
        """(half_w, half_h): image-plane half sizes at unit distance."""
        w, h = self.image_size
        half_h = math.tan(self.vertical_fov / 2.0)
        return half_h * w / h, half_h


@dataclass(frozen=True)
class VolumeTransform:
    """Rigid pose of the volume: rotation (rows, det +1) plus translation."""

    rotation: Mat3 = IDENTITY3
    translation: Vec3 = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if orthonormality_error(self.rotation) > 1e-6:
            raise ValueError("rotation is not orthonormal within 1e-6")
        if abs(mat_det(self.rotation) - 1.0) > 1e-6:
            raise ValueError("rotation determinant is not +1 within 1e-6")

    @classmethod
    def identity(cls) -> "VolumeTransform":
        return cls()

    def rotated_by(self, delta: Mat3) -> "VolumeTransform":
        """Compose a world-frame rotation onto the pose, re-orthonormalized."""
        return VolumeTransform(orthonormalize(mat_mul(delta, self.rotation)), self.translation)

    def translated_by(self, delta: Vec3) -> "VolumeTransform":
        return VolumeTransform(self.rotation, vadd(self.translation, delta))

    def world_to_local(self, p: Vec3) -> Vec3:
        return mat_vec(mat_transpose(self.rotation), vsub(p, self.translation))

    def local_to_world(self, p: Vec3) -> Vec3:
        return vadd(mat_vec(self.rotation, p), self.translation)


@dataclass(frozen=True)
class ClipPlane:
    """Half-space cut in volume-local space.

    A local point p is kept when dot(normal, p) <= offset; the normal points
    toward the clipped side. Disabled planes keep everything.
    """

    normal: Vec3 = (0.0, 0.0, 1.0)
    offset: float = 0.0
    enabled: bool = False

    def __post_init__(self):
        if abs(vnorm(self.normal) - 1.0) > 1e-6:
            raise ValueError("clip plane normal must be unit length within 1e-6")

    def keeps(self, p: Vec3) -> bool:
        return not self.enabled or vdot(self.normal, p) <= self.offset
