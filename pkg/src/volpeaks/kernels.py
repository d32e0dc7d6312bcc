"""Numba-compiled inner loops for sampling and ray compositing.

All functions are nogil so row-band tiles can run on a plain thread pool;
every pixel is computed independently from read-only inputs, which makes
frames bit-identical for any tile partition or thread count.

Packed argument conventions (float64 arrays):
  cam16:   eye(3), right(3), up(3), forward(3), half_w, half_h, width, height
  rt9:     volume rotation matrix transposed, row-major
  t3:      volume translation
  plane5:  clip normal (3), offset, enabled flag (>= 0.5 means on)
  spc3:    voxel spacing
  params7: step, reference_step, early_termination_alpha, background RGBA
"""

from __future__ import annotations

import numpy as np
from numba import njit

_JIT = dict(cache=True, nogil=True)


@njit(**_JIT)
def trilinear_sample_point(vol, sx, sy, sz, px, py, pz):
    """Trilinear interpolation of the normalized voxel grid at a world point.

    vol is float32 shaped (nz, ny, nx); returns 0.0 outside the bounding box,
    clamped-to-edge interpolation inside.
    """
    nz, ny, nx = vol.shape
    hx = nx * sx * 0.5
    hy = ny * sy * 0.5
    hz = nz * sz * 0.5
    if px < -hx or px > hx or py < -hy or py > hy or pz < -hz or pz > hz:
        return 0.0

    gx = px / sx + nx * 0.5 - 0.5
    gy = py / sy + ny * 0.5 - 0.5
    gz = pz / sz + nz * 0.5 - 0.5
    if gx < 0.0:
        gx = 0.0
    if gy < 0.0:
        gy = 0.0
    if gz < 0.0:
        gz = 0.0
    if gx > nx - 1.0:
        gx = nx - 1.0
    if gy > ny - 1.0:
        gy = ny - 1.0
    if gz > nz - 1.0:
        gz = nz - 1.0

    i0 = int(gx)
    j0 = int(gy)
    k0 = int(gz)
    if i0 > nx - 2:
        i0 = nx - 2
    if j0 > ny - 2:
        j0 = ny - 2
    if k0 > nz - 2:
        k0 = nz - 2
    if i0 < 0:
        i0 = 0
    if j0 < 0:
        j0 = 0
    if k0 < 0:
        k0 = 0
    fx = gx - i0
    fy = gy - j0
    fz = gz - k0
    i1 = i0 + 1 if i0 + 1 < nx else nx - 1
    j1 = j0 + 1 if j0 + 1 < ny else ny - 1
    k1 = k0 + 1 if k0 + 1 < nz else nz - 1

    c000 = float(vol[k0, j0, i0])
    c100 = float(vol[k0, j0, i1])
    c010 = float(vol[k0, j1, i0])
    c110 = float(vol[k0, j1, i1])
    c001 = float(vol[k1, j0, i0])
    c101 = float(vol[k1, j0, i1])
    c011 = float(vol[k1, j1, i0])
    c111 = float(vol[k1, j1, i1])

    c00 = c000 + (c100 - c000) * fx
    c10 = c010 + (c110 - c010) * fx
    c01 = c001 + (c101 - c001) * fx
    c11 = c011 + (c111 - c011) * fx
    c0 = c00 + (c10 - c00) * fy
    c1 = c01 + (c11 - c01) * fy
    return c0 + (c1 - c0) * fz


@njit(**_JIT)
def ray_box(ox, oy, oz, dx, dy, dz, hx, hy, hz):
    """Slab intersection of a ray with the box [-h, h]^3.

    Returns (hit, t_enter, t_exit) without clamping to t >= 0.
    """
    tmin = -1.0e300
    tmax = 1.0e300

    if dx > 1.0e-300 or dx < -1.0e-300:
        inv = 1.0 / dx
        ta = (-hx - ox) * inv
        tb = (hx - ox) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > tmin:
            tmin = ta
        if tb < tmax:
            tmax = tb
    elif ox < -hx or ox > hx:
        return False, 0.0, 0.0

    if dy > 1.0e-300 or dy < -1.0e-300:
        inv = 1.0 / dy
        ta = (-hy - oy) * inv
        tb = (hy - oy) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > tmin:
            tmin = ta
        if tb < tmax:
            tmax = tb
    elif oy < -hy or oy > hy:
        return False, 0.0, 0.0

    if dz > 1.0e-300 or dz < -1.0e-300:
        inv = 1.0 / dz
        ta = (-hz - oz) * inv
        tb = (hz - oz) * inv
        if ta > tb:
            ta, tb = tb, ta
        if ta > tmin:
            tmin = ta
        if tb < tmax:
            tmax = tb
    elif oz < -hz or oz > hz:
        return False, 0.0, 0.0

    if tmax < tmin:
        return False, 0.0, 0.0
    return True, tmin, tmax


@njit(**_JIT)
def ray_interval(ox, oy, oz, dx, dy, dz, hx, hy, hz, rt9, t3, plane5):
    """Parametric interval of a world-space ray inside the transformed volume
    box, intersected with the kept half-space of the clip plane.

    A point p (volume-local) is kept when dot(normal, p) <= offset, so the
    plane normal points toward the clipped side. Returns (hit, t0, t1) with
    t0 >= 0.
    """
    # World ray into volume-local coordinates.
    wx = ox - t3[0]
    wy = oy - t3[1]
    wz = oz - t3[2]
    lox = rt9[0] * wx + rt9[1] * wy + rt9[2] * wz
    loy = rt9[3] * wx + rt9[4] * wy + rt9[5] * wz
    loz = rt9[6] * wx + rt9[7] * wy + rt9[8] * wz
    ldx = rt9[0] * dx + rt9[1] * dy + rt9[2] * dz
    ldy = rt9[3] * dx + rt9[4] * dy + rt9[5] * dz
    ldz = rt9[6] * dx + rt9[7] * dy + rt9[8] * dz

    hit, t0, t1 = ray_box(lox, loy, loz, ldx, ldy, ldz, hx, hy, hz)
    if not hit:
        return False, 0.0, 0.0
    if t0 < 0.0:
        t0 = 0.0

    if plane5[4] >= 0.5:
        c0 = plane5[0] * lox + plane5[1] * loy + plane5[2] * loz - plane5[3]
        cd = plane5[0] * ldx + plane5[1] * ldy + plane5[2] * ldz
        if cd > 1.0e-300 or cd < -1.0e-300:
            tp = -c0 / cd
            if cd > 0.0:
                if tp < t1:
                    t1 = tp
            else:
                if tp > t0:
                    t0 = tp
        elif c0 > 0.0:
            return False, 0.0, 0.0

    if t1 <= t0:
        return False, 0.0, 0.0
    return True, t0, t1


@njit(**_JIT)
def composite_interval(
    vol, sx, sy, sz,
    ox, oy, oz, dx, dy, dz,
    t0, t1,
    lut_rgb, lut_alpha, lut_alpha_step,
    params7,
):
    """Front-to-back compositing of one ray interval, over the background.

    Samples at uniform segment midpoints starting at t0 + step/2; the final
    partial segment is opacity-corrected by its actual length. Returns
    straight (non-premultiplied) RGBA floats in [0, 1].
    """
    step = params7[0]
    ref = params7[1]
    eta = params7[2]

    acc_r = 0.0
    acc_g = 0.0
    acc_b = 0.0
    acc_a = 0.0

    length = t1 - t0
    if length > 0.0:
        nsteps = int(np.ceil(length / step - 1.0e-12))
        for i in range(nsteps):
            seg_start = i * step
            seg_len = step
            full = True
            if seg_start + step > length:
                seg_len = length - seg_start
                full = False
                if seg_len <= 0.0:
                    break
            tm = t0 + seg_start + seg_len * 0.5
            px = ox + tm * dx
            py = oy + tm * dy
            pz = oz + tm * dz
            val = trilinear_sample_point(vol, sx, sy, sz, px, py, pz)
            k = int(val * 256.0)
            if k > 255:
                k = 255
            if k < 0:
                k = 0
            a_raw = lut_alpha[k]
            if a_raw > 0.0:
                if full:
                    a = lut_alpha_step[k]
                else:
                    a = 1.0 - (1.0 - a_raw) ** (seg_len / ref)
                w = (1.0 - acc_a) * a
                acc_r += w * lut_rgb[k, 0]
                acc_g += w * lut_rgb[k, 1]
                acc_b += w * lut_rgb[k, 2]
                acc_a += w
                if eta < 1.0 and acc_a >= eta:
                    break

    w = (1.0 - acc_a) * params7[6]
    acc_r += w * params7[3]
    acc_g += w * params7[4]
    acc_b += w * params7[5]
    acc_a += w

    if acc_a > 0.0:
        return acc_r / acc_a, acc_g / acc_a, acc_b / acc_a, acc_a
    return 0.0, 0.0, 0.0, 0.0


@njit(**_JIT)
def pixel_ray_dir(cam16, px, py):
    """Unit direction of the pinhole ray through the center of pixel (px, py)."""
    u = ((px + 0.5) / cam16[14]) * 2.0 - 1.0
    v = 1.0 - ((py + 0.5) / cam16[15]) * 2.0
    a = u * cam16[12]
    b = v * cam16[13]
    dx = cam16[9] + a * cam16[3] + b * cam16[6]
    dy = cam16[10] + a * cam16[4] + b * cam16[7]
    dz = cam16[11] + a * cam16[5] + b * cam16[8]
    inv = 1.0 / np.sqrt(dx * dx + dy * dy + dz * dz)
    return dx * inv, dy * inv, dz * inv


@njit(**_JIT)
def render_rows(
    out, y0, y1,
    cam16, rt9, t3, plane5,
    vol, spc3,
    lut_rgb, lut_alpha, lut_alpha_step,
    params7,
):
    """Render the pixel rows [y0, y1) into the uint8 RGBA buffer ``out``."""
    width = out.shape[1]
    nz, ny, nx = vol.shape
    sx = spc3[0]
    sy = spc3[1]
    sz = spc3[2]
    hx = nx * sx * 0.5
    hy = ny * sy * 0.5
    hz = nz * sz * 0.5
    ex = cam16[0]
    ey = cam16[1]
    ez = cam16[2]
    for py in range(y0, y1):
        for px in range(width):
            dx, dy, dz = pixel_ray_dir(cam16, px, py)
            hit, t0, t1 = ray_interval(ex, ey, ez, dx, dy, dz, hx, hy, hz, rt9, t3, plane5)
            if not hit:
                t0 = 0.0
                t1 = 0.0
            r, g, b, a = composite_interval(
                vol, sx, sy, sz, ex, ey, ez, dx, dy, dz, t0, t1,
                lut_rgb, lut_alpha, lut_alpha_step, params7,
            )
            qr = int(r * 255.0 + 0.5)
            qg = int(g * 255.0 + 0.5)
            qb = int(b * 255.0 + 0.5)
            qa = int(a * 255.0 + 0.5)
            if qr > 255:
                qr = 255
            if qg > 255:
                qg = 255
            if qb > 255:
                qb = 255
            if qa > 255:
                qa = 255
            out[py, px, 0] = qr
            out[py, px, 1] = qg
            out[py, px, 2] = qb
            out[py, px, 3] = qa
