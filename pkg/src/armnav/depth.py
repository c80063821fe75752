"""Raycast depth sensing over the scene's box and sphere primitives.

Depth is planar (camera-z), the convention of common simulator depth
buffers: ray directions carry a forward component of exactly 1, so the
slab/quadratic parameter t is the planar depth directly. Only statics and
objects are rendered; pixels that hit nothing read the max-range
sentinel. The per-pixel math is written so a scalar per-primitive oracle
reproduces it bit for bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import as_vec3
from .scene import Scene

try:
    from numba import njit as _njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional accelerator
    _HAVE_NUMBA = False

    def _njit(*args, **kwargs):
        def wrap(f):
            return f

        return wrap


_TINY = 1e-300


@dataclass(frozen=True)
class CameraPose:
    position: np.ndarray
    yaw: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "position", as_vec3(self.position))


@dataclass(frozen=True)
class DepthFrame:
    width: int
    height: int
    fov_deg: float
    max_range: float
    camera: CameraPose
    values: np.ndarray  # (height, width) planar depth, row-major

    def __post_init__(self) -> None:
        if self.values.shape != (self.height, self.width):
            raise ValueError("depth values shape must match the declared resolution")


_GRID_CACHE: dict[tuple[int, int, float], tuple[np.ndarray, np.ndarray]] = {}


def _pixel_grid(width: int, height: int, fov_deg: float) -> tuple[np.ndarray, np.ndarray]:
    key = (width, height, fov_deg)
    cached = _GRID_CACHE.get(key)
    if cached is None:
        tan_half = math.tan(math.radians(fov_deg) / 2.0)
        i = np.arange(width, dtype=np.float64)
        j = np.arange(height, dtype=np.float64)
        u = (2.0 * (i + 0.5) / width - 1.0) * tan_half
        v = (1.0 - 2.0 * (j + 0.5) / height) * tan_half * (height / width)
        uu, vv = np.meshgrid(u, v)  # (H, W)
        cached = (uu.reshape(-1), vv.reshape(-1))
        _GRID_CACHE[key] = cached
    return cached


def ray_directions(width: int, height: int, fov_deg: float, yaw: float) -> np.ndarray:
    """World-frame ray directions, (H*W, 3), forward component 1 in camera space."""
    uf, vf = _pixel_grid(width, height, fov_deg)
    c, s = math.cos(yaw), math.sin(yaw)
    dirs = np.empty((height * width, 3), dtype=np.float64)
    dirs[:, 0] = c * uf + s * 1.0
    dirs[:, 1] = vf
    dirs[:, 2] = -s * uf + c * 1.0
    return dirs


def _safe(d: np.ndarray) -> np.ndarray:
    return np.where(d == 0.0, _TINY, d)


def rays_boxes_t(origin: np.ndarray, dirs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Entry parameter t of each ray into each box, inf when missed. (R, N)."""
    if len(lo) == 0:
        return np.full((dirs.shape[0], 0), np.inf)
    inv = 1.0 / _safe(dirs)
    ix = inv[:, 0:1]
    iy = inv[:, 1:2]
    iz = inv[:, 2:3]
    t1x = (lo[None, :, 0] - origin[0]) * ix
    t2x = (hi[None, :, 0] - origin[0]) * ix
    t1y = (lo[None, :, 1] - origin[1]) * iy
    t2y = (hi[None, :, 1] - origin[1]) * iy
    t1z = (lo[None, :, 2] - origin[2]) * iz
    t2z = (hi[None, :, 2] - origin[2]) * iz
    tlo = np.maximum(
        np.maximum(np.minimum(t1x, t2x), np.minimum(t1y, t2y)), np.minimum(t1z, t2z)
    )
    thi = np.minimum(
        np.minimum(np.maximum(t1x, t2x), np.maximum(t1y, t2y)), np.maximum(t1z, t2z)
    )
    hit = (thi >= tlo) & (tlo > 0.0)
    return np.where(hit, tlo, np.inf)


def rays_sphere_t(origin: np.ndarray, dirs: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Near-root parameter t of each ray against a sphere, inf when missed. (R,)."""
    return rays_spheres_t(
        origin, dirs, center[None, :], np.array([radius], dtype=np.float64)
    )[:, 0]


def rays_spheres_t(origin: np.ndarray, dirs: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Near-root parameters against a batch of spheres. (R, S)."""
    ox = origin[0] - centers[:, 0]  # (S,)
    oy = origin[1] - centers[:, 1]
    oz = origin[2] - centers[:, 2]
    dx, dy, dz = dirs[:, 0:1], dirs[:, 1:2], dirs[:, 2:3]  # (R, 1)
    a = dx * dx + dy * dy + dz * dz
    b = dx * ox[None, :] + dy * oy[None, :] + dz * oz[None, :]
    c0 = (ox * ox + oy * oy + oz * oz - radii * radii)[None, :]
    disc = b * b - a * c0
    t = (-b - np.sqrt(np.maximum(disc, 0.0))) / a
    hit = (disc > 0.0) & (t > 0.0)
    return np.where(hit, t, np.inf)


def rays_obb_t(origin: np.ndarray, dirs: np.ndarray, center: np.ndarray, yaw: float, half: np.ndarray) -> np.ndarray:
    """Slab test in the box's local frame (yaw about +y). (R,)."""
    return rays_obbs_t(
        origin,
        dirs,
        center[None, :],
        np.array([yaw], dtype=np.float64),
        np.asarray(half, dtype=np.float64)[None, :],
    )[:, 0]


def rays_obbs_t(
    origin: np.ndarray,
    dirs: np.ndarray,
    centers: np.ndarray,
    yaws: np.ndarray,
    halves: np.ndarray,
) -> np.ndarray:
    """Slab tests against a batch of yaw-rotated boxes. (R, O)."""
    c = np.cos(yaws)[None, :]  # (1, O)
    s = np.sin(yaws)[None, :]
    ox = origin[0] - centers[:, 0]
    oy = origin[1] - centers[:, 1]
    oz = origin[2] - centers[:, 2]
    lox = (np.cos(yaws) * ox - np.sin(yaws) * oz)[None, :]
    loz = (np.sin(yaws) * ox + np.cos(yaws) * oz)[None, :]
    dx, dz = dirs[:, 0:1], dirs[:, 2:3]
    ix = 1.0 / _safe(c * dx - s * dz)
    iy = 1.0 / _safe(dirs[:, 1:2])
    iz = 1.0 / _safe(s * dx + c * dz)
    hx = halves[None, :, 0]
    hy = halves[None, :, 1]
    hz = halves[None, :, 2]
    t1x = (-hx - lox) * ix
    t2x = (hx - lox) * ix
    t1y = (-hy - oy[None, :]) * iy
    t2y = (hy - oy[None, :]) * iy
    t1z = (-hz - loz) * iz
    t2z = (hz - loz) * iz
    tlo = np.maximum(
        np.maximum(np.minimum(t1x, t2x), np.minimum(t1y, t2y)), np.minimum(t1z, t2z)
    )
    thi = np.minimum(
        np.minimum(np.maximum(t1x, t2x), np.maximum(t1y, t2y)), np.maximum(t1z, t2z)
    )
    hit = (thi >= tlo) & (tlo > 0.0)
    return np.where(hit, tlo, np.inf)


def rays_scene_t(
    scene: Scene,
    origin: np.ndarray,
    dirs: np.ndarray,
    exclude: frozenset[str] = frozenset(),
) -> np.ndarray:
    """Minimum hit parameter per ray over statics and objects. (R,)."""
    best = np.full(dirs.shape[0], np.inf)
    lo, hi = scene.statics_arrays()
    tb = rays_boxes_t(origin, dirs, lo, hi)
    if tb.shape[1]:
        best = np.minimum(best, tb.min(axis=1))
    spheres = [o for o in scene.objects if o.shape_kind == "sphere" and o.id not in exclude]
    boxes = [o for o in scene.objects if o.shape_kind == "box" and o.id not in exclude]
    if spheres:
        centers = np.stack([o.position for o in spheres])
        radii = np.array([float(o.shape_dims[0]) for o in spheres])
        best = np.minimum(best, rays_spheres_t(origin, dirs, centers, radii).min(axis=1))
    if boxes:
        centers = np.stack([o.position for o in boxes])
        yaws = np.array([o.yaw for o in boxes])
        halves = np.stack([o.shape_dims for o in boxes])
        best = np.minimum(best, rays_obbs_t(origin, dirs, centers, yaws, halves).min(axis=1))
    return best


@_njit(cache=True)
def _depth_kernel(dirs, ox, oy, oz, blo, bhi, sc, sr, oc, ocs, osn, oh, max_range):  # pragma: no cover - exercised via raycast_depth
    n = dirs.shape[0]
    out = np.empty(n, dtype=np.float64)
    tiny = 1e-300
    for i in range(n):
        dx = dirs[i, 0]
        dy = dirs[i, 1]
        dz = dirs[i, 2]
        ix = 1.0 / (dx if dx != 0.0 else tiny)
        iy = 1.0 / (dy if dy != 0.0 else tiny)
        iz = 1.0 / (dz if dz != 0.0 else tiny)
        best = np.inf
        for b in range(blo.shape[0]):
            t1x = (blo[b, 0] - ox) * ix
            t2x = (bhi[b, 0] - ox) * ix
            t1y = (blo[b, 1] - oy) * iy
            t2y = (bhi[b, 1] - oy) * iy
            t1z = (blo[b, 2] - oz) * iz
            t2z = (bhi[b, 2] - oz) * iz
            tlo = max(min(t1x, t2x), min(t1y, t2y), min(t1z, t2z))
            thi = min(max(t1x, t2x), max(t1y, t2y), max(t1z, t2z))
            if thi >= tlo and 0.0 < tlo < best:
                best = tlo
        for k in range(sc.shape[0]):
            sx = ox - sc[k, 0]
            sy = oy - sc[k, 1]
            sz = oz - sc[k, 2]
            a = dx * dx + dy * dy + dz * dz
            bq = dx * sx + dy * sy + dz * sz
            c0 = sx * sx + sy * sy + sz * sz - sr[k] * sr[k]
            disc = bq * bq - a * c0
            if disc > 0.0:
                t = (-bq - math.sqrt(max(disc, 0.0))) / a
                if 0.0 < t < best:
                    best = t
        for k in range(oc.shape[0]):
            c = ocs[k]
            s = osn[k]
            rx = ox - oc[k, 0]
            ry = oy - oc[k, 1]
            rz = oz - oc[k, 2]
            lox = c * rx - s * rz
            loz = s * rx + c * rz
            ldx = c * dx - s * dz
            ldz = s * dx + c * dz
            jx = 1.0 / (ldx if ldx != 0.0 else tiny)
            jy = iy
            jz = 1.0 / (ldz if ldz != 0.0 else tiny)
            t1x = (-oh[k, 0] - lox) * jx
            t2x = (oh[k, 0] - lox) * jx
            t1y = (-oh[k, 1] - ry) * jy
            t2y = (oh[k, 1] - ry) * jy
            t1z = (-oh[k, 2] - loz) * jz
            t2z = (oh[k, 2] - loz) * jz
            tlo = max(min(t1x, t2x), min(t1y, t2y), min(t1z, t2z))
            thi = min(max(t1x, t2x), max(t1y, t2y), max(t1z, t2z))
            if thi >= tlo and 0.0 < tlo < best:
                best = tlo
        out[i] = best if best < max_range else max_range
    return out


def _scene_prim_arrays(scene: Scene, exclude: frozenset[str] = frozenset()):
    lo, hi = scene.statics_arrays()
    spheres = [o for o in scene.objects if o.shape_kind == "sphere" and o.id not in exclude]
    boxes = [o for o in scene.objects if o.shape_kind == "box" and o.id not in exclude]
    sc = np.stack([o.position for o in spheres]) if spheres else np.zeros((0, 3))
    sr = np.array([float(o.shape_dims[0]) for o in spheres]) if spheres else np.zeros(0)
    oc = np.stack([o.position for o in boxes]) if boxes else np.zeros((0, 3))
    ocs = np.array([math.cos(o.yaw) for o in boxes]) if boxes else np.zeros(0)
    osn = np.array([math.sin(o.yaw) for o in boxes]) if boxes else np.zeros(0)
    oh = np.stack([o.shape_dims for o in boxes]) if boxes else np.zeros((0, 3))
    return lo, hi, sc, sr, oc, ocs, osn, oh


def raycast_depth(
    scene: Scene,
    camera: CameraPose,
    width: int,
    height: int,
    fov_deg: float = 90.0,
    max_range: float = 10.0,
) -> DepthFrame:
    """Planar depth of the nearest static/object per pixel, sentinel max_range."""
    if width < 1 or height < 1:
        raise ValueError("resolution must be at least 1x1")
    dirs = ray_directions(width, height, fov_deg, camera.yaw)
    origin = camera.position
    if _HAVE_NUMBA:
        lo, hi, sc, sr, oc, ocs, osn, oh = _scene_prim_arrays(scene)
        t = _depth_kernel(
            dirs,
            float(origin[0]),
            float(origin[1]),
            float(origin[2]),
            lo,
            hi,
            sc,
            sr,
            oc,
            ocs,
            osn,
            oh,
            max_range,
        )
        values = t.reshape(height, width)
    else:
        t = rays_scene_t(scene, origin, dirs)
        values = np.minimum(t, max_range).reshape(height, width)
    return DepthFrame(
        width=width,
        height=height,
        fov_deg=fov_deg,
        max_range=max_range,
        camera=camera,
        values=values,
    )


def line_of_sight(scene: Scene, origin, target, target_object_id: str) -> bool:
    """True if the segment origin->target reaches the target object before
    any other primitive.

    The ray is cast at the target object's center; visibility holds when
    the first scene hit is the target object itself (or nothing blocks it
    up to the center distance).
    """
    origin = as_vec3(origin)
    target = as_vec3(target)
    d = target - origin
    dist = float(math.sqrt(float(np.dot(d, d))))
    if dist < 1e-12:
        return True
    dirs = (d / dist)[None, :]
    obj = scene.object_by_id(target_object_id)
    if obj.shape_kind == "sphere":
        t_obj = rays_sphere_t(origin, dirs, target, float(obj.shape_dims[0]))[0]
    else:
        t_obj = rays_obb_t(origin, dirs, target, obj.yaw, obj.shape_dims)[0]
    if not np.isfinite(t_obj):
        t_obj = dist  # origin may be inside the shape; fall back to center distance
    t_world = rays_scene_t(scene, origin, dirs, exclude=frozenset({target_object_id}))[0]
    return bool(t_world >= t_obj - 1e-9)
