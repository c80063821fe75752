"""Collision queries, swept motion, and kinematic push resolution.

Geometry vocabulary
    statics      axis-aligned boxes (plus the room bounds as an outer shell)
    objects      spheres or yaw-rotated boxes; heavy ones never move
    agent        vertical capsule (radius ~0.2 m) standing on the floor
    arm          two capsules plus the grasper sphere; capsules are tested
                 as sphere chains sampled at CHAIN_PITCH along the segment

Motion model
    A motion is a sequence of shape configurations sampled so that no
    point moves more than SWEEP_PITCH between consecutive samples. At
    each sample the moving shapes are tested against statics (any contact
    blocks the whole motion) and against light objects. A contacted light
    object is displaced by the minimal horizontal translation, away from
    the mover, that resolves the contact; objects never move vertically
    during a push (they slide on their support and are settled downward
    afterwards by apply_pushes). If the required displacement would drive
    the object into a static, a heavy object, or out of the room, or if
    the contact cannot be resolved horizontally, the motion is blocked.

    Blocked motions are reported without side effects; the caller treats
    them as no-ops. Penetration at or below CONTACT_EPS counts as
    touching, so resting and boundary configurations are stable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import CONTACT_EPS, as_vec3, norm, vec3
from .kinematics import Capsule
from .scene import HEAVY, LIGHT, Disturbance, Scene, SceneObject, object_world_aabb

CHAIN_PITCH = 0.01
SWEEP_PITCH = 0.01
PUSH_CAP = 0.6  # pushes larger than this are treated as squeezes
_BISECT_TOL = 1e-12

CAUSE_AGENT = "agent_body"
CAUSE_ARM = "arm"
CAUSE_HELD = "held_object"


# ---------------------------------------------------------------------------
# moving primitives


@dataclass(frozen=True)
class MoverPoints:
    """Sphere chain: points sharing one radius (arm limbs, grasper, held sphere)."""

    pts: np.ndarray  # (P, 3)
    radius: float
    cause: str
    grace: bool = False  # allow pre-existing static penetration (held object)
    phase_through: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MoverVCapsule:
    """Vertical capsule occupying y in [y0 - radius, y1 + radius]."""

    x: float
    z: float
    y0: float
    y1: float
    radius: float
    cause: str
    grace: bool = False
    phase_through: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MoverOBB:
    """Yaw-rotated box (a held box object)."""

    center: np.ndarray
    yaw: float
    half: np.ndarray
    cause: str
    grace: bool = False
    phase_through: frozenset[str] = frozenset()


Mover = MoverPoints | MoverVCapsule | MoverOBB


@dataclass(frozen=True)
class Push:
    object_id: str
    displacement: np.ndarray
    cause: str


@dataclass(frozen=True)
class SweepResult:
    status: str  # "clear" | "blocked_by_static" | "pushes"
    reason: str | None = None  # "static" | "squeeze" when blocked
    pushes: tuple[Push, ...] = ()

    @property
    def is_clear(self) -> bool:
        return self.status == "clear"

    @property
    def is_blocked(self) -> bool:
        return self.status == "blocked_by_static"


CLEAR = SweepResult(status="clear")


_LERP_CACHE: dict[int, np.ndarray] = {}


def _lerp_ts(n: int) -> np.ndarray:
    t = _LERP_CACHE.get(n)
    if t is None:
        t = np.linspace(0.0, 1.0, n)[:, None]
        _LERP_CACHE[n] = t
    return t


def chain_points(a: np.ndarray, b: np.ndarray, pitch: float = CHAIN_PITCH) -> np.ndarray:
    """Points along [a, b] spaced at most pitch apart, endpoints included."""
    a, b = as_vec3(a), as_vec3(b)
    n = max(2, int(math.ceil(norm(b - a) / pitch)) + 1)
    t = _lerp_ts(n)
    return a[None, :] * (1.0 - t) + b[None, :] * t


def translate_mover(m: Mover, delta: np.ndarray) -> Mover:
    """Same shape rigidly translated."""
    if isinstance(m, MoverPoints):
        return MoverPoints(
            pts=m.pts + delta[None, :],
            radius=m.radius,
            cause=m.cause,
            grace=m.grace,
            phase_through=m.phase_through,
        )
    if isinstance(m, MoverVCapsule):
        return MoverVCapsule(
            x=m.x + float(delta[0]),
            z=m.z + float(delta[2]),
            y0=m.y0 + float(delta[1]),
            y1=m.y1 + float(delta[1]),
            radius=m.radius,
            cause=m.cause,
            grace=m.grace,
            phase_through=m.phase_through,
        )
    return MoverOBB(
        center=m.center + delta,
        yaw=m.yaw,
        half=m.half,
        cause=m.cause,
        grace=m.grace,
        phase_through=m.phase_through,
    )


def rotate_mover_about(m: Mover, center: np.ndarray, dyaw: float) -> Mover:
    """Rotate about the vertical axis through center (positive = rightward)."""
    c, s = math.cos(dyaw), math.sin(dyaw)

    def rot_pts(pts: np.ndarray) -> np.ndarray:
        q = pts - center[None, :]
        out = q.copy()
        out[:, 0] = c * q[:, 0] + s * q[:, 2]
        out[:, 2] = -s * q[:, 0] + c * q[:, 2]
        return out + center[None, :]

    if isinstance(m, MoverPoints):
        return MoverPoints(
            pts=rot_pts(m.pts),
            radius=m.radius,
            cause=m.cause,
            grace=m.grace,
            phase_through=m.phase_through,
        )
    if isinstance(m, MoverVCapsule):
        qx, qz = m.x - float(center[0]), m.z - float(center[2])
        return MoverVCapsule(
            x=float(center[0]) + c * qx + s * qz,
            z=float(center[2]) - s * qx + c * qz,
            y0=m.y0,
            y1=m.y1,
            radius=m.radius,
            cause=m.cause,
            grace=m.grace,
            phase_through=m.phase_through,
        )
    return MoverOBB(
        center=rot_pts(m.center[None, :])[0],
        yaw=m.yaw + dyaw,
        half=m.half,
        cause=m.cause,
        grace=m.grace,
        phase_through=m.phase_through,
    )


def translated_plan(movers: list[Mover], deltas: np.ndarray) -> list[list[Mover]]:
    """Plan configurations translating the mover set by each delta row."""
    point_idx = [i for i, m in enumerate(movers) if isinstance(m, MoverPoints)]
    stacks = {
        i: movers[i].pts[None, :, :] + deltas[:, None, :] for i in point_idx
    }
    plan = []
    for k in range(deltas.shape[0]):
        cfg: list[Mover] = []
        for i, m in enumerate(movers):
            if isinstance(m, MoverPoints):
                cfg.append(
                    MoverPoints(
                        pts=stacks[i][k],
                        radius=m.radius,
                        cause=m.cause,
                        grace=m.grace,
                        phase_through=m.phase_through,
                    )
                )
            else:
                cfg.append(translate_mover(m, deltas[k]))
        plan.append(cfg)
    return plan


def rotated_plan(movers: list[Mover], center: np.ndarray, angles: np.ndarray) -> list[list[Mover]]:
    """Plan configurations rotating the mover set about the vertical axis
    through center by each angle."""
    cs = np.cos(angles)
    sn = np.sin(angles)
    point_idx = [i for i, m in enumerate(movers) if isinstance(m, MoverPoints)]
    stacks = {}
    for i in point_idx:
        q = movers[i].pts - center[None, :]  # (P, 3)
        x = cs[:, None] * q[None, :, 0] + sn[:, None] * q[None, :, 2]  # (S, P)
        z = -sn[:, None] * q[None, :, 0] + cs[:, None] * q[None, :, 2]
        out = np.empty((angles.shape[0], q.shape[0], 3))
        out[:, :, 0] = x + center[0]
        out[:, :, 1] = q[None, :, 1] + center[1]
        out[:, :, 2] = z + center[2]
        stacks[i] = out
    plan = []
    for k in range(angles.shape[0]):
        cfg: list[Mover] = []
        for i, m in enumerate(movers):
            if isinstance(m, MoverPoints):
                cfg.append(
                    MoverPoints(
                        pts=stacks[i][k],
                        radius=m.radius,
                        cause=m.cause,
                        grace=m.grace,
                        phase_through=m.phase_through,
                    )
                )
            else:
                cfg.append(rotate_mover_about(m, center, float(angles[k])))
        plan.append(cfg)
    return plan


def capsules_to_movers(
    capsules: list[Capsule],
    cause: str = CAUSE_ARM,
    phase_through: frozenset[str] = frozenset(),
    grace: bool = False,
) -> list[MoverPoints]:
    """One sphere-chain mover per capsule (zero-length capsules become spheres)."""
    movers = []
    for c in capsules:
        if norm(c.b - c.a) < 1e-15:
            pts = np.asarray([as_vec3(c.a)])
        else:
            pts = chain_points(c.a, c.b)
        movers.append(
            MoverPoints(pts=pts, radius=c.radius, cause=cause, grace=grace, phase_through=phase_through)
        )
    return movers


# ---------------------------------------------------------------------------
# penetration primitives


def _points_boxes_max_pen(pts: np.ndarray, r: float, lo: np.ndarray, hi: np.ndarray) -> float:
    """Deepest penetration of spheres (pts, r) into any of the boxes."""
    if len(lo) == 0 or len(pts) == 0:
        return -math.inf
    p = pts[:, None, :]  # (P, 1, 3)
    g = np.maximum(np.maximum(lo[None, :, :] - p, p - hi[None, :, :]), 0.0)
    d = np.sqrt(np.sum(g * g, axis=2))  # (P, N)
    pen = r - d
    inside = d == 0.0
    if np.any(inside):
        inner = np.minimum(p - lo[None, :, :], hi[None, :, :] - p).min(axis=2)
        pen = np.where(inside, r + inner, pen)
    return float(pen.max())


def _points_bounds_pen(pts: np.ndarray, r: float, room_lo: np.ndarray, room_hi: np.ndarray) -> float:
    low = (room_lo[None, :] + r) - pts
    high = pts - (room_hi[None, :] - r)
    return float(np.maximum(low, high).max())


def _rect_dist_xz(x, z, lo, hi):
    """Distance from xz point(s) to the xz rectangles of boxes (lo, hi)."""
    gx = np.maximum(np.maximum(lo[:, 0] - x, x - hi[:, 0]), 0.0)
    gz = np.maximum(np.maximum(lo[:, 2] - z, z - hi[:, 2]), 0.0)
    return np.sqrt(gx * gx + gz * gz), gx + gz == 0.0


def _vcapsule_boxes_max_pen(m: MoverVCapsule, lo: np.ndarray, hi: np.ndarray) -> float:
    if len(lo) == 0:
        return -math.inf
    dy = np.maximum(np.maximum(lo[:, 1] - m.y1, m.y0 - hi[:, 1]), 0.0)
    dxz, in_rect = _rect_dist_xz(m.x, m.z, lo, hi)
    d = np.sqrt(dxz * dxz + dy * dy)
    pen = m.radius - d
    inside = (d == 0.0) & in_rect
    if np.any(inside):
        inner_x = np.minimum(m.x - lo[:, 0], hi[:, 0] - m.x)
        inner_z = np.minimum(m.z - lo[:, 2], hi[:, 2] - m.z)
        inner_y = np.minimum(m.y1, hi[:, 1]) - np.maximum(m.y0, lo[:, 1])
        inner = np.minimum(np.minimum(inner_x, inner_z), inner_y)
        pen = np.where(inside, m.radius + inner, pen)
    return float(pen.max())


def _vcapsule_bounds_pen(m: MoverVCapsule, room_lo: np.ndarray, room_hi: np.ndarray) -> float:
    vals = (
        room_lo[0] + m.radius - m.x,
        m.x - (room_hi[0] - m.radius),
        room_lo[2] + m.radius - m.z,
        m.z - (room_hi[2] - m.radius),
        room_lo[1] - (m.y0 - m.radius),
        (m.y1 + m.radius) - room_hi[1],
    )
    return float(max(vals))


def _axes_2d(yaw: float) -> tuple[np.ndarray, np.ndarray]:
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([c, -s]), np.array([s, c])  # local +x and +z in the xz plane


def _sat_overlap_xz(c1, half1, yaw1, c2, half2, yaw2) -> float:
    """Minimal axis overlap of two rotated xz rectangles (<= 0 means separated).

    c: (x, z) centers; half: (hx, hz).
    """
    u1, w1 = _axes_2d(yaw1)
    u2, w2 = _axes_2d(yaw2)
    d = np.array([c2[0] - c1[0], c2[1] - c1[1]])
    best = math.inf
    for a in (u1, w1, u2, w2):
        r1 = half1[0] * abs(float(np.dot(u1, a))) + half1[1] * abs(float(np.dot(w1, a)))
        r2 = half2[0] * abs(float(np.dot(u2, a))) + half2[1] * abs(float(np.dot(w2, a)))
        overlap = r1 + r2 - abs(float(np.dot(d, a)))
        if overlap < best:
            best = overlap
        if best <= 0.0:
            return best
    return best


def _obb_aabbs_max_pen(m_center, m_yaw, m_half, lo: np.ndarray, hi: np.ndarray) -> float:
    best = -math.inf
    for i in range(len(lo)):
        oy = min(hi[i, 1], m_center[1] + m_half[1]) - max(lo[i, 1], m_center[1] - m_half[1])
        if oy <= 0.0:
            continue
        bc = ((lo[i, 0] + hi[i, 0]) / 2.0, (lo[i, 2] + hi[i, 2]) / 2.0)
        bh = ((hi[i, 0] - lo[i, 0]) / 2.0, (hi[i, 2] - lo[i, 2]) / 2.0)
        m = _sat_overlap_xz(
            (m_center[0], m_center[2]), (m_half[0], m_half[2]), m_yaw, bc, bh, 0.0
        )
        if m > 0.0:
            best = max(best, min(oy, m))
    return best


def _obb_bounds_pen(center, yaw, half, room_lo, room_hi) -> float:
    c, s = abs(math.cos(yaw)), abs(math.sin(yaw))
    ext = vec3(c * half[0] + s * half[2], half[1], s * half[0] + c * half[2])
    lo = center - ext
    hi = center + ext
    return float(max(np.maximum(room_lo - lo, hi - room_hi)))


def mover_static_pen(m: Mover, scene: Scene, heavy: list[SceneObject]) -> float:
    """Deepest penetration of a mover into statics, heavy objects, or the walls
    implied by the room bounds."""
    lo, hi = scene.statics_arrays()
    if isinstance(m, MoverPoints):
        pen = _points_boxes_max_pen(m.pts, m.radius, lo, hi)
        pen = max(pen, _points_bounds_pen(m.pts, m.radius, scene.room_lo, scene.room_hi))
    elif isinstance(m, MoverVCapsule):
        pen = _vcapsule_boxes_max_pen(m, lo, hi)
        pen = max(pen, _vcapsule_bounds_pen(m, scene.room_lo, scene.room_hi))
    else:
        pen = _obb_aabbs_max_pen(m.center, m.yaw, m.half, lo, hi)
        pen = max(pen, _obb_bounds_pen(m.center, m.yaw, m.half, scene.room_lo, scene.room_hi))
    for h in heavy:
        p, _ = mover_object_pen(m, h, h.position)
        pen = max(pen, p)
    return pen


# ---------------------------------------------------------------------------
# mover vs object


def _to_local_xz(pts: np.ndarray, center: np.ndarray, yaw: float) -> np.ndarray:
    """World points into the frame of a yaw-rotated box at center."""
    c, s = math.cos(yaw), math.sin(yaw)
    q = pts - center[None, :]
    out = q.copy()
    out[:, 0] = c * q[:, 0] - s * q[:, 2]
    out[:, 2] = s * q[:, 0] + c * q[:, 2]
    return out


def _points_box_local_pen(local: np.ndarray, r: float, half: np.ndarray) -> np.ndarray:
    g = np.maximum(np.abs(local) - half[None, :], 0.0)
    d = np.sqrt(np.sum(g * g, axis=1))
    pen = r - d
    inside = d == 0.0
    if np.any(inside):
        inner = (half[None, :] - np.abs(local)).min(axis=1)
        pen = np.where(inside, r + inner, pen)
    return pen


def mover_object_pen(m: Mover, obj: SceneObject, pos: np.ndarray) -> tuple[float, np.ndarray]:
    """(deepest penetration, mover reference point for the push direction)."""
    if isinstance(m, MoverPoints):
        if obj.shape_kind == "sphere":
            diff = m.pts - pos[None, :]
            d = np.sqrt(np.sum(diff * diff, axis=1))
            pen = (m.radius + float(obj.shape_dims[0])) - d
        else:
            local = _to_local_xz(m.pts, pos, obj.yaw)
            pen = _points_box_local_pen(local, m.radius, obj.shape_dims)
        i = int(np.argmax(pen))
        return float(pen[i]), m.pts[i]
    if isinstance(m, MoverVCapsule):
        ref = vec3(m.x, (m.y0 + m.y1) / 2.0, m.z)
        if obj.shape_kind == "sphere":
            dy = max(pos[1] - m.y1, m.y0 - pos[1], 0.0)
            dxz = math.hypot(pos[0] - m.x, pos[2] - m.z)
            pen = (m.radius + float(obj.shape_dims[0])) - math.hypot(dxz, dy)
            return pen, ref
        local = _to_local_xz(np.array([[m.x, 0.0, m.z]]), pos, obj.yaw)[0]
        hx, hy, hz = (float(v) for v in obj.shape_dims)
        y0l, y1l = m.y0 - pos[1], m.y1 - pos[1]
        dy = max(-hy - y1l, y0l - hy, 0.0)
        gx = max(abs(local[0]) - hx, 0.0)
        gz = max(abs(local[2]) - hz, 0.0)
        dxz = math.hypot(gx, gz)
        d = math.hypot(dxz, dy)
        if d == 0.0:
            inner = min(hx - abs(local[0]), hz - abs(local[2]), min(y1l, hy) - max(y0l, -hy))
            return m.radius + inner, ref
        return m.radius - d, ref
    # MoverOBB
    if obj.shape_kind == "sphere":
        local = _to_local_xz(pos[None, :], m.center, m.yaw)
        pen = _points_box_local_pen(local, float(obj.shape_dims[0]), m.half)
        return float(pen[0]), m.center
    oy = min(m.center[1] + m.half[1], pos[1] + obj.shape_dims[1]) - max(
        m.center[1] - m.half[1], pos[1] - obj.shape_dims[1]
    )
    if oy <= 0.0:
        return -math.inf, m.center
    ov = _sat_overlap_xz(
        (m.center[0], m.center[2]),
        (m.half[0], m.half[2]),
        m.yaw,
        (pos[0], pos[2]),
        (obj.shape_dims[0], obj.shape_dims[2]),
        obj.yaw,
    )
    if ov <= 0.0:
        return ov, m.center
    return min(float(oy), ov), m.center


# ---------------------------------------------------------------------------
# object vs world (for push clamping and settling)


def object_statics_pen(obj: SceneObject, pos: np.ndarray, scene: Scene, heavy: list[SceneObject]) -> float:
    lo, hi = scene.statics_arrays()
    if obj.shape_kind == "sphere":
        r = float(obj.shape_dims[0])
        pen = _points_boxes_max_pen(pos[None, :], r, lo, hi)
        pen = max(pen, _points_bounds_pen(pos[None, :], r, scene.room_lo, scene.room_hi))
    else:
        pen = _obb_aabbs_max_pen(pos, obj.yaw, obj.shape_dims, lo, hi)
        pen = max(pen, _obb_bounds_pen(pos, obj.yaw, obj.shape_dims, scene.room_lo, scene.room_hi))
    for h in heavy:
        if h.id == obj.id:
            continue
        pen = max(pen, object_object_pen(obj, pos, h, h.position))
    return pen


def object_object_pen(a: SceneObject, pa: np.ndarray, b: SceneObject, pb: np.ndarray) -> float:
    if a.shape_kind == "sphere" and b.shape_kind == "sphere":
        d = norm(pa - pb)
        return float(a.shape_dims[0] + b.shape_dims[0]) - d
    if a.shape_kind == "sphere":
        a, pa, b, pb = b, pb, a, pa
    if b.shape_kind == "sphere":
        local = _to_local_xz(pb[None, :], pa, a.yaw)
        return float(_points_box_local_pen(local, float(b.shape_dims[0]), a.shape_dims)[0])
    oy = min(pa[1] + a.shape_dims[1], pb[1] + b.shape_dims[1]) - max(
        pa[1] - a.shape_dims[1], pb[1] - b.shape_dims[1]
    )
    if oy <= 0.0:
        return float(oy)
    ov = _sat_overlap_xz(
        (pa[0], pa[2]),
        (a.shape_dims[0], a.shape_dims[2]),
        a.yaw,
        (pb[0], pb[2]),
        (b.shape_dims[0], b.shape_dims[2]),
        b.yaw,
    )
    return min(float(oy), ov) if ov > 0.0 else ov


def _horizontal_overlap(a: SceneObject, pa: np.ndarray, b: SceneObject, pb: np.ndarray) -> bool:
    """True if the xz projections of the two shapes overlap."""
    if a.shape_kind == "sphere" and b.shape_kind == "sphere":
        return math.hypot(pa[0] - pb[0], pa[2] - pb[2]) < float(a.shape_dims[0] + b.shape_dims[0])
    if a.shape_kind == "sphere":
        a, pa, b, pb = b, pb, a, pa
    if b.shape_kind == "sphere":
        local = _to_local_xz(pb[None, :], pa, a.yaw)[0]
        gx = max(abs(local[0]) - float(a.shape_dims[0]), 0.0)
        gz = max(abs(local[2]) - float(a.shape_dims[2]), 0.0)
        return math.hypot(gx, gz) < float(b.shape_dims[0])
    return (
        _sat_overlap_xz(
            (pa[0], pa[2]),
            (a.shape_dims[0], a.shape_dims[2]),
            a.yaw,
            (pb[0], pb[2]),
            (b.shape_dims[0], b.shape_dims[2]),
            b.yaw,
        )
        > 0.0
    )


def settle_position(scene: Scene, obj: SceneObject, pos: np.ndarray, exclude: frozenset[str] = frozenset()) -> np.ndarray:
    """Drop an object straight down onto its highest support at or below it.

    Supports are the floor, static tops whose footprint overlaps the
    object's, and the tops of other objects. The object is never lifted.
    """
    hh = obj.half_height
    bottom = float(pos[1]) - hh
    rest = scene.floor_y
    lo_a, hi_a = object_world_aabb(obj, pos)
    for s in scene.statics:
        top = float(s.hi[1])
        if top > bottom + 1e-9:
            continue
        if hi_a[0] > s.lo[0] and lo_a[0] < s.hi[0] and hi_a[2] > s.lo[2] and lo_a[2] < s.hi[2]:
            rest = max(rest, top)
    for other in scene.objects:
        if other.id == obj.id or other.id in exclude:
            continue
        top = float(other.position[1]) + other.half_height
        if top > bottom + 1e-9:
            continue
        if _horizontal_overlap(obj, pos, other, other.position):
            rest = max(rest, top)
    new_y = min(rest + hh, float(pos[1]))
    if abs(new_y - float(pos[1])) < 1e-12:
        new_y = float(pos[1])
    return vec3(float(pos[0]), new_y, float(pos[2]))


# ---------------------------------------------------------------------------
# motion resolution


def _sample_count(dist: float, pitch: float = SWEEP_PITCH) -> int:
    return max(1, int(math.ceil(dist / pitch - 1e-12)))


def _push_direction(pen_point: np.ndarray, obj_pos: np.ndarray) -> np.ndarray | None:
    dx = float(obj_pos[0] - pen_point[0])
    dz = float(obj_pos[2] - pen_point[2])
    n = math.hypot(dx, dz)
    if n < 1e-9:
        return None
    return vec3(dx / n, 0.0, dz / n)


def _contact_any(movers: list[Mover], obj: SceneObject, pos: np.ndarray) -> bool:
    for m in movers:
        if obj.id in m.phase_through:
            continue
        pen, _ = mover_object_pen(m, obj, pos)
        if pen > CONTACT_EPS:
            return True
    return False


def _min_push_distance(movers: list[Mover], obj: SceneObject, pos: np.ndarray, direction: np.ndarray) -> float | None:
    """Smallest translation along direction that clears all movers, or None."""
    lo, hi = 0.0, 0.02
    while _contact_any(movers, obj, pos + hi * direction):
        lo = hi
        hi *= 2.0
        if hi > PUSH_CAP:
            return None
    while hi - lo > _BISECT_TOL:
        mid = (lo + hi) / 2.0
        if _contact_any(movers, obj, pos + mid * direction):
            lo = mid
        else:
            hi = mid
    return hi


def _slide_blocked(
    scene: Scene,
    obj: SceneObject,
    pos: np.ndarray,
    direction: np.ndarray,
    dist: float,
    heavy: list[SceneObject],
) -> bool:
    """True if sliding dist along direction meets a static/heavy/bounds contact."""
    n = _sample_count(dist)
    for k in range(1, n + 1):
        t = dist * k / n
        if object_statics_pen(obj, pos + t * direction, scene, heavy) > CONTACT_EPS:
            return True
    return False


def _select_boxes(lo: np.ndarray, hi: np.ndarray, qlo: np.ndarray, qhi: np.ndarray):
    """Boxes whose AABB overlaps the query AABB (conservative pruning)."""
    if len(lo) == 0:
        return lo, hi
    mask = np.all(hi >= qlo[None, :], axis=1) & np.all(lo <= qhi[None, :], axis=1)
    return lo[mask], hi[mask]


def _points_object_max_pen(pts: np.ndarray, r: float, obj: SceneObject, pos: np.ndarray) -> float:
    if obj.shape_kind == "sphere":
        diff = pts - pos[None, :]
        d = np.sqrt(np.sum(diff * diff, axis=1))
        return float(((r + float(obj.shape_dims[0])) - d).max())
    local = _to_local_xz(pts, pos, obj.yaw)
    return float(_points_box_local_pen(local, r, obj.shape_dims).max())


class _PlanBatch:
    """Stacked view of plan[1:] movers, grouped for vectorized tests."""

    def __init__(self, plan: list[list[Mover]]):
        groups: dict[tuple[float, frozenset[str]], list[np.ndarray]] = {}
        self.vcaps: list[MoverVCapsule] = []
        self.obbs: list[MoverOBB] = []
        self.grace_present = any(m.grace for m in plan[0])
        for cfg in plan[1:]:
            for m in cfg:
                if m.grace:
                    continue
                if isinstance(m, MoverPoints):
                    groups.setdefault((m.radius, m.phase_through), []).append(m.pts)
                elif isinstance(m, MoverVCapsule):
                    self.vcaps.append(m)
                else:
                    self.obbs.append(m)
        self.point_groups: list[tuple[float, frozenset[str], np.ndarray]] = [
            (r, phase, np.concatenate(chunks))
            for (r, phase), chunks in sorted(groups.items(), key=lambda kv: (kv[0][0], sorted(kv[0][1])))
        ]
        self.group_bounds = [
            (pts.min(axis=0), pts.max(axis=0)) for _r, _p, pts in self.point_groups
        ]
        self.vcap_uniform = bool(self.vcaps) and all(
            m.y0 == self.vcaps[0].y0
            and m.y1 == self.vcaps[0].y1
            and m.radius == self.vcaps[0].radius
            for m in self.vcaps
        )
        if self.vcap_uniform:
            self.vcap_xs = np.array([m.x for m in self.vcaps])
            self.vcap_zs = np.array([m.z for m in self.vcaps])


def _vcaps_contact_object(batch: "_PlanBatch", obj: SceneObject, pos: np.ndarray) -> bool:
    """Vectorized contact of the uniform vcapsule set against one object."""
    m0 = batch.vcaps[0]
    xs, zs = batch.vcap_xs, batch.vcap_zs
    if obj.shape_kind == "sphere":
        dy = max(pos[1] - m0.y1, m0.y0 - pos[1], 0.0)
        dxz2 = (pos[0] - xs) ** 2 + (pos[2] - zs) ** 2
        pen = (m0.radius + float(obj.shape_dims[0])) - np.sqrt(dxz2 + dy * dy)
        return bool(pen.max() > CONTACT_EPS)
    c, s = math.cos(obj.yaw), math.sin(obj.yaw)
    qx = xs - pos[0]
    qz = zs - pos[2]
    lx = c * qx - s * qz
    lz = s * qx + c * qz
    hx, hy, hz = (float(v) for v in obj.shape_dims)
    y0l, y1l = m0.y0 - pos[1], m0.y1 - pos[1]
    dy = max(-hy - y1l, y0l - hy, 0.0)
    gx = np.maximum(np.abs(lx) - hx, 0.0)
    gz = np.maximum(np.abs(lz) - hz, 0.0)
    pen = m0.radius - np.sqrt(gx * gx + gz * gz + dy * dy)
    return bool(pen.max() > CONTACT_EPS)


def _plan_static_blocked(
    scene: Scene, plan: list[list[Mover]], heavy: list[SceneObject], batch: _PlanBatch
) -> bool:
    """Batched contact test of all non-grace movers in plan[1:] against
    statics, bounds, and heavy objects. Grace movers (held object) are
    checked per sample against their plan[0] penetration baseline.

    Object pushes never change statics, so whether any sample touches a
    static is independent of push resolution and can be decided up front.
    """
    lo, hi = scene.statics_arrays()
    if batch.grace_present:
        baseline: dict[int, float] = {}
        for i, m in enumerate(plan[0]):
            if m.grace:
                baseline[i] = max(0.0, mover_static_pen(m, scene, heavy))
        for cfg in plan[1:]:
            for i, m in enumerate(cfg):
                if m.grace and mover_static_pen(m, scene, heavy) > baseline.get(i, 0.0) + CONTACT_EPS:
                    return True

    for (r, _phase, pts), (g_lo, g_hi) in zip(batch.point_groups, batch.group_bounds):
        margin = r + 1e-9
        if float(np.max(np.maximum(scene.room_lo - (g_lo - margin), (g_hi + margin) - scene.room_hi))) > 0.0:
            if _points_bounds_pen(pts, r, scene.room_lo, scene.room_hi) > CONTACT_EPS:
                return True
        slo, shi = _select_boxes(lo, hi, g_lo - margin, g_hi + margin)
        if len(slo) and _points_boxes_max_pen(pts, r, slo, shi) > CONTACT_EPS:
            return True
        for h in heavy:
            h_lo, h_hi = object_world_aabb(h)
            if np.any(g_hi + margin < h_lo) or np.any(g_lo - margin > h_hi):
                continue
            if _points_object_max_pen(pts, r, h, h.position) > CONTACT_EPS:
                return True
    for m in batch.obbs:
        if mover_static_pen(m, scene, heavy) > CONTACT_EPS:
            return True
    vcaps = batch.vcaps
    if vcaps:
        m0 = vcaps[0]
        if batch.vcap_uniform and len(lo):
            xs, zs = batch.vcap_xs, batch.vcap_zs
            dy = np.maximum(np.maximum(lo[None, :, 1] - m0.y1, m0.y0 - hi[None, :, 1]), 0.0)
            gx = np.maximum(np.maximum(lo[None, :, 0] - xs[:, None], xs[:, None] - hi[None, :, 0]), 0.0)
            gz = np.maximum(np.maximum(lo[None, :, 2] - zs[:, None], zs[:, None] - hi[None, :, 2]), 0.0)
            d = np.sqrt(gx * gx + gz * gz + dy * dy)
            if float((m0.radius - d).max()) > CONTACT_EPS:
                return True
        elif len(lo):
            for m in vcaps:
                if _vcapsule_boxes_max_pen(m, lo, hi) > CONTACT_EPS:
                    return True
        if batch.vcap_uniform:
            room_lo, room_hi = scene.room_lo, scene.room_hi
            worst = max(
                float((room_lo[0] + m0.radius) - batch.vcap_xs.min()),
                float(batch.vcap_xs.max() - (room_hi[0] - m0.radius)),
                float((room_lo[2] + m0.radius) - batch.vcap_zs.min()),
                float(batch.vcap_zs.max() - (room_hi[2] - m0.radius)),
                float(room_lo[1] - (m0.y0 - m0.radius)),
                float((m0.y1 + m0.radius) - room_hi[1]),
            )
            if worst > CONTACT_EPS:
                return True
        else:
            for m in vcaps:
                if _vcapsule_bounds_pen(m, scene.room_lo, scene.room_hi) > CONTACT_EPS:
                    return True
        for h in heavy:
            if batch.vcap_uniform:
                if _vcaps_contact_object(batch, h, h.position):
                    return True
            else:
                for m in vcaps:
                    pen, _ = mover_object_pen(m, h, h.position)
                    if pen > CONTACT_EPS:
                        return True
    return False


def _plan_contacts_object(
    plan: list[list[Mover]], obj: SceneObject, pos: np.ndarray, batch: _PlanBatch
) -> bool:
    """True if any mover in plan[1:] contacts the object at a fixed position."""
    lo_o, hi_o = object_world_aabb(obj, pos)
    for (r, phase, pts), (g_lo, g_hi) in zip(batch.point_groups, batch.group_bounds):
        if obj.id in phase:
            continue
        if np.any(g_hi + r < lo_o) or np.any(g_lo - r > hi_o):
            continue
        if _points_object_max_pen(pts, r, obj, pos) > CONTACT_EPS:
            return True
    if batch.vcaps:
        if batch.vcap_uniform and obj.id not in batch.vcaps[0].phase_through:
            if _vcaps_contact_object(batch, obj, pos):
                return True
        elif not batch.vcap_uniform:
            for m in batch.vcaps:
                if obj.id in m.phase_through:
                    continue
                pen, _ = mover_object_pen(m, obj, pos)
                if pen > CONTACT_EPS:
                    return True
    for m in batch.obbs:
        if obj.id in m.phase_through:
            continue
        pen, _ = mover_object_pen(m, obj, pos)
        if pen > CONTACT_EPS:
            return True
    if batch.grace_present:
        # grace movers (the held object) still push light objects
        for cfg in plan[1:]:
            for m in cfg:
                if not m.grace or obj.id in m.phase_through:
                    continue
                pen, _ = mover_object_pen(m, obj, pos)
                if pen > CONTACT_EPS:
                    return True
    return False


def resolve_motion(scene: Scene, plan: list[list[Mover]], held_id: str | None = None) -> SweepResult:
    """Run a sampled motion against the scene. Does not mutate the scene.

    plan[0] is the current (assumed valid) configuration; contacts are
    evaluated at plan[1:]. Any static/heavy/bounds contact blocks the
    whole motion. Light objects accumulate push displacements across
    samples; the first contacting mover's cause tag is kept. The blocked
    reason field is advisory (a static hit may be reported before a
    squeeze that an in-order walk would meet first).
    """
    if len(plan) < 2:
        return CLEAR
    light = sorted(
        (o for o in scene.objects if o.mass_class == LIGHT and o.id != held_id),
        key=lambda o: o.id,
    )
    heavy = [o for o in scene.objects if o.mass_class == HEAVY and o.id != held_id]

    batch = _PlanBatch(plan)
    if _plan_static_blocked(scene, plan, heavy, batch):
        return SweepResult(status="blocked_by_static", reason="static")

    contacted = [o for o in light if _plan_contacts_object(plan, o, o.position, batch)]
    if not contacted:
        return CLEAR

    pos = {o.id: o.position.copy() for o in contacted}
    moved: dict[str, np.ndarray] = {}
    causes: dict[str, str] = {}
    for cfg in plan[1:]:
        for obj in contacted:
            for _attempt in range(8):
                deepest = -math.inf
                deep_pt = None
                deep_cause = None
                for m in cfg:
                    if obj.id in m.phase_through:
                        continue
                    pen, ref = mover_object_pen(m, obj, pos[obj.id])
                    if pen > deepest:
                        deepest, deep_pt, deep_cause = pen, ref, m.cause
                if deepest <= CONTACT_EPS:
                    break
                direction = _push_direction(deep_pt, pos[obj.id])
                if direction is None:
                    return SweepResult(status="blocked_by_static", reason="squeeze")
                d = _min_push_distance(cfg, obj, pos[obj.id], direction)
                if d is None:
                    return SweepResult(status="blocked_by_static", reason="squeeze")
                if _slide_blocked(scene, obj, pos[obj.id], direction, d, heavy):
                    return SweepResult(status="blocked_by_static", reason="squeeze")
                pos[obj.id] = pos[obj.id] + d * direction
                moved[obj.id] = pos[obj.id] - obj.position
                causes.setdefault(obj.id, deep_cause)
            else:
                return SweepResult(status="blocked_by_static", reason="squeeze")

    if not moved:
        return CLEAR
    pushes = tuple(
        Push(object_id=oid, displacement=moved[oid], cause=causes[oid]) for oid in sorted(moved)
    )
    return SweepResult(status="pushes", pushes=pushes)


# ---------------------------------------------------------------------------
# public sweeps


def _lerp(a: np.ndarray, b: np.ndarray, t: float) -> np.ndarray:
    return a * (1.0 - t) + b * t


def sweep_agent(
    scene: Scene,
    footprint_radius: float,
    frm,
    to,
    agent_height: float = 1.8,
    held_id: str | None = None,
) -> SweepResult:
    """Sweep the agent's vertical capsule from one floor position to another."""
    frm, to = as_vec3(frm), as_vec3(to)
    dist = norm(to - frm)
    if dist < 1e-15:
        return CLEAR
    n = _sample_count(dist)
    plan = []
    for k in range(n + 1):
        p = _lerp(frm, to, k / n)
        plan.append(
            [
                MoverVCapsule(
                    x=float(p[0]),
                    z=float(p[2]),
                    y0=float(p[1]) + footprint_radius,
                    y1=float(p[1]) + agent_height - footprint_radius,
                    radius=footprint_radius,
                    cause=CAUSE_AGENT,
                )
            ]
        )
    return resolve_motion(scene, plan, held_id=held_id)


def sweep_arm(
    scene: Scene,
    capsules_from: list[Capsule],
    capsules_to: list[Capsule],
    phase_through: frozenset[str] = frozenset(),
    held_id: str | None = None,
) -> SweepResult:
    """Sweep arm capsules along linearly interpolated endpoints.

    capsules_from and capsules_to must pair up one-to-one. The grasper
    sphere travels as a zero-length capsule; pass phase_through to let it
    overlap the pickup target without pushing it.
    """
    if len(capsules_from) != len(capsules_to):
        raise ValueError("capsule lists must have equal length")
    dist = 0.0
    for ca, cb in zip(capsules_from, capsules_to):
        dist = max(dist, norm(cb.a - ca.a), norm(cb.b - ca.b))
    if dist < 1e-15:
        return CLEAR
    n = _sample_count(dist)
    plan = []
    for k in range(n + 1):
        t = k / n
        caps = [
            Capsule(a=_lerp(ca.a, cb.a, t), b=_lerp(ca.b, cb.b, t), radius=ca.radius)
            for ca, cb in zip(capsules_from, capsules_to)
        ]
        plan.append(capsules_to_movers(caps, cause=CAUSE_ARM, phase_through=phase_through))
    return resolve_motion(scene, plan, held_id=held_id)


def apply_pushes(
    scene: Scene,
    pushes: list[Push] | tuple[Push, ...],
    step_index: int = 0,
) -> list[Disturbance]:
    """Translate pushed objects, clamp against statics, settle, and record.

    Each object slides along its displacement direction and stops at the
    first static/heavy/bounds contact (sampled at SWEEP_PITCH, then
    bisected), then settles straight down onto its support. One
    Disturbance is recorded per object that actually moved.
    """
    heavy = [o for o in scene.objects if o.mass_class == HEAVY]
    out: list[Disturbance] = []
    for push in pushes:
        obj = scene.object_by_id(push.object_id)
        disp = as_vec3(push.displacement)
        dist = norm(disp)
        start = obj.position.copy()
        if dist > 0.0:
            direction = disp / dist
            free = dist
            n = _sample_count(dist)
            prev_t = 0.0
            for k in range(1, n + 1):
                t = dist * k / n
                if object_statics_pen(obj, start + t * direction, scene, heavy) > CONTACT_EPS:
                    lo, hi = prev_t, t
                    while hi - lo > _BISECT_TOL:
                        mid = (lo + hi) / 2.0
                        if object_statics_pen(obj, start + mid * direction, scene, heavy) > CONTACT_EPS:
                            hi = mid
                        else:
                            lo = mid
                    free = lo
                    break
                prev_t = t
            target = start + free * direction
        else:
            target = start
        target = settle_position(scene, obj, target)
        delta = target - start
        if norm(delta) > 0.0:
            obj.position = target
            out.append(
                Disturbance(
                    object_id=obj.id,
                    step_index=step_index,
                    displacement=delta,
                    cause=push.cause,
                )
            )
    return out


# ---------------------------------------------------------------------------
# standalone queries


def agent_clear_of_statics(scene: Scene, pos, radius: float, height: float) -> bool:
    """Agent capsule at pos vs statics and room bounds only (spawn-grid test)."""
    p = as_vec3(pos)
    m = MoverVCapsule(
        x=float(p[0]),
        z=float(p[2]),
        y0=float(p[1]) + radius,
        y1=float(p[1]) + height - radius,
        radius=radius,
        cause=CAUSE_AGENT,
    )
    lo, hi = scene.statics_arrays()
    pen = _vcapsule_boxes_max_pen(m, lo, hi)
    pen = max(pen, _vcapsule_bounds_pen(m, scene.room_lo, scene.room_hi))
    return pen <= CONTACT_EPS


def agent_clear(scene: Scene, pos, radius: float, height: float, exclude: frozenset[str] = frozenset()) -> bool:
    """Agent capsule vs statics, bounds, and all objects."""
    if not agent_clear_of_statics(scene, pos, radius, height):
        return False
    p = as_vec3(pos)
    m = MoverVCapsule(
        x=float(p[0]),
        z=float(p[2]),
        y0=float(p[1]) + radius,
        y1=float(p[1]) + height - radius,
        radius=radius,
        cause=CAUSE_AGENT,
    )
    for o in scene.objects:
        if o.id in exclude:
            continue
        pen, _ = mover_object_pen(m, o, o.position)
        if pen > CONTACT_EPS:
            return False
    return True


def movers_clear(
    scene: Scene,
    movers: list[Mover],
    held_id: str | None = None,
    allow_contact: dict[str, frozenset[str]] | None = None,
) -> bool:
    """Static configuration check: no mover contacts statics or objects.

    allow_contact maps object ids to mover causes permitted to touch them
    (used to allow the grasper to intersect the pickup target).
    """
    heavy = [o for o in scene.objects if o.mass_class == HEAVY and o.id != held_id]
    for m in movers:
        if mover_static_pen(m, scene, heavy) > CONTACT_EPS:
            return False
    for o in scene.objects:
        if o.id == held_id or o.mass_class == HEAVY:
            continue
        for m in movers:
            if o.id in m.phase_through:
                continue
            if allow_contact and m.cause in allow_contact.get(o.id, frozenset()):
                continue
            pen, _ = mover_object_pen(m, o, o.position)
            if pen > CONTACT_EPS:
                return False
    return True
