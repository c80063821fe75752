"""Independent reference implementations used to cross-check production code.

Everything here is deliberately naive: plain loops, scalar math, no
pruning, no batching. Each oracle re-states the documented semantics on
its own so agreement with the production path is meaningful.
"""

from __future__ import annotations

import math

import numpy as np

from armnav.collision import Mover, MoverOBB, MoverPoints, MoverVCapsule
from armnav.kinematics import ArmGeometry, JointAngles, forward_kinematics
from armnav.scene import Scene, SceneObject

CONTACT_EPS = 1e-9


# ---------------------------------------------------------------------------
# damped-least-squares IK (numeric cross-check for the closed form)


def dls_ik(target, geom: ArmGeometry = ArmGeometry(), iters: int = 300) -> JointAngles | None:
    """Iterative damped least squares over (yaw, pitch, elbow).

    Seeds the yaw from the target bearing and restarts from a few pitch and
    elbow guesses; purely numeric, never consults the closed form.
    """
    target = np.asarray(target, dtype=np.float64)
    yaw0 = math.atan2(target[0], target[2])
    for pitch0, elbow0 in ((0.3, 1.0), (1.0, 2.0), (-0.8, 1.5), (0.0, 0.4)):
        q = np.array([yaw0, pitch0, elbow0])
        lam = 0.05
        for _ in range(iters):
            angles = JointAngles(q[0], q[1], min(max(q[2], 0.0), math.pi))
            wrist = forward_kinematics(angles, geom).wrist
            err = target - wrist
            if float(np.linalg.norm(err)) < 1e-10:
                return angles
            jac = np.zeros((3, 3))
            h = 1e-6
            for j in range(3):
                dq = q.copy()
                dq[j] += h
                a2 = JointAngles(dq[0], dq[1], min(max(dq[2], 0.0), math.pi))
                jac[:, j] = (forward_kinematics(a2, geom).wrist - wrist) / h
            jt = jac.T
            step = jt @ np.linalg.solve(jac @ jt + lam * np.eye(3), err)
            q = q + step
            q[2] = min(max(q[2], 0.0), math.pi)
        angles = JointAngles(q[0], q[1], min(max(q[2], 0.0), math.pi))
        wrist = forward_kinematics(angles, geom).wrist
        if float(np.linalg.norm(target - wrist)) < 1e-7:
            return angles
    return None


# ---------------------------------------------------------------------------
# scalar contact predicates


def _pt_box_pen(p, r, lo, hi) -> float:
    gx = max(lo[0] - p[0], p[0] - hi[0], 0.0)
    gy = max(lo[1] - p[1], p[1] - hi[1], 0.0)
    gz = max(lo[2] - p[2], p[2] - hi[2], 0.0)
    d = math.sqrt(gx * gx + gy * gy + gz * gz)
    if d == 0.0:
        inner = min(
            p[0] - lo[0], hi[0] - p[0], p[1] - lo[1], hi[1] - p[1], p[2] - lo[2], hi[2] - p[2]
        )
        return r + inner
    return r - d


def _to_local(p, center, yaw):
    c, s = math.cos(yaw), math.sin(yaw)
    qx, qy, qz = p[0] - center[0], p[1] - center[1], p[2] - center[2]
    return (c * qx - s * qz, qy, s * qx + c * qz)


def _pt_obj_pen(p, r, obj: SceneObject, pos) -> float:
    if obj.shape_kind == "sphere":
        d = math.dist((p[0], p[1], p[2]), (pos[0], pos[1], pos[2]))
        return (r + float(obj.shape_dims[0])) - d
    local = _to_local(p, pos, obj.yaw)
    h = obj.shape_dims
    return _pt_box_pen(local, r, (-h[0], -h[1], -h[2]), (h[0], h[1], h[2]))


def _rect_overlap_2d(c1, h1, yaw1, c2, h2, yaw2) -> float:
    def axes(yaw):
        c, s = math.cos(yaw), math.sin(yaw)
        return ((c, -s), (s, c))

    u1, w1 = axes(yaw1)
    u2, w2 = axes(yaw2)
    dx, dz = c2[0] - c1[0], c2[1] - c1[1]
    best = math.inf
    for a in (u1, w1, u2, w2):
        r1 = h1[0] * abs(u1[0] * a[0] + u1[1] * a[1]) + h1[1] * abs(w1[0] * a[0] + w1[1] * a[1])
        r2 = h2[0] * abs(u2[0] * a[0] + u2[1] * a[1]) + h2[1] * abs(w2[0] * a[0] + w2[1] * a[1])
        ov = r1 + r2 - abs(dx * a[0] + dz * a[1])
        best = min(best, ov)
    return best


def mover_obj_pen(m: Mover, obj: SceneObject, pos) -> tuple[float, tuple]:
    """Deepest penetration plus the reference point for the push direction."""
    if isinstance(m, MoverPoints):
        best, ref = -math.inf, m.pts[0]
        for p in m.pts:
            pen = _pt_obj_pen(p, m.radius, obj, pos)
            if pen > best:
                best, ref = pen, p
        return best, (ref[0], ref[1], ref[2])
    if isinstance(m, MoverVCapsule):
        ref = (m.x, (m.y0 + m.y1) / 2.0, m.z)
        if obj.shape_kind == "sphere":
            dy = max(pos[1] - m.y1, m.y0 - pos[1], 0.0)
            dxz = math.hypot(pos[0] - m.x, pos[2] - m.z)
            return (m.radius + float(obj.shape_dims[0])) - math.hypot(dxz, dy), ref
        lx, _, lz = _to_local((m.x, 0.0, m.z), pos, obj.yaw)
        h = obj.shape_dims
        y0l, y1l = m.y0 - pos[1], m.y1 - pos[1]
        dy = max(-h[1] - y1l, y0l - h[1], 0.0)
        gx = max(abs(lx) - h[0], 0.0)
        gz = max(abs(lz) - h[2], 0.0)
        d = math.hypot(math.hypot(gx, gz), dy)
        if d == 0.0:
            inner = min(h[0] - abs(lx), h[2] - abs(lz), min(y1l, h[1]) - max(y0l, -h[1]))
            return m.radius + inner, ref
        return m.radius - d, ref
    # held box
    if obj.shape_kind == "sphere":
        local = _to_local(pos, m.center, m.yaw)
        h = m.half
        pen = _pt_box_pen(local, float(obj.shape_dims[0]), (-h[0], -h[1], -h[2]), (h[0], h[1], h[2]))
        return pen, (m.center[0], m.center[1], m.center[2])
    oy = min(m.center[1] + m.half[1], pos[1] + obj.shape_dims[1]) - max(
        m.center[1] - m.half[1], pos[1] - obj.shape_dims[1]
    )
    if oy <= 0.0:
        return -math.inf, (m.center[0], m.center[1], m.center[2])
    ov = _rect_overlap_2d(
        (m.center[0], m.center[2]),
        (m.half[0], m.half[2]),
        m.yaw,
        (pos[0], pos[2]),
        (obj.shape_dims[0], obj.shape_dims[2]),
        obj.yaw,
    )
    if ov <= 0.0:
        return ov, (m.center[0], m.center[1], m.center[2])
    return min(oy, ov), (m.center[0], m.center[1], m.center[2])


def mover_static_pen(m: Mover, scene: Scene, heavy: list[SceneObject]) -> float:
    best = -math.inf
    rl, rh = scene.room_lo, scene.room_hi
    if isinstance(m, MoverPoints):
        for p in m.pts:
            for s in scene.statics:
                best = max(best, _pt_box_pen(p, m.radius, s.lo, s.hi))
            for ax in range(3):
                best = max(best, (rl[ax] + m.radius) - p[ax], p[ax] - (rh[ax] - m.radius))
    elif isinstance(m, MoverVCapsule):
        for s in scene.statics:
            dy = max(s.lo[1] - m.y1, m.y0 - s.hi[1], 0.0)
            gx = max(s.lo[0] - m.x, m.x - s.hi[0], 0.0)
            gz = max(s.lo[2] - m.z, m.z - s.hi[2], 0.0)
            d = math.hypot(math.hypot(gx, gz), dy)
            if d == 0.0:
                inner = min(
                    m.x - s.lo[0], s.hi[0] - m.x, m.z - s.lo[2], s.hi[2] - m.z,
                    min(m.y1, s.hi[1]) - max(m.y0, s.lo[1]),
                )
                best = max(best, m.radius + inner)
            else:
                best = max(best, m.radius - d)
        best = max(
            best,
            (rl[0] + m.radius) - m.x,
            m.x - (rh[0] - m.radius),
            (rl[2] + m.radius) - m.z,
            m.z - (rh[2] - m.radius),
            rl[1] - (m.y0 - m.radius),
            (m.y1 + m.radius) - rh[1],
        )
    else:
        for s in scene.statics:
            oy = min(s.hi[1], m.center[1] + m.half[1]) - max(s.lo[1], m.center[1] - m.half[1])
            if oy <= 0.0:
                continue
            bc = ((s.lo[0] + s.hi[0]) / 2.0, (s.lo[2] + s.hi[2]) / 2.0)
            bh = ((s.hi[0] - s.lo[0]) / 2.0, (s.hi[2] - s.lo[2]) / 2.0)
            ov = _rect_overlap_2d(
                (m.center[0], m.center[2]), (m.half[0], m.half[2]), m.yaw, bc, bh, 0.0
            )
            if ov > 0.0:
                best = max(best, min(oy, ov))
        c, s_ = abs(math.cos(m.yaw)), abs(math.sin(m.yaw))
        ex = c * m.half[0] + s_ * m.half[2]
        ez = s_ * m.half[0] + c * m.half[2]
        best = max(
            best,
            (rl[0] + ex) - m.center[0],
            m.center[0] - (rh[0] - ex),
            rl[1] - (m.center[1] - m.half[1]),
            (m.center[1] + m.half[1]) - rh[1],
            (rl[2] + ez) - m.center[2],
            m.center[2] - (rh[2] - ez),
        )
    for hv in heavy:
        pen, _ = mover_obj_pen(m, hv, hv.position)
        best = max(best, pen)
    return best


def object_static_pen(obj: SceneObject, pos, scene: Scene, heavy: list[SceneObject]) -> float:
    proxy_pos = np.asarray(pos, dtype=np.float64)
    if obj.shape_kind == "sphere":
        m: Mover = MoverPoints(pts=proxy_pos[None, :], radius=float(obj.shape_dims[0]), cause="x")
    else:
        m = MoverOBB(center=proxy_pos, yaw=obj.yaw, half=obj.shape_dims, cause="x")
    return mover_static_pen(m, scene, [h for h in heavy if h.id != obj.id])


# ---------------------------------------------------------------------------
# motion resolution oracle


def resolve_motion_oracle(scene: Scene, plan: list[list[Mover]], held_id: str | None = None):
    """In-order sampled walk with the same documented push semantics.

    Returns (status, {object_id: displacement vec3}).
    """
    light = sorted(
        (o for o in scene.objects if o.mass_class == "light" and o.id != held_id),
        key=lambda o: o.id,
    )
    heavy = [o for o in scene.objects if o.mass_class == "heavy" and o.id != held_id]
    pos = {o.id: np.array(o.position, dtype=np.float64) for o in light}
    moved: dict[str, np.ndarray] = {}

    baseline = {}
    for i, m in enumerate(plan[0]):
        if m.grace:
            baseline[i] = max(0.0, mover_static_pen(m, scene, heavy))

    def contact_any(cfg, obj, p):
        for m in cfg:
            if obj.id in m.phase_through:
                continue
            pen, _ = mover_obj_pen(m, obj, p)
            if pen > CONTACT_EPS:
                return True
        return False

    for cfg in plan[1:]:
        for i, m in enumerate(cfg):
            if mover_static_pen(m, scene, heavy) > baseline.get(i, 0.0) + CONTACT_EPS:
                return "blocked_by_static", {}
        for obj in light:
            for _attempt in range(8):
                deepest, ref = -math.inf, None
                for m in cfg:
                    if obj.id in m.phase_through:
                        continue
                    pen, r = mover_obj_pen(m, obj, pos[obj.id])
                    if pen > deepest:
                        deepest, ref = pen, r
                if deepest <= CONTACT_EPS:
                    break
                dx = pos[obj.id][0] - ref[0]
                dz = pos[obj.id][2] - ref[2]
                nrm = math.hypot(dx, dz)
                if nrm < 1e-9:
                    return "blocked_by_static", {}
                direction = np.array([dx / nrm, 0.0, dz / nrm])
                lo_d, hi_d = 0.0, 0.02
                while contact_any(cfg, obj, pos[obj.id] + hi_d * direction):
                    lo_d = hi_d
                    hi_d *= 2.0
                    if hi_d > 0.6:
                        return "blocked_by_static", {}
                while hi_d - lo_d > 1e-12:
                    mid = (lo_d + hi_d) / 2.0
                    if contact_any(cfg, obj, pos[obj.id] + mid * direction):
                        lo_d = mid
                    else:
                        hi_d = mid
                d = hi_d
                n_slide = max(1, int(math.ceil(d / 0.01 - 1e-12)))
                for k in range(1, n_slide + 1):
                    t = d * k / n_slide
                    if object_static_pen(obj, pos[obj.id] + t * direction, scene, heavy) > CONTACT_EPS:
                        return "blocked_by_static", {}
                pos[obj.id] = pos[obj.id] + d * direction
                moved[obj.id] = pos[obj.id] - np.asarray(obj.position)
            else:
                return "blocked_by_static", {}
    if not moved:
        return "clear", {}
    return "pushes", moved


# ---------------------------------------------------------------------------
# per-pixel depth oracle


def depth_oracle(scene: Scene, cam_pos, cam_yaw, width, height, fov_deg=90.0, max_range=10.0):
    """Brute-force intersection of every pixel ray with every primitive."""
    tan_half = math.tan(math.radians(fov_deg) / 2.0)
    c, s = math.cos(cam_yaw), math.sin(cam_yaw)
    ox, oy, oz = float(cam_pos[0]), float(cam_pos[1]), float(cam_pos[2])
    out = np.empty((height, width), dtype=np.float64)
    tiny = 1e-300

    def slab(lox, hix, loy, hiy, loz, hiz, px, py, pz, ix, iy, iz):
        t1x = (lox - px) * ix
        t2x = (hix - px) * ix
        t1y = (loy - py) * iy
        t2y = (hiy - py) * iy
        t1z = (loz - pz) * iz
        t2z = (hiz - pz) * iz
        tlo = max(min(t1x, t2x), min(t1y, t2y), min(t1z, t2z))
        thi = min(max(t1x, t2x), max(t1y, t2y), max(t1z, t2z))
        if thi >= tlo and tlo > 0.0:
            return tlo
        return math.inf

    for j in range(height):
        v = (1.0 - 2.0 * (j + 0.5) / height) * tan_half * (height / width)
        for i in range(width):
            u = (2.0 * (i + 0.5) / width - 1.0) * tan_half
            dx = c * u + s * 1.0
            dy = v
            dz = -s * u + c * 1.0
            ix = 1.0 / (dx if dx != 0.0 else tiny)
            iy = 1.0 / (dy if dy != 0.0 else tiny)
            iz = 1.0 / (dz if dz != 0.0 else tiny)
            best = math.inf
            for st in scene.statics:
                t = slab(st.lo[0], st.hi[0], st.lo[1], st.hi[1], st.lo[2], st.hi[2], ox, oy, oz, ix, iy, iz)
                if t < best:
                    best = t
            for o in scene.objects:
                if o.shape_kind == "sphere":
                    sx = ox - o.position[0]
                    sy = oy - o.position[1]
                    sz = oz - o.position[2]
                    a = dx * dx + dy * dy + dz * dz
                    b = dx * sx + dy * sy + dz * sz
                    c0 = sx * sx + sy * sy + sz * sz - float(o.shape_dims[0]) ** 2
                    disc = b * b - a * c0
                    if disc > 0.0:
                        t = (-b - math.sqrt(max(disc, 0.0))) / a
                        if 0.0 < t < best:
                            best = t
                else:
                    oc, osn = math.cos(o.yaw), math.sin(o.yaw)
                    rx = ox - o.position[0]
                    ry = oy - o.position[1]
                    rz = oz - o.position[2]
                    lox_p = oc * rx - osn * rz
                    loz_p = osn * rx + oc * rz
                    ldx = oc * dx - osn * dz
                    ldz = osn * dx + oc * dz
                    jx = 1.0 / (ldx if ldx != 0.0 else tiny)
                    jz = 1.0 / (ldz if ldz != 0.0 else tiny)
                    h = o.shape_dims
                    t = slab(-h[0], h[0], -h[1], h[1], -h[2], h[2], lox_p, ry, loz_p, jx, iy, jz)
                    if t < best:
                        best = t
            out[j, i] = best if best < max_range else max_range
    return out


# ---------------------------------------------------------------------------
# metrics reference


def metrics_reference(logs):
    """Plain re-statement of the six metric definitions."""
    n = len(logs)
    succ = [g for g in logs if g.outcome == "success"]
    picked = [g for g in logs if g.pickup_step is not None]
    clean = [g for g in succ if g.disturbance_count == 0]
    out = {
        "SRwD": len(clean) / n,
        "PuSR": len(picked) / n,
        "SR": len(succ) / n,
        "PuLen": sum(g.pickup_step for g in picked) / len(picked) if picked else None,
        "SuLen": sum(g.steps for g in succ) / len(succ) if succ else None,
        "Len": sum(g.steps for g in logs) / n,
        "n_episodes": n,
    }
    return out
