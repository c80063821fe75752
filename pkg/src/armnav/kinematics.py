"""Closed-form kinematics for a three-joint, equal-limb swivel arm.

The arm hangs off a vertical mount: a yaw joint at the shoulder selects a
vertical plane, shoulder pitch and elbow pitch articulate within it, and a
free 3-DOF wrist orients the end of the arm. Both limbs have the same
length, so every wrist position inside the front half-ball of radius
``2 * limb`` around the shoulder is attainable, and the two-link solution
reduces to a law-of-cosines triangle.

All solver math happens in the shoulder frame: origin at the shoulder,
+z forward, +y up. ``shoulder_pitch`` is an elevation (positive raises the
limb), ``elbow_pitch`` is the flex angle between the limbs (0 = straight,
pi = fully folded), so the included elbow angle is ``pi - elbow_pitch``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import agent_to_world, as_vec3, norm, vec3

DEFAULT_MAX_REACH = 0.6335
DEFAULT_LIMB = DEFAULT_MAX_REACH / 2.0
DEFAULT_CAPSULE_RADIUS = 0.04


@dataclass(frozen=True)
class JointAngles:
    """Arm configuration in radians.

    shoulder_yaw and the wrist angles are unrestricted; elbow_pitch lies in
    [0, pi].
    """

    shoulder_yaw: float
    shoulder_pitch: float
    elbow_pitch: float
    wrist_euler: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        vals = (self.shoulder_yaw, self.shoulder_pitch, self.elbow_pitch, *self.wrist_euler)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("joint angles must be finite")
        if not -1e-12 <= self.elbow_pitch <= math.pi + 1e-12:
            raise ValueError(f"elbow_pitch {self.elbow_pitch} outside [0, pi]")


@dataclass(frozen=True)
class ArmGeometry:
    limb_length_upper: float = DEFAULT_LIMB
    limb_length_lower: float = DEFAULT_LIMB
    max_reach: float = DEFAULT_MAX_REACH
    shoulder_offset: tuple[float, float, float] = (0.0, 0.0, 0.0)
    capsule_radius: float = DEFAULT_CAPSULE_RADIUS

    def __post_init__(self) -> None:
        if abs(self.limb_length_upper - self.limb_length_lower) > 1e-12:
            raise ValueError("equal-limb arm: upper and lower limb lengths must match")
        if abs(self.limb_length_upper + self.limb_length_lower - self.max_reach) > 1e-12:
            raise ValueError("max_reach must equal the summed limb lengths")
        if self.capsule_radius <= 0.0:
            raise ValueError("capsule_radius must be positive")


@dataclass(frozen=True)
class ReachRegion:
    """Front half-ball of attainable wrist positions."""

    center: np.ndarray
    radius: float
    forward_axis: np.ndarray

    def __post_init__(self) -> None:
        if self.radius <= 0.0:
            raise ValueError("radius must be positive")
        f = as_vec3(self.forward_axis)
        if abs(norm(f) - 1.0) > 1e-9:
            raise ValueError("forward_axis must be a unit vector")


def shoulder_frame_region(geom: ArmGeometry) -> ReachRegion:
    """Reach region in the shoulder frame (centered at the origin, +z forward)."""
    return ReachRegion(center=vec3(0, 0, 0), radius=geom.max_reach, forward_axis=vec3(0, 0, 1))


def in_reach(target, region: ReachRegion) -> bool:
    """True iff target is inside the half-ball, boundary inclusive.

    The half-space test keeps only points on the forward side of the plane
    through the center.
    """
    t = as_vec3(target)
    d = t - region.center
    if float(np.dot(d, region.forward_axis)) < 0.0:
        return False
    return float(np.dot(d, d)) <= region.radius * region.radius


@dataclass(frozen=True)
class FkChain:
    shoulder: np.ndarray
    elbow: np.ndarray
    wrist: np.ndarray
    orientation: np.ndarray  # 3x3, forearm frame composed with the wrist angles


def _limb_dir(yaw: float, elevation: float) -> np.ndarray:
    ce = math.cos(elevation)
    return vec3(math.sin(yaw) * ce, math.sin(elevation), math.cos(yaw) * ce)


def _rot_x(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[1, 0, 0], [0, c, -s], [0, s, c]], dtype=np.float64)


def _rot_y(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, 0, s], [0, 1, 0], [-s, 0, c]], dtype=np.float64)


def _rot_z(a: float) -> np.ndarray:
    c, s = math.cos(a), math.sin(a)
    return np.array([[c, -s, 0], [s, c, 0], [0, 0, 1]], dtype=np.float64)


def forward_kinematics(angles: JointAngles, geom: ArmGeometry = ArmGeometry()) -> FkChain:
    """Joint positions in the shoulder frame plus the wrist orientation.

    The elbow bends downward relative to the upper limb (elbow-up branch),
    matching what solve_ik returns.
    """
    d1 = _limb_dir(angles.shoulder_yaw, angles.shoulder_pitch)
    d2 = _limb_dir(angles.shoulder_yaw, angles.shoulder_pitch - angles.elbow_pitch)
    shoulder = vec3(0, 0, 0)
    elbow = shoulder + geom.limb_length_upper * d1
    wrist = elbow + geom.limb_length_lower * d2
    # Forearm frame: yaw about +y, then elevation as a negative rotation about +x.
    fore = _rot_y(angles.shoulder_yaw) @ _rot_x(-(angles.shoulder_pitch - angles.elbow_pitch))
    wr, wp, wy = angles.wrist_euler
    orientation = fore @ _rot_y(wy) @ _rot_x(wp) @ _rot_z(wr)
    return FkChain(shoulder=shoulder, elbow=elbow, wrist=wrist, orientation=orientation)


def solve_ik(target, geom: ArmGeometry = ArmGeometry()) -> JointAngles | None:
    """Closed-form IK for a wrist target in the shoulder frame.

    Returns None exactly when the target is outside the reach region.
    Always picks the elbow-up branch, so identical targets produce
    bit-identical angles.
    """
    t = as_vec3(target)
    if not all(math.isfinite(v) for v in t):
        raise ValueError("target must be finite")
    if not in_reach(t, shoulder_frame_region(geom)):
        return None
    x, y, z = float(t[0]), float(t[1]), float(t[2])
    rho = math.hypot(x, z)
    r = math.hypot(rho, y)
    yaw = math.atan2(x, z)
    half = r / geom.max_reach
    beta = math.acos(min(1.0, max(-1.0, half)))
    phi = math.atan2(y, rho)
    return JointAngles(shoulder_yaw=yaw, shoulder_pitch=phi + beta, elbow_pitch=2.0 * beta)


@dataclass(frozen=True)
class Capsule:
    """Segment from a to b swept by a sphere of the given radius."""

    a: np.ndarray
    b: np.ndarray
    radius: float


@dataclass(frozen=True)
class Sphere:
    center: np.ndarray
    radius: float


def joint_positions_world(
    angles: JointAngles, geom: ArmGeometry, base_position, base_yaw: float
) -> np.ndarray:
    """Shoulder, elbow, wrist world positions as a (3, 3) array.

    base_position is the world position of the arm mount (the shoulder,
    before applying geom.shoulder_offset); base_yaw rotates the shoulder
    frame into the world.
    """
    d1 = _limb_dir(angles.shoulder_yaw + base_yaw, angles.shoulder_pitch)
    d2 = _limb_dir(angles.shoulder_yaw + base_yaw, angles.shoulder_pitch - angles.elbow_pitch)
    shoulder = as_vec3(base_position) + agent_to_world(as_vec3(geom.shoulder_offset), base_yaw)
    elbow = shoulder + geom.limb_length_upper * d1
    wrist = elbow + geom.limb_length_lower * d2
    return np.stack([shoulder, elbow, wrist])


def arm_capsules(
    angles: JointAngles,
    geom: ArmGeometry,
    base_position,
    base_yaw: float,
    grasper_radius: float = 0.06,
) -> tuple[list[Capsule], Sphere]:
    """World-frame collision primitives for the arm: the two limb capsules
    plus the grasper sphere centered at the wrist."""
    joints = joint_positions_world(angles, geom, base_position, base_yaw)
    caps = [
        Capsule(a=joints[0], b=joints[1], radius=geom.capsule_radius),
        Capsule(a=joints[1], b=joints[2], radius=geom.capsule_radius),
    ]
    return caps, Sphere(center=joints[2], radius=grasper_radius)
