"""Shared geometry helpers: yaw rotations, canonical serialization, state hashing.

Axis convention throughout the package: x-right, y-up, z-forward, units in
meters. Yaw is a rotation about +y, positive turning right (toward +x), so
the facing direction at yaw a is (sin a, 0, cos a).
"""

from __future__ import annotations

import json
import math
from typing import Sequence

import numpy as np

# Penetrations at or below this depth count as touching, not colliding.
CONTACT_EPS = 1e-9


def vec3(x: float, y: float, z: float) -> np.ndarray:
    return np.array([float(x), float(y), float(z)], dtype=np.float64)


def as_vec3(v: Sequence[float]) -> np.ndarray:
    a = np.asarray(v, dtype=np.float64)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    return a


def norm(v: np.ndarray) -> float:
    return float(math.sqrt(float(np.dot(v, v))))


def facing(yaw: float) -> np.ndarray:
    """Unit forward direction for a given yaw."""
    return vec3(math.sin(yaw), 0.0, math.cos(yaw))


def yaw_matrix(yaw: float) -> np.ndarray:
    """Rotation matrix mapping agent-frame vectors to world frame."""
    c, s = math.cos(yaw), math.sin(yaw)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]], dtype=np.float64)


def world_to_agent(v: np.ndarray, yaw: float) -> np.ndarray:
    """Express a world-frame vector in the frame of an agent at the given yaw."""
    c, s = math.cos(yaw), math.sin(yaw)
    return vec3(c * v[0] - s * v[2], v[1], s * v[0] + c * v[2])


def agent_to_world(v: np.ndarray, yaw: float) -> np.ndarray:
    c, s = math.cos(yaw), math.sin(yaw)
    return vec3(c * v[0] + s * v[2], v[1], -s * v[0] + c * v[2])


def rotate_xz(points: np.ndarray, yaw: float) -> np.ndarray:
    """Rotate an (N, 3) point array about +y by yaw (agent-to-world sense)."""
    c, s = math.cos(yaw), math.sin(yaw)
    out = points.copy()
    out[:, 0] = c * points[:, 0] + s * points[:, 2]
    out[:, 2] = -s * points[:, 0] + c * points[:, 2]
    return out


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a <= -math.pi:
        a += 2.0 * math.pi
    elif a > math.pi:
        a -= 2.0 * math.pi
    return a


def canonical_json(obj) -> str:
    """Deterministic JSON text: sorted keys, compact separators."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def canonical_json_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")
