"""Scene model: an axis-aligned room, static boxes, and movable objects.

The scene file format is a stable contract (schema_version 1): a single
JSON document with scene_id, room_bounds, statics[], objects[] and
spawn_grid[]. Units are meters; axes are x-right, y-up, z-forward. Walls
are ordinary statics; the floor is the implicit plane at room_bounds
lo.y. spawn_grid holds [x, z] agent positions on the floor that are
collision-free for the agent footprint against the statics.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .geometry import as_vec3, canonical_json, vec3

SCENE_SCHEMA_VERSION = 1

LIGHT = "light"
HEAVY = "heavy"


@dataclass(frozen=True)
class StaticBox:
    """Axis-aligned immovable box (counter, wall, shelf)."""

    id: str
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo, hi = as_vec3(self.lo), as_vec3(self.hi)
        if not np.all(hi > lo):
            raise ValueError(f"static {self.id}: hi must exceed lo on every axis")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)


@dataclass
class SceneObject:
    """Movable object, a sphere or a yaw-rotated box."""

    id: str
    category: str
    shape_kind: str  # "sphere" | "box"
    shape_dims: np.ndarray  # sphere: [radius]; box: [hx, hy, hz] half-extents
    position: np.ndarray
    yaw: float = 0.0
    pickupable: bool = True
    mass_class: str = LIGHT

    def __post_init__(self) -> None:
        if self.shape_kind not in ("sphere", "box"):
            raise ValueError(f"object {self.id}: unknown shape {self.shape_kind}")
        dims = np.asarray(self.shape_dims, dtype=np.float64)
        if self.shape_kind == "sphere" and (dims.shape != (1,) or dims[0] <= 0):
            raise ValueError(f"object {self.id}: sphere needs one positive radius")
        if self.shape_kind == "box" and (dims.shape != (3,) or not np.all(dims > 0)):
            raise ValueError(f"object {self.id}: box needs three positive half-extents")
        if self.mass_class not in (LIGHT, HEAVY):
            raise ValueError(f"object {self.id}: bad mass_class {self.mass_class}")
        self.shape_dims = dims
        self.position = as_vec3(self.position)

    @property
    def half_height(self) -> float:
        return float(self.shape_dims[0] if self.shape_kind == "sphere" else self.shape_dims[1])

    @property
    def bounding_radius(self) -> float:
        if self.shape_kind == "sphere":
            return float(self.shape_dims[0])
        return float(math.sqrt(float(np.dot(self.shape_dims, self.shape_dims))))

    def horizontal_extent(self) -> float:
        """Radius of the smallest vertical cylinder containing the shape."""
        if self.shape_kind == "sphere":
            return float(self.shape_dims[0])
        return float(math.hypot(float(self.shape_dims[0]), float(self.shape_dims[2])))

    def copy(self) -> "SceneObject":
        return SceneObject(
            id=self.id,
            category=self.category,
            shape_kind=self.shape_kind,
            shape_dims=self.shape_dims.copy(),
            position=self.position.copy(),
            yaw=self.yaw,
            pickupable=self.pickupable,
            mass_class=self.mass_class,
        )


@dataclass(frozen=True)
class Disturbance:
    """A non-held object moved during a step."""

    object_id: str
    step_index: int
    displacement: np.ndarray
    cause: str  # "agent_body" | "arm" | "held_object"

    def __post_init__(self) -> None:
        object.__setattr__(self, "displacement", as_vec3(self.displacement))
        if float(np.dot(self.displacement, self.displacement)) <= 0.0:
            raise ValueError("disturbance displacement must be nonzero")


@dataclass
class Scene:
    id: str
    room_lo: np.ndarray
    room_hi: np.ndarray
    statics: list[StaticBox] = field(default_factory=list)
    objects: list[SceneObject] = field(default_factory=list)
    spawn_grid: list[tuple[float, float]] = field(default_factory=list)

    # Cached static arrays for vectorized queries; rebuilt on demand.
    _statics_lo: np.ndarray | None = field(default=None, repr=False, compare=False)
    _statics_hi: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.room_lo = as_vec3(self.room_lo)
        self.room_hi = as_vec3(self.room_hi)
        if not np.all(self.room_hi > self.room_lo):
            raise ValueError("room_hi must exceed room_lo on every axis")

    @property
    def floor_y(self) -> float:
        return float(self.room_lo[1])

    def statics_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._statics_lo is None or len(self._statics_lo) != len(self.statics):
            if self.statics:
                self._statics_lo = np.stack([s.lo for s in self.statics])
                self._statics_hi = np.stack([s.hi for s in self.statics])
            else:
                self._statics_lo = np.zeros((0, 3))
                self._statics_hi = np.zeros((0, 3))
        return self._statics_lo, self._statics_hi

    def object_by_id(self, object_id: str) -> SceneObject:
        for o in self.objects:
            if o.id == object_id:
                return o
        raise KeyError(f"no object {object_id!r} in scene {self.id}")

    def object_by_category(self, category: str) -> SceneObject | None:
        for o in self.objects:
            if o.category == category:
                return o
        return None

    def copy(self) -> "Scene":
        return Scene(
            id=self.id,
            room_lo=self.room_lo.copy(),
            room_hi=self.room_hi.copy(),
            statics=list(self.statics),
            objects=[o.copy() for o in self.objects],
            spawn_grid=list(self.spawn_grid),
        )

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": SCENE_SCHEMA_VERSION,
            "scene_id": self.id,
            "room_bounds": {"lo": self.room_lo.tolist(), "hi": self.room_hi.tolist()},
            "statics": [
                {"id": s.id, "lo": s.lo.tolist(), "hi": s.hi.tolist()} for s in self.statics
            ],
            "objects": [
                {
                    "id": o.id,
                    "category": o.category,
                    "shape": (
                        {"kind": "sphere", "radius": float(o.shape_dims[0])}
                        if o.shape_kind == "sphere"
                        else {"kind": "box", "half_extents": o.shape_dims.tolist()}
                    ),
                    "position": o.position.tolist(),
                    "yaw": o.yaw,
                    "pickupable": o.pickupable,
                    "mass_class": o.mass_class,
                }
                for o in self.objects
            ],
            "spawn_grid": [[x, z] for x, z in self.spawn_grid],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "Scene":
        if d.get("schema_version") != SCENE_SCHEMA_VERSION:
            raise ValueError(f"unsupported scene schema_version {d.get('schema_version')!r}")
        objects = []
        for od in d["objects"]:
            sh = od["shape"]
            if sh["kind"] == "sphere":
                kind, dims = "sphere", np.array([sh["radius"]], dtype=np.float64)
            else:
                kind, dims = "box", np.asarray(sh["half_extents"], dtype=np.float64)
            objects.append(
                SceneObject(
                    id=od["id"],
                    category=od["category"],
                    shape_kind=kind,
                    shape_dims=dims,
                    position=as_vec3(od["position"]),
                    yaw=float(od["yaw"]),
                    pickupable=bool(od["pickupable"]),
                    mass_class=od["mass_class"],
                )
            )
        return Scene(
            id=d["scene_id"],
            room_lo=as_vec3(d["room_bounds"]["lo"]),
            room_hi=as_vec3(d["room_bounds"]["hi"]),
            statics=[
                StaticBox(id=s["id"], lo=as_vec3(s["lo"]), hi=as_vec3(s["hi"]))
                for s in d["statics"]
            ],
            objects=objects,
            spawn_grid=[(float(x), float(z)) for x, z in d["spawn_grid"]],
        )

    @staticmethod
    def from_json(text: str) -> "Scene":
        return Scene.from_dict(json.loads(text))


def save_scene(scene: Scene, path: str | Path) -> None:
    Path(path).write_text(scene.to_json() + "\n", encoding="utf-8")


def load_scene(path: str | Path) -> Scene:
    return Scene.from_json(Path(path).read_text(encoding="utf-8"))


def object_world_aabb(obj: SceneObject, position: np.ndarray | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Conservative world AABB of an object at its (or a given) position."""
    p = obj.position if position is None else as_vec3(position)
    if obj.shape_kind == "sphere":
        r = float(obj.shape_dims[0])
        ext = vec3(r, r, r)
    else:
        hx, hy, hz = (float(v) for v in obj.shape_dims)
        c, s = abs(math.cos(obj.yaw)), abs(math.sin(obj.yaw))
        ext = vec3(c * hx + s * hz, hy, s * hx + c * hz)
    return p - ext, p + ext


def validate_scene(scene: Scene, agent_radius: float = 0.2, agent_height: float = 1.8) -> list[str]:
    """Invariant check; returns a list of violations (empty = valid)."""
    from .collision import agent_clear_of_statics  # deferred: collision imports scene

    problems = []
    for s in scene.statics:
        if np.any(s.lo < scene.room_lo - 1e-9) or np.any(s.hi > scene.room_hi + 1e-9):
            problems.append(f"static {s.id} outside room bounds")
    for o in scene.objects:
        lo, hi = object_world_aabb(o)
        if np.any(lo < scene.room_lo - 1e-9) or np.any(hi > scene.room_hi + 1e-9):
            problems.append(f"object {o.id} outside room bounds")
    ids = [o.id for o in scene.objects]
    if len(set(ids)) != len(ids):
        problems.append("duplicate object ids")
    for x, z in scene.spawn_grid:
        if not agent_clear_of_statics(scene, vec3(x, 0.0, z), agent_radius, agent_height):
            problems.append(f"spawn position ({x}, {z}) collides with a static")
    return problems
