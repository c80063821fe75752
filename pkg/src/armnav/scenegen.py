"""Procedural box-world rooms: walls, counters, shelves, and objects."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .collision import agent_clear_of_statics, object_object_pen, object_statics_pen
from .geometry import vec3
from .library import CLUTTER_CATEGORIES, PICKUPABLE_CATEGORIES, category_spec
from .scene import HEAVY, Scene, SceneObject, StaticBox


class GenerationFailed(Exception):
    def __init__(self, attempts: int, why: str):
        super().__init__(f"scene generation failed after {attempts} attempts: {why}")
        self.attempts = attempts


@dataclass(frozen=True)
class SceneGenParams:
    room_w: tuple[float, float] = (4.0, 6.0)
    room_d: tuple[float, float] = (4.0, 6.0)
    room_h: float = 2.5
    walls: bool = True
    wall_thickness: float = 0.1
    n_statics: tuple[int, int] = (2, 5)  # furniture besides walls
    n_objects: tuple[int, int] = (4, 7)  # pickupable instances
    n_clutter: tuple[int, int] = (0, 2)
    categories: tuple[str, ...] = tuple(PICKUPABLE_CATEGORIES)
    clutter_categories: tuple[str, ...] = tuple(CLUTTER_CATEGORIES)
    grid_pitch: float = 0.25
    agent_radius: float = 0.2
    agent_height: float = 1.8
    max_attempts: int = 50
    id_prefix: str = "scene"

    def __post_init__(self) -> None:
        for lohi in (self.room_w, self.room_d):
            if lohi[1] < lohi[0] or lohi[0] <= 0:
                raise ValueError("room size ranges must be nonempty and positive")
        for lohi in (self.n_statics, self.n_objects, self.n_clutter):
            if lohi[1] < lohi[0] or lohi[0] < 0:
                raise ValueError("count ranges must be nonempty and nonnegative")


def _wall_statics(w: float, d: float, h: float, t: float) -> list[StaticBox]:
    return [
        StaticBox("wall_xlo", vec3(-w / 2, 0, -d / 2), vec3(-w / 2 + t, h, d / 2)),
        StaticBox("wall_xhi", vec3(w / 2 - t, 0, -d / 2), vec3(w / 2, h, d / 2)),
        StaticBox("wall_zlo", vec3(-w / 2 + t, 0, -d / 2), vec3(w / 2 - t, h, -d / 2 + t)),
        StaticBox("wall_zhi", vec3(-w / 2 + t, 0, d / 2 - t), vec3(w / 2 - t, h, d / 2)),
    ]


def _boxes_overlap(lo1, hi1, lo2, hi2, gap: float) -> bool:
    return bool(np.all(hi1 + gap > lo2) and np.all(hi2 + gap > lo1))


def lattice(lo: float, hi: float, pitch: float) -> np.ndarray:
    """Absolute multiples of pitch inside [lo, hi]."""
    k0 = math.ceil(lo / pitch - 1e-9)
    k1 = math.floor(hi / pitch + 1e-9)
    if k1 < k0:
        return np.zeros(0)
    return np.arange(k0, k1 + 1, dtype=np.float64) * pitch


def spawn_positions(scene: Scene, pitch: float, agent_radius: float, agent_height: float) -> list[tuple[float, float]]:
    xlo = float(scene.room_lo[0]) + agent_radius
    xhi = float(scene.room_hi[0]) - agent_radius
    zlo = float(scene.room_lo[2]) + agent_radius
    zhi = float(scene.room_hi[2]) - agent_radius
    out = []
    for x in lattice(xlo, xhi, pitch):
        for z in lattice(zlo, zhi, pitch):
            if agent_clear_of_statics(scene, vec3(x, scene.floor_y, z), agent_radius, agent_height):
                out.append((float(x), float(z)))
    return out


def _place_furniture(rng: np.random.Generator, w: float, d: float, h: float, t: float, count: int) -> list[StaticBox]:
    placed: list[StaticBox] = []
    inner_x = w / 2 - (t + 0.05)
    inner_z = d / 2 - (t + 0.05)
    for i in range(count):
        for _try in range(40):
            kind = rng.choice(["counter", "table", "shelf"])
            if kind == "counter":
                sx, sz = rng.uniform(0.4, 1.2), rng.uniform(0.3, 0.6)
                y0, y1 = 0.0, rng.uniform(0.55, 0.95)
            elif kind == "table":
                sx, sz = rng.uniform(0.5, 0.9), rng.uniform(0.5, 0.9)
                y0, y1 = 0.0, rng.uniform(0.5, 0.8)
            else:  # floating shelf
                sx, sz = rng.uniform(0.4, 1.0), rng.uniform(0.25, 0.45)
                y0 = rng.uniform(0.5, 1.1)
                y1 = y0 + rng.uniform(0.04, 0.08)
            cx = rng.uniform(-inner_x + sx / 2, inner_x - sx / 2)
            cz = rng.uniform(-inner_z + sz / 2, inner_z - sz / 2)
            lo = vec3(cx - sx / 2, y0, cz - sz / 2)
            hi = vec3(cx + sx / 2, y1, cz + sz / 2)
            if any(_boxes_overlap(lo, hi, p.lo, p.hi, 0.05) for p in placed):
                continue
            placed.append(StaticBox(f"{kind}_{i}", lo, hi))
            break
    return placed


def _support_surfaces(scene: Scene) -> list[tuple[float, float, float, float, float]]:
    """(xlo, xhi, zlo, zhi, top_y) for the floor and every furniture top."""
    surfaces = [
        (
            float(scene.room_lo[0]),
            float(scene.room_hi[0]),
            float(scene.room_lo[2]),
            float(scene.room_hi[2]),
            scene.floor_y,
        )
    ]
    for s in scene.statics:
        if s.id.startswith("wall_"):
            continue
        surfaces.append((float(s.lo[0]), float(s.hi[0]), float(s.lo[2]), float(s.hi[2]), float(s.hi[1])))
    return surfaces


def _place_objects(
    rng: np.random.Generator,
    scene: Scene,
    categories: list[str],
) -> bool:
    surfaces = _support_surfaces(scene)
    heavy: list[SceneObject] = []
    for idx, cat in enumerate(categories):
        spec = category_spec(cat)
        obj = SceneObject(
            id=f"obj_{idx}_{cat}",
            category=cat,
            shape_kind=spec.shape_kind,
            shape_dims=np.asarray(spec.dims, dtype=np.float64),
            position=vec3(0, 0, 0),
            yaw=float(rng.uniform(0.0, 2.0 * math.pi)) if spec.shape_kind == "box" else 0.0,
            pickupable=spec.pickupable,
            mass_class=spec.mass_class,
        )
        ext = obj.horizontal_extent()
        done = False
        for _try in range(60):
            xlo, xhi, zlo, zhi, top = surfaces[int(rng.integers(0, len(surfaces)))]
            if xhi - xlo < 2 * ext + 0.02 or zhi - zlo < 2 * ext + 0.02:
                continue
            x = rng.uniform(xlo + ext, xhi - ext)
            z = rng.uniform(zlo + ext, zhi - ext)
            pos = vec3(x, top + obj.half_height, z)
            # resting on the support is contact (pen 0), so only reject real overlap
            if object_statics_pen(obj, pos, scene, heavy) > 1e-9:
                continue
            if any(object_object_pen(obj, pos, o, o.position) > -0.01 for o in scene.objects):
                continue
            obj.position = pos
            scene.objects.append(obj)
            if obj.mass_class == HEAVY:
                heavy.append(obj)
            done = True
            break
        if not done:
            return False
    return True


def generate_scene(seed: int, params: SceneGenParams = SceneGenParams()) -> Scene:
    """Deterministic rejection-sampled room; raises GenerationFailed when
    the attempt budget runs out."""
    rng = np.random.default_rng(seed)
    last_why = "no attempts made"
    for attempt in range(1, params.max_attempts + 1):
        w = float(rng.uniform(*params.room_w))
        d = float(rng.uniform(*params.room_d))
        h = params.room_h
        scene = Scene(
            id=f"{params.id_prefix}_{seed:05d}",
            room_lo=vec3(-w / 2, 0.0, -d / 2),
            room_hi=vec3(w / 2, h, d / 2),
        )
        if params.walls:
            scene.statics.extend(_wall_statics(w, d, h, params.wall_thickness))
        n_furniture = int(rng.integers(params.n_statics[0], params.n_statics[1] + 1))
        scene.statics.extend(
            _place_furniture(rng, w, d, h, params.wall_thickness if params.walls else 0.0, n_furniture)
        )
        n_objects = int(rng.integers(params.n_objects[0], params.n_objects[1] + 1))
        n_clutter = int(rng.integers(params.n_clutter[0], params.n_clutter[1] + 1))
        cats = [str(c) for c in rng.permutation(list(params.categories))[:n_objects]]
        cats += [str(c) for c in rng.permutation(list(params.clutter_categories))[:n_clutter]]
        if not _place_objects(rng, scene, cats):
            last_why = "object placement exhausted"
            continue
        scene.spawn_grid = spawn_positions(scene, params.grid_pitch, params.agent_radius, params.agent_height)
        if not scene.spawn_grid:
            last_why = "no collision-free spawn positions"
            continue
        return scene
    raise GenerationFailed(params.max_attempts, last_why)
