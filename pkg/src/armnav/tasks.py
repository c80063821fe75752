"""Task dataset tooling: placement enumeration, reachability, pairing, splits.

A task moves one object between two feasible locations. A location is
feasible when some collision-free agent pose (spawn-grid position, one of
8 yaws, an attainable arm height) can put the grasper onto the object
there via IK, with line of sight from the camera and no contact anywhere
else. The witness pose that proves feasibility is recorded with the task
so replay checks can rebuild the exact configuration.

Dataset files (schema_version 1): one JSON document per split with split
metadata plus the task array.
"""

from __future__ import annotations

import json
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .collision import (
    CAUSE_ARM,
    MoverPoints,
    agent_clear,
    capsules_to_movers,
    movers_clear,
    object_object_pen,
    object_statics_pen,
)
from .depth import line_of_sight
from .geometry import CONTACT_EPS, canonical_json, as_vec3, vec3, world_to_agent
from .kinematics import ArmGeometry, arm_capsules, solve_ik
from .library import category_spec
from .scene import HEAVY, Scene, SceneObject
from .scenegen import lattice

DATASET_SCHEMA_VERSION = 1

SPLIT_NAMES = ("Train", "Val", "Test-SeenObj", "Test-NovelObj", "SeenScenes-NovelObj")

YAWS = tuple(k * math.radians(45.0) for k in range(8))

# The grasper sphere is wider than the limb capsules, so a wrist hovering
# over the object with surface clearance strictly between the capsule
# radius and the grasper radius intersects the object with the arm
# otherwise untouched. The witness wrist target uses the window midpoint.


def wrist_clearances(cfg: "PoseSearchConfig", geom: ArmGeometry) -> tuple[float, ...]:
    return ((geom.capsule_radius + cfg.grasper_radius) / 2.0,)

PLACEMENT_PITCH = 0.25


class InsufficientLocations(Exception):
    pass


@dataclass(frozen=True)
class Witness:
    """Collision-free agent pose proving a location is reachable."""

    position: tuple[float, float]  # (x, z) on the spawn grid
    yaw: float
    arm_height: float
    wrist_target: tuple[float, float, float]

    def to_dict(self) -> dict:
        return {
            "position": list(self.position),
            "yaw": self.yaw,
            "arm_height": self.arm_height,
            "wrist_target": list(self.wrist_target),
        }

    @staticmethod
    def from_dict(d: dict) -> "Witness":
        return Witness(
            position=(float(d["position"][0]), float(d["position"][1])),
            yaw=float(d["yaw"]),
            arm_height=float(d["arm_height"]),
            wrist_target=tuple(float(v) for v in d["wrist_target"]),
        )


@dataclass(frozen=True)
class TaskSpec:
    scene_id: str
    object_id: str
    object_category: str
    initial_location: tuple[float, float, float]
    goal_location: tuple[float, float, float]
    agent_start: tuple[float, float, float]
    agent_yaw: float
    initial_witness: Witness | None = None
    goal_witness: Witness | None = None

    def __post_init__(self) -> None:
        if tuple(self.initial_location) == tuple(self.goal_location):
            raise ValueError("initial and goal locations must differ")

    def to_dict(self) -> dict:
        d = {
            "scene_id": self.scene_id,
            "object_id": self.object_id,
            "object_category": self.object_category,
            "initial_location": list(self.initial_location),
            "goal_location": list(self.goal_location),
            "agent_start": list(self.agent_start),
            "agent_yaw": self.agent_yaw,
        }
        if self.initial_witness is not None:
            d["initial_witness"] = self.initial_witness.to_dict()
        if self.goal_witness is not None:
            d["goal_witness"] = self.goal_witness.to_dict()
        return d

    @staticmethod
    def from_dict(d: dict) -> "TaskSpec":
        return TaskSpec(
            scene_id=d["scene_id"],
            object_id=d["object_id"],
            object_category=d["object_category"],
            initial_location=tuple(float(v) for v in d["initial_location"]),
            goal_location=tuple(float(v) for v in d["goal_location"]),
            agent_start=tuple(float(v) for v in d["agent_start"]),
            agent_yaw=float(d["agent_yaw"]),
            initial_witness=Witness.from_dict(d["initial_witness"]) if "initial_witness" in d else None,
            goal_witness=Witness.from_dict(d["goal_witness"]) if "goal_witness" in d else None,
        )


@dataclass(frozen=True)
class PoseSearchConfig:
    """Knobs shared by the feasibility search and the episode engine."""

    agent_radius: float = 0.2
    agent_height: float = 1.8
    camera_height: float = 1.5
    grasper_radius: float = 0.06
    rest_height: float = 0.8
    height_step: float = 0.07
    height_min: float = 0.3
    height_max: float = 1.5


def search_heights(cfg: PoseSearchConfig) -> list[float]:
    k_lo = math.ceil((cfg.height_min - cfg.rest_height) / cfg.height_step - 1e-9)
    k_hi = math.floor((cfg.height_max - cfg.rest_height) / cfg.height_step + 1e-9)
    return [cfg.rest_height + k * cfg.height_step for k in range(k_lo, k_hi + 1)]


def arm_pose_movers(
    geom: ArmGeometry,
    agent_position: np.ndarray,
    yaw: float,
    height: float,
    wrist_offset: np.ndarray,
    grasper_radius: float,
    grasper_phase: frozenset[str] = frozenset(),
):
    """Arm collision movers for a static pose; None if the offset is out of reach."""
    angles = solve_ik(wrist_offset, geom)
    if angles is None:
        return None
    shoulder = agent_position + vec3(0.0, height, 0.0)
    caps, grasper = arm_capsules(angles, geom, shoulder, yaw, grasper_radius=grasper_radius)
    movers = capsules_to_movers(caps, cause=CAUSE_ARM)
    movers.append(
        MoverPoints(
            pts=np.asarray([grasper.center]),
            radius=grasper.radius,
            cause=CAUSE_ARM,
            phase_through=grasper_phase,
        )
    )
    return movers


# ---------------------------------------------------------------------------
# placement enumeration


def enumerate_locations(
    scene: Scene, category: str, pitch: float = PLACEMENT_PITCH
) -> list[np.ndarray]:
    """Candidate centers on the placement lattice: floor points and static
    tops, non-interpenetrating with everything else in the scene."""
    category_spec(category)  # unknown categories are an error
    obj = scene.object_by_category(category)
    if obj is None:
        return []
    heavy = [o for o in scene.objects if o.mass_class == HEAVY and o.id != obj.id]
    others = [o for o in scene.objects if o.id != obj.id]
    surfaces: list[tuple[float, float, float, float, float]] = [
        (
            float(scene.room_lo[0]),
            float(scene.room_hi[0]),
            float(scene.room_lo[2]),
            float(scene.room_hi[2]),
            scene.floor_y,
        )
    ]
    for s in scene.statics:
        surfaces.append((float(s.lo[0]), float(s.hi[0]), float(s.lo[2]), float(s.hi[2]), float(s.hi[1])))
    out: list[np.ndarray] = []
    hh = obj.half_height
    for xlo, xhi, zlo, zhi, top in surfaces:
        for x in lattice(xlo + 1e-9, xhi - 1e-9, pitch):
            for z in lattice(zlo + 1e-9, zhi - 1e-9, pitch):
                pos = vec3(float(x), top + hh, float(z))
                if object_statics_pen(obj, pos, scene, heavy) > CONTACT_EPS:
                    continue
                if any(object_object_pen(obj, pos, o, o.position) > CONTACT_EPS for o in others):
                    continue
                out.append(pos)
    out.sort(key=lambda p: (float(p[1]), float(p[0]), float(p[2])))
    return out


# ---------------------------------------------------------------------------
# feasibility


def _pose_iter(scene: Scene) -> list[tuple[float, float]]:
    return sorted(scene.spawn_grid)


class _PoseCache:
    """Location-independent validity of poses, computed lazily and shared
    across all candidate locations of one search."""

    def __init__(self, scn: Scene, obj_id: str, cfg: PoseSearchConfig, geom: ArmGeometry):
        self.scn = scn
        self.obj_id = obj_id
        self.cfg = cfg
        self.geom = geom
        self._body: dict[tuple[float, float], bool] = {}
        self._rest: dict[tuple[float, float, float], list | None] = {}

    def body_ok(self, pose: tuple[float, float]) -> bool:
        got = self._body.get(pose)
        if got is None:
            got = agent_clear(
                self.scn,
                vec3(pose[0], self.scn.floor_y, pose[1]),
                self.cfg.agent_radius,
                self.cfg.agent_height,
                exclude=frozenset({self.obj_id}),
            )
            self._body[pose] = got
        return got

    def rest_movers_ok(self, pose: tuple[float, float], yaw: float):
        """Rest-arm movers when that configuration is scene-clear, else None.

        The episode engine resets with the arm at rest, so a witness pose
        must also hold up with the rest configuration.
        """
        key = (pose[0], pose[1], yaw)
        if key not in self._rest:
            movers = arm_pose_movers(
                self.geom,
                vec3(pose[0], self.scn.floor_y, pose[1]),
                yaw,
                self.cfg.rest_height,
                vec3(0.0, 0.0, self.geom.max_reach / 2.0),
                self.cfg.grasper_radius,
                grasper_phase=frozenset({self.obj_id}),
            )
            if movers is not None and not movers_clear(self.scn, movers, held_id=self.obj_id):
                movers = None
            self._rest[key] = movers
        return self._rest[key]


def _witness_at_pose(
    scn: Scene,
    obj: SceneObject,
    location: np.ndarray,
    pose: tuple[float, float],
    cfg: PoseSearchConfig,
    geom: ArmGeometry,
    heights: list[float],
    cache: _PoseCache,
) -> Witness | None:
    """Try yaws, heights, and wrist lifts at one grid position.

    The reach filter relies on rotations preserving the norm: the offset is
    in reach exactly when the world-frame displacement fits the half-ball,
    which the front-half-space and radius prechecks cover. solve_ik still
    re-validates the rotated offset before any movers are built.
    """
    from .collision import MoverVCapsule, mover_object_pen

    x, z = pose
    agent_pos = vec3(x, scn.floor_y, z)
    if not cache.body_ok(pose):
        return None
    body = MoverVCapsule(
        x=x,
        z=z,
        y0=scn.floor_y + cfg.agent_radius,
        y1=scn.floor_y + cfg.agent_height - cfg.agent_radius,
        radius=cfg.agent_radius,
        cause=CAUSE_ARM,
    )
    pen, _ = mover_object_pen(body, obj, location)
    if pen > CONTACT_EPS:
        return None
    camera = agent_pos + vec3(0.0, cfg.camera_height, 0.0)
    if not line_of_sight(scn, camera, location, obj.id):
        return None
    dx = float(location[0]) - x
    dz = float(location[2]) - z
    dxz2 = dx * dx + dz * dz
    reach2 = geom.max_reach * geom.max_reach
    phase = frozenset({obj.id})
    lifts = tuple(obj.half_height + c for c in wrist_clearances(cfg, geom))
    for yaw in YAWS:
        # the wrist target must sit in the agent's front half-space
        if math.sin(yaw) * dx + math.cos(yaw) * dz < 0.0:
            continue
        rest = cache.rest_movers_ok(pose, yaw)
        if rest is None:
            continue
        rest_hits_object = False
        for m in rest:
            if obj.id in m.phase_through:
                continue
            pen, _ = mover_object_pen(m, obj, location)
            if pen > CONTACT_EPS:
                rest_hits_object = True
                break
        if rest_hits_object:
            continue
        for h in heights:
            for lift in lifts:
                target_y = float(location[1]) + lift
                dy = target_y - h
                if dxz2 + dy * dy > reach2 + 1e-12:
                    continue
                target = vec3(float(location[0]), target_y, float(location[2]))
                shoulder = vec3(x, scn.floor_y + h, z)
                offset = world_to_agent(target - shoulder, yaw)
                movers = arm_pose_movers(
                    geom, agent_pos, yaw, h, offset, cfg.grasper_radius, grasper_phase=phase
                )
                if movers is None:
                    continue
                grasper = movers[-1]
                pen, _ = mover_object_pen(
                    MoverPoints(pts=grasper.pts, radius=grasper.radius, cause=CAUSE_ARM),
                    obj,
                    location,
                )
                if pen <= 0.0:
                    continue  # lifted wrist no longer intersects the object
                if movers_clear(scn, movers, held_id=None):
                    return Witness(
                        position=(float(x), float(z)),
                        yaw=float(yaw),
                        arm_height=float(h),
                        wrist_target=tuple(float(v) for v in target),
                    )
    return None


def feasible_locations(
    scene: Scene,
    category: str,
    cfg: PoseSearchConfig = PoseSearchConfig(),
    geom: ArmGeometry = ArmGeometry(),
    exhaustive: bool = False,
    candidates: list[np.ndarray] | None = None,
) -> list[tuple[np.ndarray, Witness]]:
    """Feasible placements with their witness poses.

    The production search prunes grid positions beyond horizontal reach of
    the location; exhaustive=True visits every position (oracle mode).
    Both visit poses in the same order, so they find identical witnesses.
    """
    if candidates is None:
        candidates = enumerate_locations(scene, category)
    instance = scene.object_by_category(category)
    if instance is None:
        return []
    scn = scene.copy()
    obj = scn.object_by_id(instance.id)
    heights = search_heights(cfg)
    poses = _pose_iter(scn)
    cache = _PoseCache(scn, obj.id, cfg, geom)
    out: list[tuple[np.ndarray, Witness]] = []
    for loc in candidates:
        obj.position = as_vec3(loc)
        witness = None
        for pose in poses:
            if not exhaustive:
                dx = float(loc[0]) - pose[0]
                dz = float(loc[2]) - pose[1]
                if dx * dx + dz * dz > (geom.max_reach + 1e-9) ** 2:
                    continue
            witness = _witness_at_pose(scn, obj, as_vec3(loc), pose, cfg, geom, heights, cache)
            if witness is not None:
                break
        if witness is not None:
            out.append((as_vec3(loc), witness))
    return out


def is_feasible(
    scene: Scene,
    category: str,
    location,
    cfg: PoseSearchConfig = PoseSearchConfig(),
    geom: ArmGeometry = ArmGeometry(),
    exhaustive: bool = False,
) -> Witness | None:
    """Witness pose for one location, or None when unreachable."""
    res = feasible_locations(
        scene, category, cfg=cfg, geom=geom, exhaustive=exhaustive, candidates=[as_vec3(location)]
    )
    return res[0][1] if res else None


# ---------------------------------------------------------------------------
# task pairing


def _pair_rng(seed: int, scene_id: str, category: str) -> np.random.Generator:
    key = (zlib.crc32(scene_id.encode()), zlib.crc32(category.encode()))
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=key))


def _rest_movers(
    agent_pos: np.ndarray, yaw: float, cfg: PoseSearchConfig, geom: ArmGeometry, grasper_phase: frozenset[str]
):
    return arm_pose_movers(
        geom,
        agent_pos,
        yaw,
        cfg.rest_height,
        vec3(0.0, 0.0, geom.max_reach / 2.0),
        cfg.grasper_radius,
        grasper_phase=grasper_phase,
    )


def _base_valid_starts(
    scn: Scene, obj: SceneObject, cfg: PoseSearchConfig, geom: ArmGeometry
) -> list[tuple[float, float, float]]:
    """Start poses clear against everything except the task object (which
    moves per task and is re-checked near each initial location)."""
    out = []
    for x, z in _pose_iter(scn):
        pos = vec3(x, scn.floor_y, z)
        if not agent_clear(scn, pos, cfg.agent_radius, cfg.agent_height, exclude=frozenset({obj.id})):
            continue
        for yaw in YAWS:
            movers = _rest_movers(pos, yaw, cfg, geom, grasper_phase=frozenset({obj.id}))
            if movers is not None and movers_clear(scn, movers, held_id=obj.id):
                out.append((float(x), float(z), float(yaw)))
    return out


def _start_clear_of_object(
    agent_pos: np.ndarray,
    yaw: float,
    obj: SceneObject,
    loc: np.ndarray,
    cfg: PoseSearchConfig,
    movers,
) -> bool:
    from .collision import MoverVCapsule, mover_object_pen

    body = MoverVCapsule(
        x=float(agent_pos[0]),
        z=float(agent_pos[2]),
        y0=float(agent_pos[1]) + cfg.agent_radius,
        y1=float(agent_pos[1]) + cfg.agent_height - cfg.agent_radius,
        radius=cfg.agent_radius,
        cause="agent_body",
    )
    pen, _ = mover_object_pen(body, obj, loc)
    if pen > CONTACT_EPS:
        return False
    for m in movers:
        if obj.id in m.phase_through:
            continue
        pen, _ = mover_object_pen(m, obj, loc)
        if pen > CONTACT_EPS:
            return False
    return True


def build_tasks(
    scene: Scene,
    category: str,
    seed: int,
    cfg: PoseSearchConfig = PoseSearchConfig(),
    geom: ArmGeometry = ArmGeometry(),
    feasible: list[tuple[np.ndarray, Witness]] | None = None,
) -> list[TaskSpec]:
    """All ordered pairs of feasible locations, each with a sampled start pose."""
    if feasible is None:
        feasible = feasible_locations(scene, category, cfg=cfg, geom=geom)
    if len(feasible) < 2:
        raise InsufficientLocations(
            f"{scene.id}/{category}: {len(feasible)} feasible locations, need at least 2"
        )
    instance = scene.object_by_category(category)
    rng = _pair_rng(seed, scene.id, category)
    scn = scene.copy()
    obj = scn.object_by_id(instance.id)
    starts = _base_valid_starts(scn, obj, cfg, geom)
    if not starts:
        raise InsufficientLocations(f"{scene.id}/{category}: no valid agent start poses")
    rest_cache: dict[tuple[float, float, float], list] = {}

    def rest_for(x: float, z: float, yaw: float):
        key = (x, z, yaw)
        got = rest_cache.get(key)
        if got is None:
            got = _rest_movers(vec3(x, scn.floor_y, z), yaw, cfg, geom, grasper_phase=frozenset({obj.id}))
            rest_cache[key] = got
        return got

    # beyond this radius neither the body nor the rest arm can touch the object
    near = cfg.agent_radius + geom.max_reach + obj.bounding_radius + cfg.grasper_radius + 0.05
    tasks: list[TaskSpec] = []
    for i, (loc_a, wit_a) in enumerate(feasible):
        for j, (loc_b, wit_b) in enumerate(feasible):
            if i == j:
                continue
            start = None
            for _attempt in range(64):
                x, z, yaw = starts[int(rng.integers(0, len(starts)))]
                pos = vec3(x, scn.floor_y, z)
                if math.hypot(float(loc_a[0]) - x, float(loc_a[2]) - z) > near or _start_clear_of_object(
                    pos, yaw, obj, as_vec3(loc_a), cfg, rest_for(x, z, yaw)
                ):
                    start = (x, float(pos[1]), z, yaw)
                    break
            if start is None:
                continue
            tasks.append(
                TaskSpec(
                    scene_id=scene.id,
                    object_id=instance.id,
                    object_category=category,
                    initial_location=tuple(float(v) for v in loc_a),
                    goal_location=tuple(float(v) for v in loc_b),
                    agent_start=(start[0], start[1], start[2]),
                    agent_yaw=start[3],
                    initial_witness=wit_a,
                    goal_witness=wit_b,
                )
            )
    return tasks


def sample_eval_subset(tasks: list[TaskSpec], n: int, seed: int) -> list[TaskSpec]:
    """min(n, len) tasks drawn uniformly without replacement, order-stable."""
    if n < 1:
        raise ValueError("subset size must be >= 1")
    if len(tasks) <= n:
        return list(tasks)
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(tasks), size=n, replace=False)
    return [tasks[i] for i in sorted(int(v) for v in idx)]


def distance_histogram(tasks: list[TaskSpec], bin_width: float = 0.25) -> dict:
    """Histogram of start-to-goal distances; counts sum to len(tasks)."""
    if not tasks:
        raise ValueError("no tasks to histogram")
    dists = [
        float(np.linalg.norm(np.asarray(t.goal_location) - np.asarray(t.initial_location)))
        for t in tasks
    ]
    n_bins = max(1, int(math.ceil(max(dists) / bin_width - 1e-12)))
    edges = [bin_width * k for k in range(n_bins + 1)]
    counts = [0] * n_bins
    for d in dists:
        k = min(n_bins - 1, int(d / bin_width))
        counts[k] += 1
    return {"bin_width": bin_width, "edges": edges, "counts": counts}


# ---------------------------------------------------------------------------
# splits


@dataclass
class DatasetSplit:
    name: str
    scene_ids: list[str]
    categories: list[str]
    tasks: list[TaskSpec] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": DATASET_SCHEMA_VERSION,
            "name": self.name,
            "scene_ids": list(self.scene_ids),
            "categories": list(self.categories),
            "tasks": [t.to_dict() for t in self.tasks],
        }

    def to_json(self) -> str:
        return canonical_json(self.to_dict())

    @staticmethod
    def from_dict(d: dict) -> "DatasetSplit":
        if d.get("schema_version") != DATASET_SCHEMA_VERSION:
            raise ValueError(f"unsupported dataset schema_version {d.get('schema_version')!r}")
        return DatasetSplit(
            name=d["name"],
            scene_ids=list(d["scene_ids"]),
            categories=list(d["categories"]),
            tasks=[TaskSpec.from_dict(t) for t in d["tasks"]],
        )


def save_split(split: DatasetSplit, path: str | Path) -> None:
    Path(path).write_text(split.to_json() + "\n", encoding="utf-8")


def load_split(path: str | Path) -> DatasetSplit:
    return DatasetSplit.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


@dataclass
class LocationReport:
    """Feasible-location and task counts per category and split."""

    per_split: dict = field(default_factory=dict)  # split -> category -> {...}

    def add(self, split: str, category: str, locations: int, tasks: int) -> None:
        row = self.per_split.setdefault(split, {}).setdefault(
            category, {"locations": 0, "tasks": 0}
        )
        row["locations"] += locations
        row["tasks"] += tasks

    def to_dict(self) -> dict:
        return {"per_split": self.per_split}

    def format_table(self) -> str:
        splits = sorted(self.per_split)
        cats = sorted({c for s in self.per_split.values() for c in s})
        head = f"{'category':<12}" + "".join(f"{s:>24}" for s in splits)
        lines = [head, f"{'':<12}" + "".join(f"{'locs / tasks':>24}" for _ in splits)]
        for c in cats:
            cells = []
            for s in splits:
                row = self.per_split.get(s, {}).get(c)
                cells.append(f"{row['locations']} / {row['tasks']}" if row else "-")
            lines.append(f"{c:<12}" + "".join(f"{cell:>24}" for cell in cells))
        return "\n".join(lines)


def build_splits(
    train_scenes: list[Scene],
    val_scenes: list[Scene],
    test_scenes: list[Scene],
    seen_categories: list[str],
    novel_categories: list[str],
    seed: int,
    eval_subset: int | None = 60,
    cfg: PoseSearchConfig = PoseSearchConfig(),
    geom: ArmGeometry = ArmGeometry(),
) -> tuple[dict[str, DatasetSplit], LocationReport]:
    """Assemble the five dataset splits.

    Train uses training scenes with the seen categories and keeps the full
    task pool; the four evaluation splits subsample eval_subset tasks per
    (scene, category) pair. Novel-category splits never contain a seen
    category, and SeenScenes-NovelObj reuses the training scenes.
    """
    overlap = set(seen_categories) & set(novel_categories)
    if overlap:
        raise ValueError(f"categories in both seen and novel sets: {sorted(overlap)}")
    report = LocationReport()
    out: dict[str, DatasetSplit] = {}
    plan = [
        ("Train", train_scenes, seen_categories, False),
        ("Val", val_scenes, seen_categories, True),
        ("Test-SeenObj", test_scenes, seen_categories, True),
        ("Test-NovelObj", test_scenes, novel_categories, True),
        ("SeenScenes-NovelObj", train_scenes, novel_categories, True),
    ]
    for name, scenes, cats, subsample in plan:
        split = DatasetSplit(
            name=name, scene_ids=[s.id for s in scenes], categories=list(cats)
        )
        for scene in sorted(scenes, key=lambda s: s.id):
            for cat in sorted(cats):
                if scene.object_by_category(cat) is None:
                    continue
                feas = feasible_locations(scene, cat, cfg=cfg, geom=geom)
                if len(feas) < 2:
                    report.add(name, cat, len(feas), 0)
                    continue
                tasks = build_tasks(scene, cat, seed, cfg=cfg, geom=geom, feasible=feas)
                if subsample and eval_subset is not None:
                    sub_rng_seed = int(
                        np.random.SeedSequence(
                            entropy=seed,
                            spawn_key=(zlib.crc32(scene.id.encode()), zlib.crc32(cat.encode()), 1),
                        ).generate_state(1)[0]
                    )
                    tasks = sample_eval_subset(tasks, eval_subset, sub_rng_seed)
                split.tasks.extend(tasks)
                report.add(name, cat, len(feas), len(tasks))
        out[name] = split
    return out, report


def check_split_hygiene(splits: dict[str, DatasetSplit]) -> list[str]:
    """Structure violations across the split family (empty = consistent)."""
    problems = []
    train = splits.get("Train")
    if train is None:
        return ["missing Train split"]
    train_cats = set(train.categories)
    train_scenes = set(train.scene_ids)
    for name in ("Test-NovelObj", "SeenScenes-NovelObj"):
        s = splits.get(name)
        if s is None:
            continue
        bad = train_cats & {t.object_category for t in s.tasks}
        if bad:
            problems.append(f"{name} contains seen categories: {sorted(bad)}")
    sn = splits.get("SeenScenes-NovelObj")
    if sn is not None:
        outside = {t.scene_id for t in sn.tasks} - train_scenes
        if outside:
            problems.append(f"SeenScenes-NovelObj uses non-train scenes: {sorted(outside)}")
    for name in ("Val", "Test-SeenObj", "Test-NovelObj"):
        s = splits.get(name)
        if s is None:
            continue
        shared = {t.scene_id for t in s.tasks} & train_scenes
        if shared:
            problems.append(f"{name} reuses training scenes: {sorted(shared)}")
    return problems
