"""Evaluation plumbing: episode loops, dataset replay checks, benchmarks."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .env import Action, EnvConfig, EpisodeFinished, ManipulationEnv, RUNNING, SUCCESS
from .geometry import vec3
from .metrics import EpisodeLog, MetricsReport, aggregate
from .policies import GreedyPolicy, RandomPolicy
from .scene import Scene, StaticBox, SceneObject
from .scenegen import SceneGenParams, generate_scene, spawn_positions
from .tasks import DatasetSplit, TaskSpec


def task_ref(task: TaskSpec, index: int | None = None) -> str:
    tag = f"{task.scene_id}/{task.object_category}"
    return tag if index is None else f"{tag}#{index}"


def episode_log(env: ManipulationEnv, ref: str, reward_sum: float) -> EpisodeLog:
    outcome = "success" if env.outcome == SUCCESS else "failure"
    return EpisodeLog(
        task_ref=ref,
        outcome=outcome,
        steps=env.step_index,
        pickup_step=env.pickup_step,
        disturbance_count=len(env.disturbances),
        reward_sum=reward_sum,
    )


def run_episode(
    env: ManipulationEnv,
    task: TaskSpec,
    scene: Scene,
    policy,
    ref: str = "episode",
) -> EpisodeLog:
    obs = env.reset(task, scene)
    policy.reset()
    reward_sum = 0.0
    while env.outcome == RUNNING:
        obs, terms, done, _info = env.step(policy.act(obs))
        reward_sum += terms.total
    return episode_log(env, ref, reward_sum)


def run_actions(
    env: ManipulationEnv,
    task: TaskSpec,
    scene: Scene,
    actions: list[int],
    ref: str = "scripted",
) -> tuple[EpisodeLog, list[str], list[float]]:
    """Scripted replay; returns the log, per-state hashes (reset included),
    and per-step reward totals. Stops early if the episode terminates."""
    env.reset(task, scene)
    hashes = [env.state_hash()]
    rewards: list[float] = []
    reward_sum = 0.0
    for code in actions:
        if env.outcome != RUNNING:
            break
        _obs, terms, _done, _info = env.step(code)
        hashes.append(env.state_hash())
        rewards.append(terms.total)
        reward_sum += terms.total
    return episode_log(env, ref, reward_sum), hashes, rewards


def run_greedy(task: TaskSpec, scene: Scene, config: EnvConfig = EnvConfig()) -> EpisodeLog:
    env = ManipulationEnv(config)
    return run_episode(env, task, scene, GreedyPolicy(), ref=task_ref(task))


def run_eval(
    split: DatasetSplit,
    scenes: dict[str, Scene],
    policy_name: str = "greedy",
    config: EnvConfig = EnvConfig(),
    seed: int = 0,
) -> tuple[MetricsReport, list[EpisodeLog]]:
    """One episode per task in the split; aggregate at the end."""
    logs: list[EpisodeLog] = []
    env = ManipulationEnv(config)
    for i, task in enumerate(split.tasks):
        if policy_name == "greedy":
            policy = GreedyPolicy()
        elif policy_name == "random":
            policy = RandomPolicy(seed=seed + i)
        else:
            raise ValueError(f"unknown policy {policy_name!r}")
        scene = scenes.get(task.scene_id)
        if scene is None:
            raise KeyError(f"split references scene {task.scene_id!r} not in the store")
        logs.append(run_episode(env, task, scene, policy, ref=task_ref(task, i)))
    return aggregate(logs), logs


# ---------------------------------------------------------------------------
# witness replay


def verify_task_witness(task: TaskSpec, scene: Scene, config: EnvConfig = EnvConfig()) -> tuple[bool, str]:
    """Rebuild the witness pose in the env and confirm the feasibility claim:
    the grasper intersects the object, nothing else is touched, and the
    episode records zero disturbances."""
    w = task.initial_witness
    if w is None:
        return False, "task has no recorded witness"
    probe = TaskSpec(
        scene_id=task.scene_id,
        object_id=task.object_id,
        object_category=task.object_category,
        initial_location=task.initial_location,
        goal_location=task.goal_location,
        agent_start=(w.position[0], scene.floor_y, w.position[1]),
        agent_yaw=w.yaw,
        initial_witness=task.initial_witness,
        goal_witness=task.goal_witness,
    )
    env = ManipulationEnv(config)
    try:
        env.reset(probe, scene)
    except Exception as e:
        return False, f"reset at witness failed: {e}"
    try:
        env.teleport_arm(w.arm_height, vec3(*w.wrist_target))
    except ValueError as e:
        return False, f"arm placement failed: {e}"
    obj = env.scene.object_by_id(task.object_id)
    if not env._grasper_intersects(obj):
        return False, "grasper does not intersect the object from the witness pose"
    if env.disturbances:
        return False, f"{len(env.disturbances)} disturbances during witness replay"
    return True, "ok"


# ---------------------------------------------------------------------------
# constructed clear-path suite


def make_clear_path_suite(n_tasks: int, seed: int = 0) -> list[tuple[TaskSpec, Scene]]:
    """Solvable-by-construction tasks in an empty walled room: the object
    sits on a low table approached head-on from the agent start, and the
    goal is a spot on the open floor, so a straight greedy path always
    exists for both phases."""
    rng = np.random.default_rng(seed)
    out: list[tuple[TaskSpec, Scene]] = []
    for i in range(n_tasks):
        w = d = 6.0
        scene = Scene(
            id=f"suite_{seed}_{i:03d}",
            room_lo=vec3(-w / 2, 0.0, -d / 2),
            room_hi=vec3(w / 2, 2.5, d / 2),
        )
        t = 0.1
        scene.statics.extend(
            [
                StaticBox("wall_xlo", vec3(-w / 2, 0, -d / 2), vec3(-w / 2 + t, 2.5, d / 2)),
                StaticBox("wall_xhi", vec3(w / 2 - t, 0, -d / 2), vec3(w / 2, 2.5, d / 2)),
                StaticBox("wall_zlo", vec3(-w / 2 + t, 0, -d / 2), vec3(w / 2 - t, 2.5, -d / 2 + t)),
                StaticBox("wall_zhi", vec3(-w / 2 + t, 0, d / 2 - t), vec3(w / 2 - t, 2.5, d / 2)),
            ]
        )
        ax = float(rng.uniform(-1.2, -0.6))
        za = float(rng.uniform(0.4, 1.2))
        h_table = 0.6
        scene.statics.append(
            StaticBox("table_a", vec3(ax - 0.25, 0, za - 0.25), vec3(ax + 0.25, h_table, za + 0.25))
        )
        r_obj = 0.04
        obj = SceneObject(
            id="obj_0_Apple",
            category="Apple",
            shape_kind="sphere",
            shape_dims=np.array([r_obj]),
            position=vec3(ax, h_table + r_obj, za),
        )
        scene.objects.append(obj)
        scene.spawn_grid = spawn_positions(scene, 0.25, 0.2, 1.8)
        # head-on approach: start due south of the table, facing it
        start = (ax, 0.0, za - float(rng.uniform(1.2, 1.8)))
        goal = (
            float(rng.uniform(0.6, 1.6)),
            r_obj,
            za - float(rng.uniform(0.6, 1.4)),
        )
        task = TaskSpec(
            scene_id=scene.id,
            object_id=obj.id,
            object_category="Apple",
            initial_location=(ax, h_table + r_obj, za),
            goal_location=goal,
            agent_start=start,
            agent_yaw=0.0,
        )
        out.append((task, scene))
    return out


def make_walled_off_task(seed: int = 0) -> tuple[TaskSpec, Scene]:
    """Unsolvable by construction: the object sits inside a closed static ring."""
    w = d = 6.0
    scene = Scene(
        id=f"ring_{seed}",
        room_lo=vec3(-w / 2, 0.0, -d / 2),
        room_hi=vec3(w / 2, 2.5, d / 2),
    )
    # closed box ring around the object, taller than the arm can reach over
    cx, cz, half, hgt = 1.5, 1.5, 0.6, 2.3
    scene.statics.extend(
        [
            StaticBox("ring_xlo", vec3(cx - half - 0.1, 0, cz - half - 0.1), vec3(cx - half, hgt, cz + half + 0.1)),
            StaticBox("ring_xhi", vec3(cx + half, 0, cz - half - 0.1), vec3(cx + half + 0.1, hgt, cz + half + 0.1)),
            StaticBox("ring_zlo", vec3(cx - half, 0, cz - half - 0.1), vec3(cx + half, hgt, cz - half)),
            StaticBox("ring_zhi", vec3(cx - half, 0, cz + half), vec3(cx + half, hgt, cz + half + 0.1)),
        ]
    )
    obj = SceneObject(
        id="obj_0_Apple",
        category="Apple",
        shape_kind="sphere",
        shape_dims=np.array([0.04]),
        position=vec3(cx, 0.04, cz),
    )
    scene.objects.append(obj)
    scene.spawn_grid = spawn_positions(scene, 0.25, 0.2, 1.8)
    task = TaskSpec(
        scene_id=scene.id,
        object_id=obj.id,
        object_category="Apple",
        initial_location=(cx, 0.04, cz),
        goal_location=(-2.0, 0.04, -2.0),
        agent_start=(-1.0, 0.0, -1.0),
        agent_yaw=0.0,
    )
    return task, scene


# ---------------------------------------------------------------------------
# benchmark


@dataclass(frozen=True)
class BenchResult:
    steps_executed: int
    wall_seconds: float
    steps_per_second: float
    depth_enabled: bool

    def to_dict(self) -> dict:
        return {
            "steps_executed": self.steps_executed,
            "wall_seconds": self.wall_seconds,
            "steps_per_second": self.steps_per_second,
            "depth_enabled": self.depth_enabled,
        }


def _bench_task(scene: Scene) -> TaskSpec:
    obj = next(o for o in scene.objects if o.pickupable)
    x, z = scene.spawn_grid[0]
    goal = (
        float(scene.room_lo[0]) + 0.5,
        scene.floor_y + obj.half_height,
        float(scene.room_lo[2]) + 0.5,
    )
    initial = tuple(float(v) for v in obj.position)
    if tuple(goal) == initial:
        goal = (goal[0] + 0.25, goal[1], goal[2])
    return TaskSpec(
        scene_id=scene.id,
        object_id=obj.id,
        object_category=obj.category,
        initial_location=initial,
        goal_location=goal,
        agent_start=(x, scene.floor_y, z),
        agent_yaw=0.0,
    )


def bench(n_steps: int, config: EnvConfig = EnvConfig(), seed: int = 0) -> BenchResult:
    """Throughput of a seeded random-action workload on one fixed scene.

    The action stream excludes DONE so episodes only end at the step cap
    (the env is reset and the workload continues). Timing covers stepping
    only, not scene generation.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    scene = generate_scene(seed, SceneGenParams())
    task = _bench_task(scene)
    env = ManipulationEnv(config)
    policy = RandomPolicy(seed=seed, include_done=False)
    env.reset(task, scene)
    env.step(int(Action.ROTATE_RIGHT))  # warm caches and the compiled depth kernel
    env.reset(task, scene)
    executed = 0
    t0 = time.perf_counter()
    while executed < n_steps:
        if env.outcome != RUNNING:
            env.reset(task, scene)
        obs = None
        try:
            env.step(policy.act(obs))
        except EpisodeFinished:
            continue
        executed += 1
    wall = time.perf_counter() - t0
    return BenchResult(
        steps_executed=executed,
        wall_seconds=wall,
        steps_per_second=executed / wall if wall > 0 else math.inf,
        depth_enabled=config.depth_enabled,
    )
