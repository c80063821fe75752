"""Episode engine: discrete action space, state transitions, reward, termination.

One env instance owns one episode at a time; all state lives on the
instance and stepping is strictly sequential. Actions that cannot execute
(blocked motion, out-of-reach wrist target, height limit) are
state-preserving no-ops flagged in info; only the step counter advances.

Reward per step is
    r = R_SUCCESS * I_success + R_PICKUP * I_pickup + delta_arm + delta_goal
where the deltas are previous-minus-current distances (positive =
progress), the arm-to-object distance is defined as zero once pickup has
happened, and the indicators fire on the success step and the first
pickup step only. Summed in that fixed order, the goal deltas telescope
to initial-minus-final goal distance exactly.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from .collision import (
    CAUSE_AGENT,
    CAUSE_ARM,
    CAUSE_HELD,
    Mover,
    MoverOBB,
    MoverPoints,
    MoverVCapsule,
    SweepResult,
    apply_pushes,
    movers_clear,
    resolve_motion,
    rotated_plan,
    settle_position,
    translated_plan,
)
from .depth import CameraPose, DepthFrame, raycast_depth
from .geometry import (
    agent_to_world,
    as_vec3,
    norm,
    vec3,
    world_to_agent,
    wrap_angle,
)
from .collision import chain_points
from .kinematics import (
    ArmGeometry,
    in_reach,
    joint_positions_world,
    shoulder_frame_region,
    solve_ik,
)
from .scene import Disturbance, Scene
from .tasks import TaskSpec

R_SUCCESS = 10.0
R_PICKUP = 5.0

RUNNING = "running"
SUCCESS = "success"
FAILURE = "failure"


class Action(IntEnum):
    """Discrete action codes; the integer values are a wire-format contract."""

    MOVE_AHEAD = 0
    ROTATE_RIGHT = 1
    ROTATE_LEFT = 2
    WRIST_X_PLUS = 3
    WRIST_X_MINUS = 4
    WRIST_Y_PLUS = 5
    WRIST_Y_MINUS = 6
    WRIST_Z_PLUS = 7
    WRIST_Z_MINUS = 8
    HEIGHT_UP = 9
    HEIGHT_DOWN = 10
    GRASP = 11
    DONE = 12


ACTION_TABLE = {int(a): a.name for a in Action}

_WRIST_AXES = {
    Action.WRIST_X_PLUS: vec3(1, 0, 0),
    Action.WRIST_X_MINUS: vec3(-1, 0, 0),
    Action.WRIST_Y_PLUS: vec3(0, 1, 0),
    Action.WRIST_Y_MINUS: vec3(0, -1, 0),
    Action.WRIST_Z_PLUS: vec3(0, 0, 1),
    Action.WRIST_Z_MINUS: vec3(0, 0, -1),
}


class EpisodeFinished(Exception):
    pass


class InvalidTask(Exception):
    pass


@dataclass(frozen=True)
class EnvConfig:
    delta_success: float = 0.10
    depth_enabled: bool = False
    depth_resolution: tuple[int, int] = (64, 64)
    grasper_radius: float = 0.06
    max_steps: int = 200
    move_step: float = 0.20
    rotate_step_deg: float = 45.0
    wrist_step: float = 0.05
    height_step: float = 0.07
    height_min: float = 0.3
    height_max: float = 1.5
    rest_height: float = 0.8
    rest_wrist: tuple[float, float, float] = (0.0, 0.0, 0.31675)
    camera_height: float = 1.5
    camera_fov_deg: float = 90.0
    depth_max_range: float = 10.0
    agent_radius: float = 0.2
    agent_height: float = 1.8

    def to_dict(self) -> dict:
        return {
            "delta_success": self.delta_success,
            "depth_enabled": self.depth_enabled,
            "depth_resolution": list(self.depth_resolution),
            "grasper_radius": self.grasper_radius,
            "max_steps": self.max_steps,
        }

    @staticmethod
    def from_dict(d: dict) -> "EnvConfig":
        kwargs = {}
        for key in (
            "delta_success",
            "depth_enabled",
            "grasper_radius",
            "max_steps",
            "move_step",
            "rotate_step_deg",
            "wrist_step",
            "height_step",
            "camera_fov_deg",
            "depth_max_range",
        ):
            if key in d:
                kwargs[key] = d[key]
        if "depth_resolution" in d:
            kwargs["depth_resolution"] = tuple(int(v) for v in d["depth_resolution"])
        return EnvConfig(**kwargs)


def attainable_heights(config: EnvConfig) -> list[float]:
    """Arm heights reachable from the rest height via height steps."""
    k_lo = math.ceil((config.height_min - config.rest_height) / config.height_step - 1e-9)
    k_hi = math.floor((config.height_max - config.rest_height) / config.height_step + 1e-9)
    return [config.rest_height + k * config.height_step for k in range(k_lo, k_hi + 1)]


@dataclass
class ArmState:
    height: float
    wrist_offset: np.ndarray  # relative to the shoulder, agent-frame axes
    grasper_radius: float
    held_object: str | None = None


@dataclass(frozen=True)
class RewardTerms:
    r_success: float
    r_pickup: float
    delta_arm_to_object: float
    delta_object_to_goal: float
    total: float

    def to_dict(self) -> dict:
        return {
            "r_success": self.r_success,
            "r_pickup": self.r_pickup,
            "delta_arm_to_object": self.delta_arm_to_object,
            "delta_object_to_goal": self.delta_object_to_goal,
            "total": self.total,
        }


ZERO_REWARD = RewardTerms(0.0, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class EpisodeSnapshot:
    """Distance/indicator view of the episode state used by compute_reward."""

    d_arm_to_object: float
    d_object_to_goal: float
    pickup_step: int | None
    outcome: str


def compute_reward(prev: EpisodeSnapshot, cur: EpisodeSnapshot) -> RewardTerms:
    """Shaped reward between two consecutive states."""
    i_success = cur.outcome == SUCCESS and prev.outcome == RUNNING
    i_pickup = cur.pickup_step is not None and prev.pickup_step is None
    r_success = R_SUCCESS if i_success else 0.0
    r_pickup = R_PICKUP if i_pickup else 0.0
    d_arm = prev.d_arm_to_object - cur.d_arm_to_object
    d_goal = prev.d_object_to_goal - cur.d_object_to_goal
    total = r_success + r_pickup + d_arm + d_goal
    return RewardTerms(
        r_success=r_success,
        r_pickup=r_pickup,
        delta_arm_to_object=d_arm,
        delta_object_to_goal=d_goal,
        total=total,
    )


@dataclass(frozen=True)
class Observation:
    arm_to_object: np.ndarray  # agent frame, grasper -> object (zeros while held)
    object_to_goal: np.ndarray  # agent frame, object -> goal
    agent_position: np.ndarray
    agent_yaw: float
    arm_height: float
    wrist_offset: np.ndarray
    grasper_radius: float
    held: bool
    step_index: int
    depth: DepthFrame | None = None

    def to_dict(self) -> dict:
        return {
            "arm_to_object": [float(v) for v in self.arm_to_object],
            "object_to_goal": [float(v) for v in self.object_to_goal],
            "agent_position": [float(v) for v in self.agent_position],
            "agent_yaw": float(self.agent_yaw),
            "arm": {
                "height": float(self.arm_height),
                "wrist_offset": [float(v) for v in self.wrist_offset],
                "grasper_radius": float(self.grasper_radius),
            },
            "held": self.held,
            "step_index": self.step_index,
        }


class ManipulationEnv:
    """Single-episode simulator over a scene copy."""

    def __init__(self, config: EnvConfig = EnvConfig()):
        self.config = config
        self.geom = ArmGeometry()
        self.scene: Scene | None = None
        self.task: TaskSpec | None = None
        self.outcome = RUNNING
        self.step_index = 0
        self.pickup_step: int | None = None
        self.disturbances: list[Disturbance] = []
        self.agent_position = vec3(0, 0, 0)
        self.agent_yaw = 0.0
        self.arm = ArmState(
            height=config.rest_height,
            wrist_offset=as_vec3(config.rest_wrist),
            grasper_radius=config.grasper_radius,
        )
        self._d_arm_prev = 0.0
        self._d_goal_prev = 0.0

    # -- geometry ---------------------------------------------------------

    def shoulder_world(self) -> np.ndarray:
        return self.agent_position + vec3(0.0, self.arm.height, 0.0)

    def wrist_world(self) -> np.ndarray:
        return self.shoulder_world() + agent_to_world(self.arm.wrist_offset, self.agent_yaw)

    def _agent_mover(self, pos: np.ndarray) -> MoverVCapsule:
        r = self.config.agent_radius
        return MoverVCapsule(
            x=float(pos[0]),
            z=float(pos[2]),
            y0=float(pos[1]) + r,
            y1=float(pos[1]) + self.config.agent_height - r,
            radius=r,
            cause=CAUSE_AGENT,
        )

    def _joints_world(
        self, pos: np.ndarray, yaw: float, height: float, wrist_offset: np.ndarray
    ) -> np.ndarray:
        angles = solve_ik(wrist_offset, self.geom)
        if angles is None:
            raise ValueError("wrist offset outside the reach region")
        return joint_positions_world(angles, self.geom, pos + vec3(0.0, height, 0.0), yaw)

    def _movers_from_joints(self, joints: np.ndarray) -> list[Mover]:
        shoulder, elbow, wrist = joints[0], joints[1], joints[2]
        r = self.geom.capsule_radius
        phase = frozenset({self.task.object_id}) if self.task else frozenset()
        movers: list[Mover] = [
            MoverPoints(pts=chain_points(shoulder, elbow), radius=r, cause=CAUSE_ARM),
            MoverPoints(pts=chain_points(elbow, wrist), radius=r, cause=CAUSE_ARM),
            MoverPoints(
                pts=wrist[None, :].copy(),
                radius=self.arm.grasper_radius,
                cause=CAUSE_ARM,
                phase_through=phase,
            ),
        ]
        if self.arm.held_object is not None:
            obj = self.scene.object_by_id(self.arm.held_object)
            if obj.shape_kind == "sphere":
                movers.append(
                    MoverPoints(
                        pts=wrist[None, :].copy(),
                        radius=float(obj.shape_dims[0]),
                        cause=CAUSE_HELD,
                        grace=True,
                    )
                )
            else:
                movers.append(
                    MoverOBB(
                        center=wrist.copy(),
                        yaw=obj.yaw,
                        half=obj.shape_dims,
                        cause=CAUSE_HELD,
                        grace=True,
                    )
                )
        return movers

    def _arm_movers(
        self,
        pos: np.ndarray,
        yaw: float,
        height: float,
        wrist_offset: np.ndarray,
    ) -> list[Mover]:
        return self._movers_from_joints(self._joints_world(pos, yaw, height, wrist_offset))

    # -- lifecycle ---------------------------------------------------------

    def reset(self, task: TaskSpec, scene: Scene) -> Observation:
        """Load a task onto a private copy of the scene."""
        if scene.id != task.scene_id:
            raise InvalidTask(f"task wants scene {task.scene_id!r}, got {scene.id!r}")
        try:
            template = scene.object_by_id(task.object_id)
        except KeyError as e:
            raise InvalidTask(str(e)) from None
        if template.category != task.object_category:
            raise InvalidTask(
                f"object {task.object_id} is a {template.category}, task says {task.object_category}"
            )
        if not template.pickupable:
            raise InvalidTask(f"object {task.object_id} is not pickupable")

        self.scene = scene.copy()
        self.scene.objects.sort(key=lambda o: o.id)
        self.task = task
        obj = self.scene.object_by_id(task.object_id)
        obj.position = as_vec3(task.initial_location)
        self._task_obj = obj
        self._goal = as_vec3(task.goal_location)
        self._ids_blob = "|".join(
            [self.scene.id, task.object_id] + [o.id for o in self.scene.objects]
        ).encode("utf-8")

        from .collision import object_object_pen, object_statics_pen
        from .geometry import CONTACT_EPS

        heavy = [o for o in self.scene.objects if o.mass_class == "heavy" and o.id != obj.id]
        if object_statics_pen(obj, obj.position, self.scene, heavy) > CONTACT_EPS:
            raise InvalidTask("initial location penetrates a static")
        for other in self.scene.objects:
            if other.id != obj.id and object_object_pen(obj, obj.position, other, other.position) > CONTACT_EPS:
                raise InvalidTask(f"initial location penetrates object {other.id}")

        self.agent_position = vec3(task.agent_start[0], self.scene.floor_y, task.agent_start[2])
        self.agent_yaw = float(task.agent_yaw)
        self.arm = ArmState(
            height=self.config.rest_height,
            wrist_offset=as_vec3(self.config.rest_wrist),
            grasper_radius=self.config.grasper_radius,
        )
        movers = [self._agent_mover(self.agent_position)]
        movers += self._arm_movers(
            self.agent_position, self.agent_yaw, self.arm.height, self.arm.wrist_offset
        )
        if not movers_clear(self.scene, movers):
            raise InvalidTask("agent start pose collides")

        self.outcome = RUNNING
        self.step_index = 0
        self.pickup_step = None
        self.disturbances = []
        self._d_arm_prev = self._d_arm()
        self._d_goal_prev = self._d_goal()
        return self.observe()

    # -- distances ---------------------------------------------------------

    def _object(self):
        return self._task_obj

    def _d_arm(self) -> float:
        if self.pickup_step is not None:
            return 0.0
        return norm(self._task_obj.position - self.wrist_world())

    def _d_goal(self) -> float:
        return norm(self._goal - self._task_obj.position)

    def snapshot(self) -> EpisodeSnapshot:
        return EpisodeSnapshot(
            d_arm_to_object=self._d_arm(),
            d_object_to_goal=self._d_goal(),
            pickup_step=self.pickup_step,
            outcome=self.outcome,
        )

    # -- stepping ----------------------------------------------------------

    def step(self, action: int) -> tuple[Observation, RewardTerms, bool, dict]:
        if self.scene is None:
            raise RuntimeError("reset the env before stepping")
        if self.outcome != RUNNING:
            raise EpisodeFinished(f"episode already ended with {self.outcome}")
        act = Action(action)
        idx = self.step_index + 1
        prev = EpisodeSnapshot(self._d_arm_prev, self._d_goal_prev, self.pickup_step, RUNNING)
        info: dict = {"action": int(act), "action_success": True, "reason": None, "pushed": []}

        if act == Action.MOVE_AHEAD:
            self._do_move(idx, info)
        elif act in (Action.ROTATE_RIGHT, Action.ROTATE_LEFT):
            sign = 1.0 if act == Action.ROTATE_RIGHT else -1.0
            self._do_rotate(sign * math.radians(self.config.rotate_step_deg), idx, info)
        elif act in _WRIST_AXES:
            self._do_wrist(_WRIST_AXES[act] * self.config.wrist_step, idx, info)
        elif act in (Action.HEIGHT_UP, Action.HEIGHT_DOWN):
            sign = 1.0 if act == Action.HEIGHT_UP else -1.0
            self._do_height(sign * self.config.height_step, idx, info)
        elif act == Action.GRASP:
            self._do_grasp(idx, info)
        elif act == Action.DONE:
            self._do_done(info)

        self.step_index = idx
        if self.outcome == RUNNING and act != Action.DONE:
            if self.pickup_step is not None and self._d_goal() <= self.config.delta_success:
                self.outcome = SUCCESS
                self._release_held()
            elif idx >= self.config.max_steps:
                self.outcome = FAILURE

        cur = self.snapshot()
        terms = compute_reward(prev, cur)
        self._d_arm_prev = cur.d_arm_to_object
        self._d_goal_prev = cur.d_object_to_goal
        done = self.outcome != RUNNING
        info["outcome"] = self.outcome
        info["pickup_step"] = self.pickup_step
        info["disturbance_count"] = len(self.disturbances)
        info["state_hash"] = self.state_hash()
        return self.observe(), terms, done, info

    def _fail(self, info: dict, reason: str) -> None:
        info["action_success"] = False
        info["reason"] = reason

    def _commit_pushes(self, result: SweepResult, idx: int, info: dict) -> None:
        if result.status != "pushes":
            return
        records = apply_pushes(self.scene, result.pushes, step_index=idx)
        for rec in records:
            if rec.object_id != self.task.object_id:
                self.disturbances.append(rec)
            info["pushed"].append(rec.object_id)

    def _sync_held(self) -> None:
        if self.arm.held_object is not None:
            self.scene.object_by_id(self.arm.held_object).position = self.wrist_world()

    def _do_move(self, idx: int, info: dict) -> None:
        delta = self.config.move_step * agent_to_world(vec3(0, 0, 1), self.agent_yaw)
        base: list[Mover] = [self._agent_mover(self.agent_position)]
        base += self._arm_movers(
            self.agent_position, self.agent_yaw, self.arm.height, self.arm.wrist_offset
        )
        n = max(1, int(math.ceil(self.config.move_step / 0.01)))
        deltas = delta[None, :] * (np.arange(n + 1, dtype=np.float64) / n)[:, None]
        plan = translated_plan(base, deltas)
        result = resolve_motion(self.scene, plan, held_id=self.arm.held_object)
        if result.is_blocked:
            self._fail(info, "blocked")
            return
        self.agent_position = self.agent_position + delta
        self._sync_held()
        self._commit_pushes(result, idx, info)

    def _do_rotate(self, dyaw: float, idx: int, info: dict) -> None:
        base = self._arm_movers(
            self.agent_position, self.agent_yaw, self.arm.height, self.arm.wrist_offset
        )
        r_max = 0.0
        for m in base:
            if isinstance(m, MoverPoints):
                d = m.pts - self.agent_position[None, :]
                r_max = max(r_max, float(np.max(np.hypot(d[:, 0], d[:, 2]))) + m.radius)
            elif isinstance(m, MoverOBB):
                d = m.center - self.agent_position
                r_max = max(
                    r_max,
                    math.hypot(float(d[0]), float(d[2]))
                    + math.hypot(float(m.half[0]), float(m.half[2])),
                )
        n = max(1, int(math.ceil(r_max * abs(dyaw) / 0.01)))
        angles = dyaw * (np.arange(n + 1, dtype=np.float64) / n)
        plan = rotated_plan(base, self.agent_position, angles)
        result = resolve_motion(self.scene, plan, held_id=self.arm.held_object)
        if result.is_blocked:
            self._fail(info, "blocked")
            return
        self.agent_yaw = wrap_angle(self.agent_yaw + dyaw)
        if self.arm.held_object is not None:
            obj = self.scene.object_by_id(self.arm.held_object)
            obj.yaw = wrap_angle(obj.yaw + dyaw)
        self._sync_held()
        self._commit_pushes(result, idx, info)

    def _refined_arm_plan(self, off0, off1, h0, h1) -> list[list[Mover]]:
        """Sample the wrist path finely enough that no arm point jumps > 1 cm.

        Chain points are convex combinations of the joint positions, so the
        per-sample joint displacement bounds every chain point displacement.
        """
        dist = max(norm(off1 - off0), abs(h1 - h0))
        n = max(1, int(math.ceil(dist / 0.01)))
        joints: list[np.ndarray] = []
        for _ in range(6):
            ts = [k / n for k in range(n + 1)]
            joints = [
                self._joints_world(
                    self.agent_position,
                    self.agent_yaw,
                    h0 + (h1 - h0) * t,
                    off0 + (off1 - off0) * t,
                )
                for t in ts
            ]
            worst = 0.0
            for a, b in zip(joints, joints[1:]):
                d = b - a
                worst = max(worst, float(np.max(np.sqrt(np.sum(d * d, axis=1)))))
            if worst <= 0.0101:
                break
            n *= 2
        return [self._movers_from_joints(j) for j in joints]

    def _do_wrist(self, delta: np.ndarray, idx: int, info: dict) -> None:
        new_offset = self.arm.wrist_offset + delta
        if not in_reach(new_offset, shoulder_frame_region(self.geom)):
            self._fail(info, "out_of_reach")
            return
        plan = self._refined_arm_plan(
            self.arm.wrist_offset, new_offset, self.arm.height, self.arm.height
        )
        result = resolve_motion(self.scene, plan, held_id=self.arm.held_object)
        if result.is_blocked:
            self._fail(info, "blocked")
            return
        self.arm.wrist_offset = new_offset
        self._sync_held()
        self._commit_pushes(result, idx, info)

    def _do_height(self, delta: float, idx: int, info: dict) -> None:
        new_h = self.arm.height + delta
        if new_h < self.config.height_min - 1e-9 or new_h > self.config.height_max + 1e-9:
            self._fail(info, "height_limit")
            return
        base = self._arm_movers(
            self.agent_position, self.agent_yaw, self.arm.height, self.arm.wrist_offset
        )
        n = max(1, int(math.ceil(abs(delta) / 0.01)))
        deltas = np.zeros((n + 1, 3))
        deltas[:, 1] = delta * (np.arange(n + 1, dtype=np.float64) / n)
        plan = translated_plan(base, deltas)
        result = resolve_motion(self.scene, plan, held_id=self.arm.held_object)
        if result.is_blocked:
            self._fail(info, "blocked")
            return
        self.arm.height = new_h
        self._sync_held()
        self._commit_pushes(result, idx, info)

    def _grasper_intersects(self, obj) -> bool:
        from .collision import mover_object_pen

        grasper = MoverPoints(
            pts=np.asarray([self.wrist_world()]),
            radius=self.arm.grasper_radius,
            cause=CAUSE_ARM,
        )
        pen, _ = mover_object_pen(grasper, obj, obj.position)
        return pen > 0.0

    def _do_grasp(self, idx: int, info: dict) -> None:
        if self.arm.held_object is not None:
            self._fail(info, "already_holding")
            return
        obj = self._object()
        if not self._grasper_intersects(obj):
            self._fail(info, "no_intersection")
            return
        self.arm.held_object = obj.id
        obj.position = self.wrist_world()
        if self.pickup_step is None:
            self.pickup_step = idx

    def _release_held(self) -> None:
        if self.arm.held_object is None:
            return
        obj = self.scene.object_by_id(self.arm.held_object)
        obj.position = settle_position(self.scene, obj, self.wrist_world())
        self.arm.held_object = None

    def _do_done(self, info: dict) -> None:
        self._release_held()
        if self.pickup_step is not None and self._d_goal() <= self.config.delta_success:
            self.outcome = SUCCESS
        else:
            self.outcome = FAILURE

    # -- out-of-band commands (protocol) ------------------------------------

    def drop(self) -> None:
        """Release the held object without consuming a step."""
        if self.outcome != RUNNING:
            raise EpisodeFinished(f"episode already ended with {self.outcome}")
        self._release_held()
        if self.pickup_step is not None and self._d_goal() <= self.config.delta_success:
            self.outcome = SUCCESS
        self._d_arm_prev = self._d_arm()
        self._d_goal_prev = self._d_goal()

    def set_grasper_radius(self, radius: float) -> None:
        if radius <= 0.0:
            raise ValueError("grasper radius must be positive")
        old = self.arm.grasper_radius
        self.arm.grasper_radius = float(radius)
        if self.scene is not None and self.task is not None:
            movers = self._arm_movers(
                self.agent_position, self.agent_yaw, self.arm.height, self.arm.wrist_offset
            )
            if not movers_clear(self.scene, movers, held_id=self.arm.held_object):
                self.arm.grasper_radius = old
                raise ValueError("new grasper radius would collide")

    def teleport_arm(self, height: float, wrist_world_target) -> None:
        """Place the arm directly (validation only, no sweep). Test/replay aid."""
        target = as_vec3(wrist_world_target)
        shoulder = self.agent_position + vec3(0.0, height, 0.0)
        offset = world_to_agent(target - shoulder, self.agent_yaw)
        if not in_reach(offset, shoulder_frame_region(self.geom)):
            raise ValueError("wrist target outside the reach region")
        movers = self._arm_movers(self.agent_position, self.agent_yaw, height, offset)
        allow = {self.task.object_id: frozenset({CAUSE_ARM})} if self.task else None
        if not movers_clear(self.scene, movers, held_id=self.arm.held_object, allow_contact=allow):
            raise ValueError("arm placement collides")
        self.arm.height = float(height)
        self.arm.wrist_offset = offset
        self._sync_held()
        self._d_arm_prev = self._d_arm()
        self._d_goal_prev = self._d_goal()

    # -- observation & hashing ----------------------------------------------

    def observe(self) -> Observation:
        obj = self._object()
        wrist = self.wrist_world()
        if self.arm.held_object is not None:
            arm_to_object = vec3(0.0, 0.0, 0.0)
        else:
            arm_to_object = world_to_agent(obj.position - wrist, self.agent_yaw)
        object_to_goal = world_to_agent(
            as_vec3(self.task.goal_location) - obj.position, self.agent_yaw
        )
        depth = None
        if self.config.depth_enabled:
            cam = CameraPose(
                position=self.agent_position + vec3(0.0, self.config.camera_height, 0.0),
                yaw=self.agent_yaw,
            )
            w, h = self.config.depth_resolution
            depth = raycast_depth(
                self.scene,
                cam,
                width=w,
                height=h,
                fov_deg=self.config.camera_fov_deg,
                max_range=self.config.depth_max_range,
            )
        return Observation(
            arm_to_object=arm_to_object,
            object_to_goal=object_to_goal,
            agent_position=self.agent_position.copy(),
            agent_yaw=self.agent_yaw,
            arm_height=self.arm.height,
            wrist_offset=self.arm.wrist_offset.copy(),
            grasper_radius=self.arm.grasper_radius,
            held=self.arm.held_object is not None,
            step_index=self.step_index,
            depth=depth,
        )

    def state_hash(self) -> str:
        """SHA-256 over the full mutable episode state, exact float bits."""
        if self.scene is None:
            return hashlib.sha256(b"uninitialized").hexdigest()
        objs = self.scene.objects  # sorted by id at reset
        data = np.empty(9 + 4 * len(objs), dtype=np.float64)
        data[0:3] = self.agent_position
        data[3] = self.agent_yaw
        data[4] = self.arm.height
        data[5:8] = self.arm.wrist_offset
        data[8] = self.arm.grasper_radius
        for i, o in enumerate(objs):
            base = 9 + 4 * i
            data[base : base + 3] = o.position
            data[base + 3] = o.yaw
        h = hashlib.sha256()
        h.update(self._ids_blob)
        h.update((self.arm.held_object or "").encode("utf-8"))
        h.update(self.outcome.encode("utf-8"))
        h.update(data.tobytes())
        tail = (
            self.step_index,
            -1 if self.pickup_step is None else self.pickup_step,
            len(self.disturbances),
        )
        h.update(repr(tail).encode("utf-8"))
        return h.hexdigest()
