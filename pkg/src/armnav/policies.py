"""Scripted baseline policies.

The greedy policy is a sanity oracle, not a learner: it reads only the
observation fields a trained agent would get (relative vectors, arm
summary) and never the scene internals. Phase one walks toward the object
and servos the wrist onto it; phase two carries it toward the goal and
lets the auto-success termination end the episode.
"""

from __future__ import annotations

import math

import numpy as np

from .env import Action, Observation
from .geometry import norm, vec3
from .kinematics import ArmGeometry, in_reach, shoulder_frame_region

PHASE_REACH = "ReachObject"
PHASE_CARRY = "Carry"

_WRIST_CODES = {
    (0, 1.0): Action.WRIST_X_PLUS,
    (0, -1.0): Action.WRIST_X_MINUS,
    (1, 1.0): Action.WRIST_Y_PLUS,
    (1, -1.0): Action.WRIST_Y_MINUS,
    (2, 1.0): Action.WRIST_Z_PLUS,
    (2, -1.0): Action.WRIST_Z_MINUS,
}


class GreedyPolicy:
    """Two-phase scripted controller over observations only.

    Navigation walks toward the target until it is within arm engagement
    range (or a move is blocked close enough to reach), then wrist-steps
    along the largest remaining axis error. Grasp fires as soon as the
    grasper could plausibly intersect the object.
    """

    def __init__(
        self,
        approach_tolerance: float = 0.095,
        reach_engage: float = 0.61,
        geom: ArmGeometry = ArmGeometry(),
    ):
        self.approach_tolerance = approach_tolerance
        self.reach_engage = reach_engage
        self.geom = geom
        self.reset()

    def reset(self) -> None:
        self.phase = PHASE_REACH
        self._prev_obs: Observation | None = None
        self._prev_action: int | None = None
        self._failed: set[int] = set()  # actions that no-opped since the last state change
        self._detour = 0

    # -- bookkeeping -----------------------------------------------------

    def _state_changed(self, obs: Observation) -> bool:
        prev = self._prev_obs
        if prev is None:
            return True
        return (
            norm(obs.agent_position - prev.agent_position) > 1e-12
            or abs(obs.agent_yaw - prev.agent_yaw) > 1e-12
            or norm(obs.wrist_offset - prev.wrist_offset) > 1e-12
            or abs(obs.arm_height - prev.arm_height) > 1e-12
            or obs.held != prev.held
        )

    # -- motion pieces -----------------------------------------------------

    def _wrist_step_reachable(self, obs: Observation, axis: int, sign: float) -> bool:
        delta = vec3(0, 0, 0)
        delta[axis] = sign * 0.05
        return in_reach(obs.wrist_offset + delta, shoulder_frame_region(self.geom))

    def _servo(self, obs: Observation, v: np.ndarray) -> int:
        blocked_horizontal = False
        order = sorted(range(3), key=lambda i: -abs(float(v[i])))
        for axis in order:
            err = float(v[axis])
            if abs(err) < 0.025:
                continue
            sign = 1.0 if err > 0 else -1.0
            code = int(_WRIST_CODES[(axis, sign)])
            if code in self._failed:
                if axis != 1:
                    blocked_horizontal = True
                continue
            if not self._wrist_step_reachable(obs, axis, sign):
                if axis == 1:
                    # hemisphere exhausted vertically: ride the arm lift instead
                    lift = Action.HEIGHT_UP if sign > 0 else Action.HEIGHT_DOWN
                    if int(lift) not in self._failed and 0.38 < obs.arm_height + sign * 0.07 < 1.45:
                        return int(lift)
                continue
            return code
        # nothing steppable along the error axes: a close grasp attempt is
        # cheaper than thrashing, otherwise adjust posture
        if not obs.held and norm(v) <= 0.13 and self._prev_action != int(Action.GRASP):
            return int(Action.GRASP)
        if blocked_horizontal and int(Action.HEIGHT_UP) not in self._failed and obs.arm_height < 1.45:
            return int(Action.HEIGHT_UP)  # lift the arm over whatever clipped it
        if float(v[1]) > 0.05 and int(Action.HEIGHT_UP) not in self._failed and obs.arm_height < 1.45:
            return int(Action.HEIGHT_UP)
        if float(v[1]) < -0.05 and int(Action.HEIGHT_DOWN) not in self._failed and obs.arm_height > 0.38:
            return int(Action.HEIGHT_DOWN)
        if abs(float(v[2])) > 0.15 and int(Action.MOVE_AHEAD) not in self._failed:
            return int(Action.MOVE_AHEAD)
        return int(Action.ROTATE_RIGHT)

    def _navigate(self, target_agent: np.ndarray, prev_failed: bool) -> int:
        if prev_failed and self._prev_action == int(Action.MOVE_AHEAD):
            self._detour += 1
            return int(Action.ROTATE_RIGHT)
        if self._detour > 0 and self._prev_action == int(Action.ROTATE_RIGHT):
            return int(Action.MOVE_AHEAD)
        bearing = math.atan2(float(target_agent[0]), float(target_agent[2]))
        if bearing > math.radians(23.0):
            return int(Action.ROTATE_RIGHT)
        if bearing < -math.radians(23.0):
            return int(Action.ROTATE_LEFT)
        return int(Action.MOVE_AHEAD)

    # -- main ----------------------------------------------------------------

    def act(self, obs: Observation) -> int:
        changed = self._state_changed(obs)
        prev_failed = self._prev_action is not None and not changed
        if prev_failed:
            self._failed.add(self._prev_action)
        else:
            self._failed.clear()
            if self._prev_action == int(Action.MOVE_AHEAD):
                self._detour = 0

        self.phase = PHASE_CARRY if obs.held else PHASE_REACH
        v = obs.object_to_goal if obs.held else obs.arm_to_object

        if not obs.held and norm(v) <= self.approach_tolerance:
            action = int(Action.GRASP)
        else:
            wrist_agent = obs.wrist_offset + vec3(0.0, obs.arm_height, 0.0)
            target_agent = wrist_agent + v
            dxz = math.hypot(float(target_agent[0]), float(target_agent[2]))
            if dxz <= self.reach_engage:
                action = self._servo(obs, v)
            elif prev_failed and self._prev_action == int(Action.MOVE_AHEAD) and dxz <= 0.80:
                action = self._servo(obs, v)
            else:
                action = self._navigate(target_agent, prev_failed)

        self._prev_obs = obs
        self._prev_action = action
        return action


class RandomPolicy:
    """Uniform random actions; optionally without DONE (benchmark workloads)."""

    def __init__(self, seed: int = 0, include_done: bool = True):
        self.rng = np.random.default_rng(seed)
        self.codes = [int(a) for a in Action if include_done or a != Action.DONE]

    def reset(self) -> None:
        pass

    def act(self, obs: Observation) -> int:
        return int(self.codes[int(self.rng.integers(0, len(self.codes)))])
