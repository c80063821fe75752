from __future__ import annotations

import math

import numpy as np
import pytest

from armnav.collision import (
    CAUSE_AGENT,
    Push,
    apply_pushes,
    chain_points,
    object_statics_pen,
    resolve_motion,
    settle_position,
    sweep_agent,
    sweep_arm,
)
from armnav.geometry import CONTACT_EPS, vec3
from armnav.kinematics import Capsule
from armnav.scene import Scene, SceneObject, StaticBox, load_scene, save_scene, validate_scene
from armnav.scenegen import GenerationFailed, SceneGenParams, generate_scene
from conftest import add_box_obj, add_sphere, finish_scene, walled_room
from oracles import resolve_motion_oracle


class TestSceneGeneration:
    def test_same_seed_byte_identical(self):
        a = generate_scene(42)
        b = generate_scene(42)
        assert a.to_json() == b.to_json()

    def test_zero_statics_gives_empty_list_and_full_grid(self):
        params = SceneGenParams(
            walls=False,
            n_statics=(0, 0),
            n_objects=(0, 0),
            n_clutter=(0, 0),
            room_w=(4.0, 4.0),
            room_d=(4.0, 4.0),
        )
        scene = generate_scene(1, params)
        assert scene.statics == []
        # every lattice point within the agent-radius margin is spawnable
        from armnav.scenegen import lattice

        xs = lattice(-2.0 + 0.2, 2.0 - 0.2, 0.25)
        assert len(scene.spawn_grid) == len(xs) ** 2

    @pytest.mark.parametrize("seed", range(0, 100, 7))
    def test_random_seeds_satisfy_invariants(self, seed):
        scene = generate_scene(seed)
        assert validate_scene(scene) == []
        assert scene.spawn_grid

    def test_exhausted_attempts_raise(self):
        # a room too small for the agent footprint can never offer a spawn
        params = SceneGenParams(
            room_w=(0.3, 0.3), room_d=(0.3, 0.3), n_statics=(0, 0), n_objects=(0, 0),
            n_clutter=(0, 0), max_attempts=3,
        )
        with pytest.raises(GenerationFailed) as exc:
            generate_scene(0, params)
        assert exc.value.attempts == 3

    def test_roundtrip_file(self, tmp_path):
        scene = generate_scene(3)
        p = tmp_path / "scene.json"
        save_scene(scene, p)
        again = load_scene(p)
        assert again.to_json() == scene.to_json()


class TestSweepAgent:
    def test_empty_room_step_clear(self, empty_room):
        res = sweep_agent(empty_room, 0.2, vec3(0, 0, 0), vec3(0, 0, 0.2))
        assert res.is_clear

    def test_step_into_wall_blocked(self, empty_room):
        res = sweep_agent(empty_room, 0.2, vec3(2.0, 0, 0), vec3(2.4, 0, 0))
        assert res.is_blocked

    def test_graze_pushes_light_mug(self):
        scene = finish_scene(walled_room())
        mug = add_box_obj(scene, "mug", "Mug", (0.3, 0.05, 0.6), (0.045, 0.05, 0.045))
        res = sweep_agent(scene, 0.2, vec3(0.3, 0, 0.2), vec3(0.3, 0, 0.7))
        assert res.status == "pushes"
        assert [p.object_id for p in res.pushes] == ["mug"]
        assert res.pushes[0].cause == CAUSE_AGENT
        # push is horizontal, away from the agent path
        disp = res.pushes[0].displacement
        assert disp[1] == 0.0
        assert float(disp[2]) > 0.0
        # the sweep itself must not mutate the scene
        assert np.allclose(mug.position, vec3(0.3, 0.05, 0.6))

    def test_heavy_object_blocks(self):
        scene = finish_scene(walled_room())
        add_box_obj(scene, "st", "Statue", (0.0, 0.12, 0.6), (0.05, 0.12, 0.05), mass_class="heavy")
        res = sweep_agent(scene, 0.2, vec3(0, 0, 0.2), vec3(0, 0, 0.6))
        assert res.is_blocked


class TestSweepArm:
    def _caps(self, a, b, r=0.04):
        return [Capsule(a=vec3(*a), b=vec3(*b), radius=r)]

    def test_retracted_clear(self, empty_room):
        res = sweep_arm(
            empty_room,
            self._caps((0, 0.8, 0.0), (0, 0.8, 0.3)),
            self._caps((0, 0.8, 0.0), (0, 0.8, 0.35)),
        )
        assert res.is_clear

    def test_wrist_into_shelf_blocked(self):
        scene = finish_scene(walled_room())
        scene.statics.append(StaticBox("shelf", vec3(-0.4, 0.7, 0.5), vec3(0.4, 0.78, 0.9)))
        res = sweep_arm(
            scene,
            self._caps((0, 0.75, 0.0), (0, 0.75, 0.3)),
            self._caps((0, 0.75, 0.0), (0, 0.75, 0.55)),
        )
        assert res.is_blocked

    def test_wrist_through_tomato_pushes(self):
        scene = finish_scene(walled_room())
        add_sphere(scene, "tomato", "Tomato", (0.0, 0.8, 0.5), radius=0.042)
        res = sweep_arm(
            scene,
            self._caps((0, 0.8, 0.0), (0, 0.8, 0.3)),
            self._caps((0, 0.8, 0.0), (0, 0.8, 0.52)),
        )
        assert res.status == "pushes"
        assert res.pushes[0].object_id == "tomato"

    def test_capsule_list_mismatch_raises(self, empty_room):
        with pytest.raises(ValueError):
            sweep_arm(empty_room, self._caps((0, 0.8, 0), (0, 0.8, 0.3)), [])

    def test_phase_through_skips_object(self):
        scene = finish_scene(walled_room())
        add_sphere(scene, "apple", "Apple", (0.0, 0.8, 0.5), radius=0.04)
        frm = self._caps((0, 0.8, 0.45), (0, 0.8, 0.45), r=0.06)
        to = self._caps((0, 0.8, 0.5), (0, 0.8, 0.5), r=0.06)
        blocked_or_push = sweep_arm(scene, frm, to)
        assert blocked_or_push.status == "pushes"
        res = sweep_arm(scene, frm, to, phase_through=frozenset({"apple"}))
        assert res.is_clear


class TestApplyPushes:
    def test_empty_list_no_change(self, empty_room):
        before = [o.position.copy() for o in empty_room.objects]
        out = apply_pushes(empty_room, [])
        assert out == []
        for o, p in zip(empty_room.objects, before):
            assert np.array_equal(o.position, p)

    def test_push_into_wall_clamps_to_contact(self):
        scene = finish_scene(walled_room())
        apple = add_sphere(scene, "apple", "Apple", (2.0, 0.04, 0.0), radius=0.04)
        # request an embedding displacement straight into the +x wall at x=2.4
        out = apply_pushes(scene, [Push("apple", vec3(1.0, 0.0, 0.0), CAUSE_AGENT)], step_index=4)
        assert len(out) == 1
        assert out[0].step_index == 4
        # clamped to touch the wall: center at wall_face - radius
        assert apple.position[0] == pytest.approx(2.4 - 0.04, abs=1e-6)
        assert object_statics_pen(apple, apple.position, scene, []) <= CONTACT_EPS

    def test_two_pushes_same_step_share_index(self):
        scene = finish_scene(walled_room())
        add_sphere(scene, "a", "Apple", (0.5, 0.04, 0.0))
        add_sphere(scene, "b", "Tomato", (-0.5, 0.042, 0.0), radius=0.042)
        out = apply_pushes(
            scene,
            [Push("a", vec3(0.1, 0, 0), CAUSE_AGENT), Push("b", vec3(0.1, 0, 0), CAUSE_AGENT)],
            step_index=9,
        )
        assert [d.step_index for d in out] == [9, 9]

    def test_pushed_off_table_settles_to_floor(self):
        scene = finish_scene(walled_room())
        scene.statics.append(StaticBox("table", vec3(-0.3, 0, -0.3), vec3(0.3, 0.6, 0.3)))
        apple = add_sphere(scene, "apple", "Apple", (0.25, 0.64, 0.0), radius=0.04)
        apply_pushes(scene, [Push("apple", vec3(0.3, 0, 0), CAUSE_AGENT)])
        assert apple.position[1] == pytest.approx(0.04, abs=1e-9)
        assert apple.position[0] == pytest.approx(0.55, abs=1e-9)


class TestSettle:
    def test_settles_on_highest_support(self):
        scene = walled_room()
        scene.statics.append(StaticBox("table", vec3(-0.3, 0, -0.3), vec3(0.3, 0.6, 0.3)))
        obj = add_sphere(scene, "apple", "Apple", (0.0, 1.2, 0.0), radius=0.04)
        pos = settle_position(scene, obj, obj.position)
        assert pos[1] == pytest.approx(0.64, abs=1e-12)

    def test_never_lifts(self):
        scene = walled_room()
        obj = add_sphere(scene, "apple", "Apple", (0.0, 0.04, 0.0), radius=0.04)
        pos = settle_position(scene, obj, obj.position)
        assert pos[1] == obj.position[1]

    def test_stacks_on_other_object(self):
        scene = walled_room()
        add_box_obj(scene, "pot", "Pot", (0.0, 0.065, 0.0), (0.12, 0.065, 0.12))
        apple = add_sphere(scene, "apple", "Apple", (0.0, 0.8, 0.0), radius=0.04)
        pos = settle_position(scene, apple, apple.position)
        assert pos[1] == pytest.approx(0.13 + 0.04, abs=1e-12)


def random_scene(rng: np.random.Generator) -> Scene:
    from armnav.collision import object_object_pen

    scene = walled_room(w=float(rng.uniform(3.0, 4.5)), d=float(rng.uniform(3.0, 4.5)))
    for i in range(int(rng.integers(1, 4))):
        cx = float(rng.uniform(-1.0, 1.0))
        cz = float(rng.uniform(-1.0, 1.0))
        sx = float(rng.uniform(0.15, 0.5))
        sz = float(rng.uniform(0.15, 0.5))
        y1 = float(rng.uniform(0.3, 1.0))
        scene.statics.append(StaticBox(f"s{i}", vec3(cx - sx, 0, cz - sz), vec3(cx + sx, y1, cz + sz)))
    heavy: list[SceneObject] = []
    for i in range(int(rng.integers(1, 5))):
        kind = rng.choice(["sphere", "box"])
        mass = "heavy" if rng.uniform() < 0.2 else "light"
        if kind == "sphere":
            r = float(rng.uniform(0.03, 0.08))
            obj = SceneObject(
                id=f"o{i}", category="Apple", shape_kind="sphere", shape_dims=np.array([r]),
                position=vec3(0, 0, 0), mass_class=mass,
            )
        else:
            h = np.array([rng.uniform(0.03, 0.1), rng.uniform(0.03, 0.1), rng.uniform(0.03, 0.1)])
            obj = SceneObject(
                id=f"o{i}", category="Mug", shape_kind="box", shape_dims=h,
                position=vec3(0, 0, 0), yaw=float(rng.uniform(0, 2 * math.pi)), mass_class=mass,
            )
        for _try in range(30):
            pos = vec3(
                float(rng.uniform(-1.5, 1.5)),
                obj.half_height + float(rng.uniform(0, 0.5)),
                float(rng.uniform(-1.5, 1.5)),
            )
            if object_statics_pen(obj, pos, scene, heavy) > 1e-9:
                continue
            if any(object_object_pen(obj, pos, o, o.position) > 1e-9 for o in scene.objects):
                continue
            obj.position = pos
            scene.objects.append(obj)
            if mass == "heavy":
                heavy.append(obj)
            break
    return scene


def random_motion_plan(scene: Scene, rng: np.random.Generator):
    """A random agent translation or arm sweep expressed as a mover plan.

    Half the motions are aimed at the vicinity of a random object so
    pushes and squeezes actually occur.
    """
    from armnav.collision import MoverVCapsule, capsules_to_movers

    target = None
    if scene.objects and rng.uniform() < 0.6:
        target = scene.objects[int(rng.integers(0, len(scene.objects)))]

    if rng.uniform() < 0.5:
        if target is not None:
            toward = rng.uniform(-1.0, 1.0, 3)
            toward[1] = 0.0
            nrm = float(np.linalg.norm(toward)) or 1.0
            frm = vec3(
                float(target.position[0]) - 0.45 * toward[0] / nrm,
                0.0,
                float(target.position[2]) - 0.45 * toward[2] / nrm,
            )
            delta = vec3(0.3 * toward[0] / nrm, 0.0, 0.3 * toward[2] / nrm)
        else:
            frm = vec3(float(rng.uniform(-1.2, 1.2)), 0.0, float(rng.uniform(-1.2, 1.2)))
            delta = vec3(float(rng.uniform(-0.25, 0.25)), 0.0, float(rng.uniform(-0.25, 0.25)))
        dist = float(np.linalg.norm(delta))
        n = max(1, int(math.ceil(dist / 0.01 - 1e-12)))
        plan = []
        for k in range(n + 1):
            p = frm + delta * (k / n)
            plan.append([
                MoverVCapsule(x=float(p[0]), z=float(p[2]), y0=0.2, y1=1.6, radius=0.2, cause="agent_body")
            ])
        return plan

    if target is not None:
        away = rng.uniform(-1.0, 1.0, 3)
        nrm = float(np.linalg.norm(away)) or 1.0
        a0 = vec3(*(np.asarray(target.position) + 0.25 * away / nrm))
        a0[1] = max(0.1, float(a0[1]))
        b0 = a0 + vec3(float(rng.uniform(-0.2, 0.2)), float(rng.uniform(-0.2, 0.2)), float(rng.uniform(-0.2, 0.2)))
        shift = vec3(*(np.asarray(target.position) - np.asarray(a0))) * float(rng.uniform(0.4, 1.2))
        shift[1] *= 0.3  # mostly horizontal approach
    else:
        a0 = vec3(float(rng.uniform(-1.0, 1.0)), float(rng.uniform(0.4, 1.2)), float(rng.uniform(-1.0, 1.0)))
        b0 = a0 + vec3(float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-0.3, 0.3)), float(rng.uniform(-0.3, 0.3)))
        shift = vec3(float(rng.uniform(-0.1, 0.1)), float(rng.uniform(-0.1, 0.1)), float(rng.uniform(-0.1, 0.1)))
    caps_from = [Capsule(a=a0, b=b0, radius=0.04)]
    caps_to = [Capsule(a=a0 + shift, b=b0 + shift, radius=0.04)]
    dist = float(np.linalg.norm(shift))
    n = max(1, int(math.ceil(dist / 0.01 - 1e-12)))
    plan = []
    for k in range(n + 1):
        t = k / n
        caps = [Capsule(a=ca.a * (1 - t) + cb.a * t, b=ca.b * (1 - t) + cb.b * t, radius=ca.radius)
                for ca, cb in zip(caps_from, caps_to)]
        plan.append(capsules_to_movers(caps))
    return plan


class TestSweepVsOracle:
    def test_random_motions_agree(self):
        rng = np.random.default_rng(2024)
        checked = 0
        pushes_seen = 0
        blocked_seen = 0
        for trial in range(400):
            scene = random_scene(rng)
            plan = random_motion_plan(scene, rng)
            got = resolve_motion(scene, plan)
            status, moved = resolve_motion_oracle(scene, plan)
            assert got.status == status, f"trial {trial}: {got.status} vs {status}"
            if status == "pushes":
                pushes_seen += 1
                got_map = {p.object_id: p.displacement for p in got.pushes}
                assert set(got_map) == set(moved)
                for oid in moved:
                    assert np.linalg.norm(got_map[oid] - moved[oid]) <= 1e-9
            elif status == "blocked_by_static":
                blocked_seen += 1
            checked += 1
        assert checked == 400
        assert pushes_seen > 10
        assert blocked_seen > 10


class TestNoTunneling:
    def test_objects_never_end_inside_statics(self):
        rng = np.random.default_rng(77)
        for _ in range(60):
            scene = random_scene(rng)
            plan = random_motion_plan(scene, rng)
            res = resolve_motion(scene, plan)
            if res.status == "pushes":
                apply_pushes(scene, res.pushes, step_index=1)
            heavy = [o for o in scene.objects if o.mass_class == "heavy"]
            for o in scene.objects:
                if o.mass_class == "light":
                    assert object_statics_pen(o, o.position, scene, heavy) <= 1e-6


class TestDisturbanceRecords:
    def test_every_moved_object_recorded(self):
        rng = np.random.default_rng(123)
        seen = 0
        for _ in range(120):
            scene = random_scene(rng)
            before = {o.id: o.position.copy() for o in scene.objects}
            plan = random_motion_plan(scene, rng)
            res = resolve_motion(scene, plan)
            if res.status != "pushes":
                continue
            recs = apply_pushes(scene, res.pushes, step_index=3)
            seen += 1
            moved_ids = {
                o.id
                for o in scene.objects
                if float(np.linalg.norm(o.position - before[o.id])) > 0
            }
            assert moved_ids == {r.object_id for r in recs}
            for r in recs:
                target = scene.object_by_id(r.object_id)
                assert np.allclose(before[r.object_id] + r.displacement, target.position, atol=1e-12)
        assert seen > 5


def test_chain_points_spacing():
    pts = chain_points(vec3(0, 0, 0), vec3(0, 0, 0.31675))
    gaps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    assert float(gaps.max()) <= 0.01 + 1e-12
    assert np.allclose(pts[0], [0, 0, 0]) and np.allclose(pts[-1], [0, 0, 0.31675])
