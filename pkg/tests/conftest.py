from __future__ import annotations

import numpy as np
import pytest

from armnav.geometry import vec3
from armnav.scene import Scene, SceneObject, StaticBox
from armnav.scenegen import spawn_positions


def walled_room(scene_id: str = "room", w: float = 5.0, d: float = 5.0, h: float = 2.5) -> Scene:
    t = 0.1
    scene = Scene(id=scene_id, room_lo=vec3(-w / 2, 0, -d / 2), room_hi=vec3(w / 2, h, d / 2))
    scene.statics.extend(
        [
            StaticBox("wall_xlo", vec3(-w / 2, 0, -d / 2), vec3(-w / 2 + t, h, d / 2)),
            StaticBox("wall_xhi", vec3(w / 2 - t, 0, -d / 2), vec3(w / 2, h, d / 2)),
            StaticBox("wall_zlo", vec3(-w / 2 + t, 0, -d / 2), vec3(w / 2 - t, h, -d / 2 + t)),
            StaticBox("wall_zhi", vec3(-w / 2 + t, 0, d / 2 - t), vec3(w / 2 - t, h, d / 2)),
        ]
    )
    return scene


def add_sphere(scene: Scene, oid: str, category: str, pos, radius: float = 0.04, **kw) -> SceneObject:
    obj = SceneObject(
        id=oid,
        category=category,
        shape_kind="sphere",
        shape_dims=np.array([radius]),
        position=vec3(*pos),
        **kw,
    )
    scene.objects.append(obj)
    return obj


def add_box_obj(scene: Scene, oid: str, category: str, pos, half, yaw: float = 0.0, **kw) -> SceneObject:
    obj = SceneObject(
        id=oid,
        category=category,
        shape_kind="box",
        shape_dims=np.asarray(half, dtype=np.float64),
        position=vec3(*pos),
        yaw=yaw,
        **kw,
    )
    scene.objects.append(obj)
    return obj


def finish_scene(scene: Scene) -> Scene:
    scene.spawn_grid = spawn_positions(scene, 0.25, 0.2, 1.8)
    return scene


@pytest.fixture
def empty_room() -> Scene:
    return finish_scene(walled_room())
