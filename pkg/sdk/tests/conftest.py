from __future__ import annotations

import json
import re
import subprocess
import sys
import time
from pathlib import Path

import pytest

REPO_ROOT = Path(__file__).resolve().parents[2]
GOLDEN_DIR = REPO_ROOT / "tests" / "data"


def _build_fixture_data(root: Path) -> tuple[Path, Path]:
    """Scenes and a mini split for the server, produced by the simulator
    package (test fixture only; the SDK itself never imports it)."""
    from armnav.runner import make_clear_path_suite
    from armnav.scene import save_scene
    from armnav.tasks import DatasetSplit, save_split

    scene_dir = root / "scenes"
    data_dir = root / "datasets"
    scene_dir.mkdir()
    data_dir.mkdir()
    tasks = []
    scene_ids = []
    for task, scene in make_clear_path_suite(3, seed=77):
        save_scene(scene, scene_dir / f"{scene.id}.json")
        tasks.append(task)
        scene_ids.append(scene.id)
    split = DatasetSplit(name="sdk-mini", scene_ids=scene_ids, categories=["Apple"], tasks=tasks)
    save_split(split, data_dir / "mini.json")
    return scene_dir, data_dir


@pytest.fixture(scope="session")
def server_address(tmp_path_factory):
    """A live server subprocess reached only through its CLI and socket."""
    root = tmp_path_factory.mktemp("sdkserver")
    scene_dir, data_dir = _build_fixture_data(root)
    proc = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "armnav.cli",
            "serve",
            "--bind",
            "127.0.0.1:0",
            "--scenes",
            str(scene_dir),
            "--datasets",
            str(data_dir),
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.STDOUT,
        text=True,
    )
    line = proc.stdout.readline()
    m = re.search(r"serving on ([\d.]+):(\d+)", line)
    if not m:
        proc.terminate()
        raise RuntimeError(f"server did not announce its address: {line!r}")
    address = (m.group(1), int(m.group(2)))
    # give the accept loop a beat
    time.sleep(0.1)
    yield address
    proc.terminate()
    try:
        proc.wait(timeout=5)
    except subprocess.TimeoutExpired:
        proc.kill()


@pytest.fixture()
def golden_paths():
    return {
        "scene": json.loads((GOLDEN_DIR / "depth_golden_scene.json").read_text()),
        "task": json.loads((GOLDEN_DIR / "depth_golden_task.json").read_text()),
        "frame": GOLDEN_DIR / "depth_golden.npy",
    }
