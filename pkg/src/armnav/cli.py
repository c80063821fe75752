"""Command-line entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .env import EnvConfig, ManipulationEnv
from .geometry import canonical_json
from .library import NOVEL_CATEGORIES, SEEN_CATEGORIES
from .runner import bench, run_actions, run_eval
from .scene import load_scene, save_scene
from .scenegen import GenerationFailed, SceneGenParams, generate_scene
from .tasks import (
    build_splits,
    distance_histogram,
    load_split,
    save_split,
)


def _load_scene_dir(path: str) -> dict:
    scenes = {}
    for p in sorted(Path(path).glob("*.json")):
        s = load_scene(p)
        scenes[s.id] = s
    if not scenes:
        raise FileNotFoundError(f"no scene files in {path}")
    return scenes


def _cmd_gen_scenes(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    params = SceneGenParams(
        room_w=(args.room_min, args.room_max),
        room_d=(args.room_min, args.room_max),
        n_statics=(args.statics_min, args.statics_max),
        n_objects=(args.objects_min, args.objects_max),
    )
    for k in range(args.count):
        scene = generate_scene(args.seed + k, params)
        save_scene(scene, out / f"{scene.id}.json")
    print(f"wrote {args.count} scenes to {out}")
    return 0


def _cmd_gen_tasks(args) -> int:
    scenes = list(_load_scene_dir(args.scenes).values())
    scenes.sort(key=lambda s: s.id)
    n_train, n_val, n_test = args.train, args.val, args.test
    if n_train + n_val + n_test > len(scenes):
        print(
            f"error: split sizes {n_train}+{n_val}+{n_test} exceed {len(scenes)} scenes",
            file=sys.stderr,
        )
        return 1
    train = scenes[:n_train]
    val = scenes[n_train : n_train + n_val]
    test = scenes[n_train + n_val : n_train + n_val + n_test]
    splits, report = build_splits(
        train,
        val,
        test,
        seen_categories=SEEN_CATEGORIES,
        novel_categories=NOVEL_CATEGORIES,
        seed=args.seed,
        eval_subset=args.eval_subset,
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, split in splits.items():
        save_split(split, out / f"{name}.json")
        print(f"{name}: {len(split.tasks)} tasks")
        if split.tasks:
            hist = distance_histogram(split.tasks)
            (out / f"{name}.distances.json").write_text(canonical_json(hist) + "\n")
    (out / "location_report.json").write_text(canonical_json(report.to_dict()) + "\n")
    print(report.format_table())
    return 0


def _cmd_eval(args) -> int:
    split = load_split(args.split)
    scenes = _load_scene_dir(args.scenes)
    config = EnvConfig(depth_enabled=args.depth)
    report, logs = run_eval(split, scenes, policy_name=args.policy, config=config, seed=args.seed)
    print(report.format_table())
    if args.out:
        payload = {"report": report.to_dict(), "episodes": [log.to_dict() for log in logs]}
        Path(args.out).write_text(canonical_json(payload) + "\n")
        print(f"wrote {args.out}")
    return 0


def _cmd_serve(args) -> int:
    from .server import serve

    config = EnvConfig(depth_enabled=args.depth)
    serve(bind=args.bind, scene_dir=args.scenes, dataset_dir=args.datasets, config=config)
    return 0


def _cmd_bench(args) -> int:
    config = EnvConfig(
        depth_enabled=args.depth,
        depth_resolution=(args.resolution, args.resolution),
    )
    result = bench(args.steps, config=config, seed=args.seed)
    print(canonical_json(result.to_dict()))
    return 0


def _cmd_replay(args) -> int:
    split = load_split(args.split)
    scenes = _load_scene_dir(args.scenes)
    if not 0 <= args.index < len(split.tasks):
        print(f"error: task index {args.index} out of range", file=sys.stderr)
        return 1
    task = split.tasks[args.index]
    actions = json.loads(Path(args.actions).read_text())
    env = ManipulationEnv(EnvConfig())
    log, hashes, rewards = run_actions(env, task, scenes[task.scene_id], actions)
    for i, h in enumerate(hashes):
        print(f"{i:4d} {h}")
    print(f"outcome={log.outcome} steps={log.steps} reward={log.reward_sum:.6f}")
    if args.out:
        Path(args.out).write_text(canonical_json({"hashes": hashes, "rewards": rewards}) + "\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="armnav", description="Headless pick-and-place simulator tooling.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-scenes", help="generate procedural scenes")
    g.add_argument("--out", required=True)
    g.add_argument("--count", type=int, default=12)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--room-min", type=float, default=4.0)
    g.add_argument("--room-max", type=float, default=6.0)
    g.add_argument("--statics-min", type=int, default=2)
    g.add_argument("--statics-max", type=int, default=5)
    g.add_argument("--objects-min", type=int, default=4)
    g.add_argument("--objects-max", type=int, default=7)
    g.set_defaults(func=_cmd_gen_scenes)

    t = sub.add_parser("gen-tasks", help="build dataset splits from scenes")
    t.add_argument("--scenes", required=True)
    t.add_argument("--out", required=True)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--eval-subset", type=int, default=60)
    t.add_argument("--train", type=int, default=8)
    t.add_argument("--val", type=int, default=2)
    t.add_argument("--test", type=int, default=2)
    t.set_defaults(func=_cmd_gen_tasks)

    e = sub.add_parser("eval", help="run a policy over a split")
    e.add_argument("--split", required=True)
    e.add_argument("--scenes", required=True)
    e.add_argument("--policy", choices=["greedy", "random"], default="greedy")
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--depth", action="store_true")
    e.add_argument("--out")
    e.set_defaults(func=_cmd_eval)

    s = sub.add_parser("serve", help="run the wire-protocol server")
    s.add_argument("--bind", default="127.0.0.1:7070")
    s.add_argument("--scenes")
    s.add_argument("--datasets")
    s.add_argument("--depth", action="store_true")
    s.set_defaults(func=_cmd_serve)

    b = sub.add_parser("bench", help="stepping-throughput benchmark")
    b.add_argument("--steps", type=int, default=10000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--depth", action="store_true")
    b.add_argument("--resolution", type=int, default=64)
    b.set_defaults(func=_cmd_bench)

    r = sub.add_parser("replay", help="replay an action list and print state hashes")
    r.add_argument("--split", required=True)
    r.add_argument("--scenes", required=True)
    r.add_argument("--index", type=int, required=True)
    r.add_argument("--actions", required=True, help="json file with a list of action codes")
    r.add_argument("--out")
    r.set_defaults(func=_cmd_replay)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (GenerationFailed, FileNotFoundError, ValueError, KeyError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
