"""Example: drive one scripted episode against a running server.

Start the server first, e.g.
    armnav serve --bind 127.0.0.1:7070 --scenes scenes/ --datasets tasks/
then
    python3 rollout.py --address 127.0.0.1:7070 --dataset Val.json
"""

from __future__ import annotations

import argparse

from armnav_client import RemoteEnv


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--address", default="127.0.0.1:7070")
    parser.add_argument("--dataset", default="Val.json")
    parser.add_argument("--task-index", type=int, default=0)
    parser.add_argument("--steps", type=int, default=50)
    args = parser.parse_args()

    with RemoteEnv.connect(args.address) as env:
        print(f"connected, protocol v{env.protocol_version}, {len(env.actions)} actions")
        info = env.load_dataset(args.dataset)
        print(f"dataset {info['name']}: {info['n_tasks']} tasks")
        obs, state_hash = env.reset(task_index=args.task_index)
        print(f"reset ok, hash {state_hash[:12]}..., object at {obs['arm_to_object']}")
        total = 0.0
        # walk forward, probing a grasp every few steps
        for t in range(args.steps):
            action = 11 if t % 7 == 6 else 0
            result = env.step(action)
            total += result.reward["total"]
            if result.done:
                print(f"episode ended at step {t + 1}: {result.info['outcome']}")
                break
        print(f"reward sum {total:.4f}")


if __name__ == "__main__":
    main()
