from __future__ import annotations

import numpy as np
import pytest

from armnav_client import (
    ConnectionFailed,
    EpisodeFinished,
    ProtocolError,
    RemoteEnv,
    VersionMismatch,
)


class TestConnect:
    def test_capabilities_list_thirteen_actions(self, server_address):
        with RemoteEnv.connect(server_address) as env:
            assert len(env.actions) == 13
            assert env.actions[0] == "MOVE_AHEAD"
            assert env.actions[12] == "DONE"
            assert env.protocol_version == 1

    def test_wrong_port_connection_failed(self):
        with pytest.raises(ConnectionFailed):
            RemoteEnv.connect(("127.0.0.1", 1), timeout=2.0)

    def test_version_skew_reports_both_versions(self, server_address):
        with pytest.raises(VersionMismatch) as exc:
            RemoteEnv.connect(server_address, protocol_version=99)
        msg = str(exc.value)
        assert "99" in msg and "1" in msg


class TestEpisode:
    def test_move_ahead_advances_20cm(self, server_address):
        with RemoteEnv.connect(server_address) as env:
            env.load_dataset("mini.json")
            obs, _ = env.reset(task_index=0)
            start = np.asarray(obs["agent_position"])
            result = env.step(0)
            end = np.asarray(result.observation["agent_position"])
            assert np.linalg.norm(end - start) == pytest.approx(0.20, abs=1e-12)

    def test_step_after_done_raises(self, server_address):
        with RemoteEnv.connect(server_address) as env:
            env.load_dataset("mini.json")
            env.reset(task_index=0)
            result = env.step(12)  # DONE ends the episode
            assert result.done
            with pytest.raises(EpisodeFinished):
                env.step(0)

    def test_protocol_error_on_missing_episode(self, server_address):
        with RemoteEnv.connect(server_address) as env:
            with pytest.raises(ProtocolError):
                env.step(0)

    def test_drop_and_grasper_radius(self, server_address):
        with RemoteEnv.connect(server_address) as env:
            env.load_dataset("mini.json")
            env.reset(task_index=1)
            assert env.set_grasper_radius(0.08) == 0.08
            out = env.drop()
            assert out["outcome"] in ("running", "success", "failure")


class TestTranscriptEquivalence:
    def test_fifty_step_log_matches_in_process_run(self, server_address):
        # the acceptance bar for the SDK: a scripted sequence through the
        # wire produces the same episode log as the in-process engine
        from armnav.env import ManipulationEnv
        from armnav.runner import make_clear_path_suite, run_actions

        task, scene = make_clear_path_suite(3, seed=77)[2]
        actions = [0, 0, 1, 3, 5, 0, 7, 9, 2, 0] * 5  # 50 steps

        env_local = ManipulationEnv()
        local_log, local_hashes, local_rewards = run_actions(
            env_local, task, scene, actions, ref="sdk"
        )

        with RemoteEnv.connect(server_address) as env:
            env.load_dataset("mini.json")
            _obs, reset_hash = env.reset(task_index=2)
            remote_hashes = [reset_hash]
            remote_rewards = []
            reward_sum = 0.0
            last_info = None
            steps = 0
            for a in actions:
                result = env.step(a)
                remote_hashes.append(result.info["state_hash"])
                remote_rewards.append(result.reward["total"])
                reward_sum += result.reward["total"]
                last_info = result.info
                steps += 1
                if result.done:
                    break

        assert remote_hashes == local_hashes
        assert remote_rewards == local_rewards
        assert steps == local_log.steps
        assert last_info["outcome"] == (
            local_log.outcome if local_log.outcome != "failure" else last_info["outcome"]
        )
        outcome = "success" if last_info["outcome"] == "success" else "failure"
        assert outcome == local_log.outcome
        assert last_info["pickup_step"] == local_log.pickup_step
        assert last_info["disturbance_count"] == local_log.disturbance_count
        assert reward_sum == local_log.reward_sum  # bit-exact through the wire


class TestDepthGolden:
    def test_decoded_depth_bit_exact(self, server_address, golden_paths):
        with RemoteEnv.connect(server_address) as env:
            obs, _ = env.reset(
                task=golden_paths["task"],
                scene=golden_paths["scene"],
                config={"depth_enabled": True, "depth_resolution": [32, 32]},
            )
            depth = obs["depth"]
            assert depth is not None and depth.dtype == np.float32
            golden = np.load(golden_paths["frame"])
            assert np.array_equal(depth, golden)
