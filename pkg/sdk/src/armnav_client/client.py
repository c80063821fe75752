"""Socket client for the armnav wire protocol.

One RemoteEnv owns one connection and at most one episode in flight.
Requests carry strictly increasing ids; every call blocks for its single
response line. Depth payloads (base64 little-endian float32, row-major)
are decoded into (height, width) numpy matrices.
"""

from __future__ import annotations

import base64
import json
import socket
from dataclasses import dataclass

import numpy as np

PROTOCOL_VERSION = 1


class ClientError(Exception):
    pass


class ConnectionFailed(ClientError):
    pass


class VersionMismatch(ClientError):
    pass


class ProtocolError(ClientError):
    pass


class EpisodeFinished(ClientError):
    pass


@dataclass(frozen=True)
class StepResult:
    observation: dict
    reward: dict
    done: bool
    info: dict


def _decode_depth(payload: dict | None) -> np.ndarray | None:
    if payload is None:
        return None
    try:
        w, h = int(payload["width"]), int(payload["height"])
        raw = base64.b64decode(payload["data_b64"], validate=True)
    except (KeyError, ValueError, TypeError) as e:
        raise ProtocolError(f"bad depth payload: {e}") from None
    if len(raw) != w * h * 4:
        raise ProtocolError(f"depth payload holds {len(raw)} bytes, expected {w * h * 4}")
    return np.frombuffer(raw, dtype="<f4").reshape(h, w)


def _materialize_observation(obs: dict) -> dict:
    out = dict(obs)
    out["depth"] = _decode_depth(obs.get("depth"))
    return out


class RemoteEnv:
    """Connection handle with a conventional reset/step surface."""

    def __init__(self, sock: socket.socket, capabilities: dict):
        self._sock = sock
        self._rfile = sock.makefile("rb")
        self._next_id = 1
        self.capabilities = capabilities
        self.protocol_version = capabilities["protocol_version"]
        self._episode_live = False

    # -- lifecycle ---------------------------------------------------------

    @classmethod
    def connect(cls, address: str | tuple[str, int], protocol_version: int = PROTOCOL_VERSION, timeout: float = 30.0) -> "RemoteEnv":
        """Open a connection and negotiate the protocol version."""
        if isinstance(address, str):
            host, _, port_s = address.partition(":")
            address = (host or "127.0.0.1", int(port_s))
        try:
            sock = socket.create_connection(address, timeout=timeout)
        except OSError as e:
            raise ConnectionFailed(f"cannot reach {address[0]}:{address[1]}: {e}") from None
        line = (
            json.dumps(
                {"id": 0, "kind": "hello", "payload": {"protocol_version": protocol_version}},
                sort_keys=True,
                separators=(",", ":"),
            ).encode("utf-8")
            + b"\n"
        )
        sock.sendall(line)
        rfile = sock.makefile("rb")
        resp_line = rfile.readline()
        if not resp_line:
            sock.close()
            raise ConnectionFailed("server closed the connection during hello")
        try:
            resp = json.loads(resp_line)
        except json.JSONDecodeError as e:
            sock.close()
            raise ProtocolError(f"malformed hello response: {e}") from None
        if resp.get("status") != "ok":
            payload = resp.get("payload", {})
            sock.close()
            if payload.get("error") == "version_mismatch":
                raise VersionMismatch(payload.get("message", "protocol version mismatch"))
            raise ProtocolError(payload.get("message", "hello rejected"))
        env = cls(sock, resp["payload"])
        env._rfile = rfile
        return env

    def close(self) -> None:
        try:
            self._call("close", {})
        except ClientError:
            pass
        try:
            self._sock.close()
        except OSError:
            pass

    def __enter__(self) -> "RemoteEnv":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- plumbing ------------------------------------------------------------

    def _call(self, kind: str, payload: dict) -> dict:
        rid = self._next_id
        self._next_id += 1
        line = (
            json.dumps(
                {"id": rid, "kind": kind, "payload": payload},
                sort_keys=True,
                separators=(",", ":"),
            ).encode("utf-8")
            + b"\n"
        )
        try:
            self._sock.sendall(line)
            resp_line = self._rfile.readline()
        except OSError as e:
            raise ConnectionFailed(f"connection lost: {e}") from None
        if not resp_line:
            raise ConnectionFailed("server closed the connection")
        try:
            resp = json.loads(resp_line)
        except json.JSONDecodeError as e:
            raise ProtocolError(f"malformed response: {e}") from None
        if resp.get("id") != rid:
            raise ProtocolError(f"response id {resp.get('id')} does not match request {rid}")
        if resp.get("status") == "ok":
            return resp.get("payload", {})
        payload = resp.get("payload", {})
        code = payload.get("error", "unknown")
        message = payload.get("message", "request failed")
        if code == "episode_finished":
            raise EpisodeFinished(message)
        raise ProtocolError(f"{code}: {message}")

    # -- environment surface ---------------------------------------------------

    @property
    def actions(self) -> dict[int, str]:
        return {int(k): v for k, v in self.capabilities["actions"].items()}

    def load_dataset(self, path: str) -> dict:
        return self._call("load_dataset", {"path": path})

    def reset(
        self,
        task_index: int | None = None,
        task: dict | None = None,
        scene: dict | None = None,
        config: dict | None = None,
    ) -> tuple[dict, str]:
        """Start an episode; returns (observation, state_hash)."""
        payload: dict = {}
        if task_index is not None:
            payload["task_index"] = task_index
        if task is not None:
            payload["task"] = task
        if scene is not None:
            payload["scene"] = scene
        if config is not None:
            payload["config"] = config
        out = self._call("reset", payload)
        self._episode_live = True
        return _materialize_observation(out["observation"]), out["state_hash"]

    def step(self, action: int) -> StepResult:
        out = self._call("step", {"action": int(action)})
        if out["done"]:
            self._episode_live = False
        return StepResult(
            observation=_materialize_observation(out["observation"]),
            reward=out["reward"],
            done=out["done"],
            info=out["info"],
        )

    def observe(self) -> tuple[dict, str]:
        out = self._call("observe", {})
        return _materialize_observation(out["observation"]), out["state_hash"]

    def drop(self) -> dict:
        return self._call("drop", {})

    def set_grasper_radius(self, radius: float) -> float:
        out = self._call("set_grasper_radius", {"radius": float(radius)})
        return float(out["grasper_radius"])
