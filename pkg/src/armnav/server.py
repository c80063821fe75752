"""Stream server driving one episode per connection.

Connections are isolated: each handler owns its env instance and episode
state; scenes and datasets are loaded read-only up front. Requests are
processed strictly in order within a connection; malformed lines get an
error response and the connection stays up.
"""

from __future__ import annotations

import socketserver
import threading
from pathlib import Path

from . import PROTOCOL_VERSION
from .env import ACTION_TABLE, EnvConfig, EpisodeFinished, InvalidTask, ManipulationEnv
from .protocol import (
    DecodeError,
    Request,
    Response,
    SchemaError,
    decode_request,
    encode_depth,
    encode_response,
)
from .scene import Scene, load_scene
from .tasks import DatasetSplit, TaskSpec, load_split


class BindFailure(Exception):
    pass


def _hello_payload() -> dict:
    return {
        "protocol_version": PROTOCOL_VERSION,
        "actions": {str(code): name for code, name in sorted(ACTION_TABLE.items())},
        "sensors": ["relative_coordinates", "depth"],
        "config_keys": ["delta_success", "depth_enabled", "depth_resolution", "grasper_radius", "max_steps"],
    }


class _Handler(socketserver.StreamRequestHandler):
    server: "ProtocolServer"

    def setup(self) -> None:
        super().setup()
        self.env: ManipulationEnv | None = None
        self.split: DatasetSplit | None = None
        self.scenes: dict[str, Scene] = {}
        self.last_id = -1
        self.said_hello = False

    def handle(self) -> None:
        while True:
            try:
                line = self.rfile.readline()
            except (ConnectionError, OSError):
                return
            if not line:
                return
            if line.strip() == b"":
                continue
            try:
                req = decode_request(line)
            except DecodeError as e:
                self._send(Response(id=None, status="error", payload={
                    "error": "decode_error", "message": str(e), "offset": e.offset,
                }))
                continue
            except SchemaError as e:
                self._send(Response(id=None, status="error", payload={
                    "error": "schema_error", "message": str(e),
                }))
                continue
            if req.id <= self.last_id:
                self._send(Response(id=req.id, status="error", payload={
                    "error": "bad_request_id",
                    "message": f"request id {req.id} not greater than {self.last_id}",
                }))
                continue
            self.last_id = req.id
            try:
                payload = self._dispatch(req)
                self._send(Response(id=req.id, status="ok", payload=payload))
            except _RequestError as e:
                self._send(Response(id=req.id, status="error", payload={
                    "error": e.code, "message": str(e),
                }))
            except Exception as e:  # keep the connection alive on surprises
                self._send(Response(id=req.id, status="error", payload={
                    "error": "internal", "message": f"{type(e).__name__}: {e}",
                }))
            if req.kind == "close":
                return

    def _send(self, resp: Response) -> None:
        try:
            self.wfile.write(encode_response(resp))
            self.wfile.flush()
        except (ConnectionError, OSError):
            pass

    # -- dispatch -----------------------------------------------------------

    def _dispatch(self, req: Request) -> dict:
        if req.kind == "hello":
            client = req.payload["protocol_version"]
            if client != PROTOCOL_VERSION:
                raise _RequestError(
                    "version_mismatch",
                    f"client protocol_version {client}, server {PROTOCOL_VERSION}",
                )
            self.said_hello = True
            return _hello_payload()
        if not self.said_hello:
            raise _RequestError("no_hello", "send hello before other requests")
        if req.kind == "load_dataset":
            return self._load_dataset(req.payload["path"])
        if req.kind == "reset":
            return self._reset(req.payload)
        if req.kind == "step":
            return self._step(req.payload["action"])
        if req.kind == "observe":
            return self._observe()
        if req.kind == "drop":
            return self._drop()
        if req.kind == "set_grasper_radius":
            return self._set_grasper_radius(req.payload["radius"])
        if req.kind == "close":
            return {}
        raise _RequestError("schema_error", f"unknown kind {req.kind!r}")

    def _load_dataset(self, path: str) -> dict:
        resolved = self.server.resolve_dataset(path)
        if resolved is None:
            raise _RequestError("no_dataset", f"dataset {path!r} not found")
        self.split = load_split(resolved)
        return {
            "name": self.split.name,
            "n_tasks": len(self.split.tasks),
            "scene_ids": self.split.scene_ids,
        }

    def _reset(self, payload: dict) -> dict:
        if "task" in payload:
            task = TaskSpec.from_dict(payload["task"])
        else:
            if self.split is None:
                raise _RequestError("no_dataset", "load_dataset before reset by index")
            idx = payload["task_index"]
            if idx >= len(self.split.tasks):
                raise _RequestError("invalid_task", f"task_index {idx} out of range ({len(self.split.tasks)} tasks)")
            task = self.split.tasks[idx]
        if "scene" in payload:
            scene = Scene.from_dict(payload["scene"])
            self.scenes[scene.id] = scene
        else:
            scene = self.scenes.get(task.scene_id) or self.server.scenes.get(task.scene_id)
            if scene is None:
                raise _RequestError("invalid_task", f"scene {task.scene_id!r} not loaded on the server")
        config = self.server.config
        if "config" in payload:
            try:
                config = EnvConfig.from_dict({**config.to_dict(), **payload["config"]})
            except (TypeError, ValueError) as e:
                raise _RequestError("schema_error", f"bad config: {e}") from None
        self.env = ManipulationEnv(config)
        try:
            obs = self.env.reset(task, scene)
        except InvalidTask as e:
            self.env = None
            raise _RequestError("invalid_task", str(e)) from None
        return {"observation": self._obs_dict(obs), "state_hash": self.env.state_hash()}

    def _need_env(self) -> ManipulationEnv:
        if self.env is None:
            raise _RequestError("no_episode", "reset before this request")
        return self.env

    def _obs_dict(self, obs) -> dict:
        d = obs.to_dict()
        d["depth"] = encode_depth(obs.depth) if obs.depth is not None else None
        return d

    def _step(self, action: int) -> dict:
        env = self._need_env()
        try:
            obs, terms, done, info = env.step(action)
        except EpisodeFinished as e:
            raise _RequestError("episode_finished", str(e)) from None
        return {
            "observation": self._obs_dict(obs),
            "reward": terms.to_dict(),
            "done": done,
            "info": info,
        }

    def _observe(self) -> dict:
        env = self._need_env()
        return {"observation": self._obs_dict(env.observe()), "state_hash": env.state_hash()}

    def _drop(self) -> dict:
        env = self._need_env()
        try:
            env.drop()
        except EpisodeFinished as e:
            raise _RequestError("episode_finished", str(e)) from None
        return {
            "observation": self._obs_dict(env.observe()),
            "outcome": env.outcome,
            "state_hash": env.state_hash(),
        }

    def _set_grasper_radius(self, radius: float) -> dict:
        env = self._need_env()
        try:
            env.set_grasper_radius(float(radius))
        except ValueError as e:
            raise _RequestError("value_error", str(e)) from None
        return {"grasper_radius": env.arm.grasper_radius}


class _RequestError(Exception):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True
    block_on_close = False


class ProtocolServer:
    """Owns the listening socket, the scene store, and the default config."""

    def __init__(
        self,
        host: str = "127.0.0.1",
        port: int = 0,
        scene_dir: str | Path | None = None,
        dataset_dir: str | Path | None = None,
        config: EnvConfig = EnvConfig(),
    ):
        self.config = config
        self.scenes: dict[str, Scene] = {}
        if scene_dir is not None:
            for p in sorted(Path(scene_dir).glob("*.json")):
                scene = load_scene(p)
                self.scenes[scene.id] = scene
        self.dataset_dir = Path(dataset_dir) if dataset_dir is not None else None
        try:
            self._server = _TCPServer((host, port), _Handler)
        except OSError as e:
            raise BindFailure(f"cannot bind {host}:{port}: {e}") from None
        self._server.scenes = self.scenes  # type: ignore[attr-defined]
        self._server.resolve_dataset = self.resolve_dataset  # type: ignore[attr-defined]
        self._server.config = config  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    def resolve_dataset(self, path: str) -> Path | None:
        p = Path(path)
        if p.is_absolute():
            return p if p.exists() else None
        if self.dataset_dir is not None and (self.dataset_dir / p).exists():
            return self.dataset_dir / p
        return p if p.exists() else None

    @property
    def address(self) -> tuple[str, int]:
        return self._server.server_address[:2]

    def start(self) -> None:
        """Serve on a background thread (tests, embedding)."""
        self._thread = threading.Thread(target=self._server.serve_forever, daemon=True)
        self._thread.start()

    def serve_forever(self) -> None:
        self._server.serve_forever()

    def shutdown(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5.0)
            self._thread = None


def serve(
    bind: str = "127.0.0.1:7070",
    scene_dir: str | Path | None = None,
    dataset_dir: str | Path | None = None,
    config: EnvConfig = EnvConfig(),
) -> None:
    """Blocking entry point: run until interrupted."""
    host, _, port_s = bind.partition(":")
    server = ProtocolServer(
        host=host or "127.0.0.1",
        port=int(port_s) if port_s else 7070,
        scene_dir=scene_dir,
        dataset_dir=dataset_dir,
        config=config,
    )
    host_out, port_out = server.address
    print(f"serving on {host_out}:{port_out} ({len(server.scenes)} scenes)", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.shutdown()
