"""Newline-delimited JSON wire protocol: message schemas and codecs.

Every message is one UTF-8 line of canonical JSON (sorted keys, compact
separators). Requests carry a strictly increasing integer id, a kind, and
a kind-specific payload; each request gets exactly one response echoing
the id. Depth frames travel as base64 of little-endian 32-bit floats,
row-major.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass, field

import numpy as np

from .depth import DepthFrame
from .geometry import canonical_json_bytes

REQUEST_KINDS = (
    "hello",
    "load_dataset",
    "reset",
    "step",
    "observe",
    "drop",
    "set_grasper_radius",
    "close",
)


class DecodeError(Exception):
    """Malformed wire data; offset is the byte position when known."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.offset = offset


class SchemaError(Exception):
    pass


@dataclass(frozen=True)
class Request:
    id: int
    kind: str
    payload: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Response:
    id: int | None
    status: str  # "ok" | "error"
    payload: dict = field(default_factory=dict)


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise SchemaError(message)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool))


def validate_request_payload(kind: str, payload: dict) -> None:
    """Kind-specific schema checks, raising SchemaError on violation."""
    _require(isinstance(payload, dict), "payload must be an object")
    if kind == "hello":
        _require("protocol_version" in payload, "hello payload requires protocol_version")
        _require(_is_int(payload["protocol_version"]), "protocol_version must be an integer")
    elif kind == "load_dataset":
        _require(isinstance(payload.get("path"), str), "load_dataset payload requires a path string")
    elif kind == "reset":
        has_index = "task_index" in payload
        has_inline = "task" in payload
        _require(has_index or has_inline, "reset needs task_index or an inline task")
        if has_index:
            _require(_is_int(payload["task_index"]) and payload["task_index"] >= 0, "task_index must be a nonnegative integer")
        if has_inline:
            _require(isinstance(payload["task"], dict), "inline task must be an object")
        if "scene" in payload:
            _require(isinstance(payload["scene"], dict), "inline scene must be an object")
        if "config" in payload:
            _require(isinstance(payload["config"], dict), "config must be an object")
    elif kind == "step":
        _require("action" in payload, "step payload requires an action code")
        _require(_is_int(payload["action"]), "action must be an integer")
        _require(0 <= payload["action"] <= 12, f"action code {payload['action']} outside 0..12")
    elif kind == "set_grasper_radius":
        _require(_is_num(payload.get("radius")), "set_grasper_radius requires a numeric radius")
        _require(payload["radius"] > 0, "radius must be positive")
    elif kind in ("observe", "drop", "close"):
        pass
    else:
        raise SchemaError(f"unknown request kind {kind!r}")


def encode_request(req: Request) -> bytes:
    return canonical_json_bytes({"id": req.id, "kind": req.kind, "payload": req.payload}) + b"\n"


def decode_request(line: bytes) -> Request:
    try:
        obj = json.loads(line.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise DecodeError(f"invalid utf-8: {e}", offset=e.start) from None
    except json.JSONDecodeError as e:
        raise DecodeError(f"invalid json: {e.msg}", offset=e.pos) from None
    if not isinstance(obj, dict):
        raise DecodeError("request must be a json object")
    try:
        rid = obj["id"]
        kind = obj["kind"]
    except KeyError as e:
        raise DecodeError(f"request missing {e.args[0]!r}") from None
    if not _is_int(rid) or rid < 0:
        raise DecodeError("request id must be a nonnegative integer")
    if not isinstance(kind, str):
        raise DecodeError("request kind must be a string")
    payload = obj.get("payload", {})
    if not isinstance(payload, dict):
        raise DecodeError("request payload must be an object")
    validate_request_payload(kind, payload)
    return Request(id=rid, kind=kind, payload=payload)


def encode_response(resp: Response) -> bytes:
    return canonical_json_bytes({"id": resp.id, "status": resp.status, "payload": resp.payload}) + b"\n"


def decode_response(line: bytes) -> Response:
    try:
        obj = json.loads(line.decode("utf-8"))
    except UnicodeDecodeError as e:
        raise DecodeError(f"invalid utf-8: {e}", offset=e.start) from None
    except json.JSONDecodeError as e:
        raise DecodeError(f"invalid json: {e.msg}", offset=e.pos) from None
    if not isinstance(obj, dict):
        raise DecodeError("response must be a json object")
    rid = obj.get("id")
    if rid is not None and not _is_int(rid):
        raise DecodeError("response id must be an integer or null")
    status = obj.get("status")
    if status not in ("ok", "error"):
        raise DecodeError(f"bad response status {status!r}")
    payload = obj.get("payload", {})
    if not isinstance(payload, dict):
        raise DecodeError("response payload must be an object")
    return Response(id=rid, status=status, payload=payload)


def encode_depth(frame: DepthFrame) -> dict:
    data = np.ascontiguousarray(frame.values, dtype="<f4").tobytes()
    return {
        "width": frame.width,
        "height": frame.height,
        "fov_deg": frame.fov_deg,
        "max_range": frame.max_range,
        "camera": {
            "position": [float(v) for v in frame.camera.position],
            "yaw": float(frame.camera.yaw),
        },
        "data_b64": base64.b64encode(data).decode("ascii"),
    }


def decode_depth(d: dict) -> np.ndarray:
    """Depth payload to a (height, width) float32 matrix."""
    try:
        w, h = int(d["width"]), int(d["height"])
        raw = base64.b64decode(d["data_b64"], validate=True)
    except (KeyError, ValueError, TypeError) as e:
        raise DecodeError(f"bad depth payload: {e}") from None
    if len(raw) != w * h * 4:
        raise DecodeError(f"depth payload holds {len(raw)} bytes, expected {w * h * 4}")
    return np.frombuffer(raw, dtype="<f4").reshape(h, w)
