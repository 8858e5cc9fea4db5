"""Federation messages and their length-prefixed JSON frames.

A frame is a 4-byte big-endian payload length followed by a UTF-8 JSON
object. Every payload carries ``"type"`` and ``"version"``.
"""
from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from ..errors import FrameTooLarge, MalformedPayload, UnknownType, VersionMismatch
from ..learners.models import (
    LocalModel,
    from_json_float,
    json_float,
    json_floats,
    local_from_dict,
    local_to_dict,
    model_from_dict,
    model_to_dict,
)
from ..learners.svm import LinearSvmModel
from ..schema import Dataset, FeatureSchema

PROTOCOL_VERSION = 1
MAX_PAYLOAD = 64 * 1024 * 1024
_HEADER = struct.Struct("!I")


@dataclass
class GlobalModel:
    svm: LinearSvmModel
    mean_feature_importances: Optional[np.ndarray] = None
    provenance: dict = field(default_factory=dict)

    def predict(self, X) -> np.ndarray:
        return self.svm.predict(X)

    def decision_function(self, X) -> np.ndarray:
        return self.svm.decision_function(X)

    def to_dict(self) -> dict:
        imp = self.mean_feature_importances
        return {
            "type": "global",
            "version": PROTOCOL_VERSION,
            "svm": model_to_dict(self.svm),
            "mean_feature_importances": None if imp is None else json_floats(imp),
            "provenance": self.provenance,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GlobalModel":
        if d.get("type") != "global":
            raise UnknownType(f"expected a global model, got {d.get('type')!r}")
        if d.get("version") != PROTOCOL_VERSION:
            raise VersionMismatch(f"global model version {d.get('version')!r}")
        imp = d.get("mean_feature_importances")
        return cls(svm=model_from_dict(d["svm"]),
                   mean_feature_importances=None if imp is None else np.array([from_json_float(v) for v in imp]),
                   provenance=dict(d.get("provenance", {})))

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True, allow_nan=False) + "\n"

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path) -> "GlobalModel":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Register:
    client_id: str


@dataclass
class LocalModelMsg:
    client_id: str
    local_model: LocalModel


@dataclass
class ShardMsg:
    client_id: str
    dataset: Dataset


@dataclass
class GlobalModelMsg:
    round: int
    global_model: GlobalModel
    # no local update is expected after the final broadcast
    final: bool = False


@dataclass
class EvalResult:
    client_id: str
    metrics: dict


@dataclass
class Shutdown:
    pass


Message = Union[Register, LocalModelMsg, ShardMsg, GlobalModelMsg, EvalResult, Shutdown]

TYPE_NAMES = {
    Register: "register",
    LocalModelMsg: "local_model",
    ShardMsg: "shard",
    GlobalModelMsg: "global_model",
    EvalResult: "eval_result",
    Shutdown: "shutdown",
}


def type_name(msg) -> str:
    try:
        return TYPE_NAMES[type(msg)]
    except KeyError:
        raise UnknownType(f"not a protocol message: {type(msg).__name__}") from None


def dataset_to_dict(ds: Dataset) -> dict:
    rows = np.hstack([ds.X, ds.y[:, None]]).tolist() if len(ds) else []
    return {"provenance": ds.provenance, "schema": ds.schema.to_text(), "rows": rows}


def dataset_from_dict(d: dict) -> Dataset:
    schema = FeatureSchema.from_text(d["schema"])
    rows = np.asarray(d["rows"], dtype=np.int64).reshape(-1, 12)
    return Dataset.from_arrays(rows[:, :11], rows[:, 11], schema, d.get("provenance", ""))


def message_to_dict(msg) -> dict:
    d = {"type": type_name(msg), "version": PROTOCOL_VERSION}
    if isinstance(msg, Register):
        d["client_id"] = msg.client_id
    elif isinstance(msg, LocalModelMsg):
        d["client_id"] = msg.client_id
        d["local_model"] = local_to_dict(msg.local_model)
    elif isinstance(msg, ShardMsg):
        d["client_id"] = msg.client_id
        d["dataset"] = dataset_to_dict(msg.dataset)
    elif isinstance(msg, GlobalModelMsg):
        d["round"] = msg.round
        d["final"] = msg.final
        d["global_model"] = msg.global_model.to_dict()
    elif isinstance(msg, EvalResult):
        d["client_id"] = msg.client_id
        d["metrics"] = {k: json_float(v) if isinstance(v, float) else v for k, v in msg.metrics.items()}
    return d


def message_from_dict(d: dict):
    if not isinstance(d, dict) or "type" not in d:
        raise MalformedPayload("payload is not an object with a 'type' field")
    if d.get("version") != PROTOCOL_VERSION:
        raise VersionMismatch(f"protocol version {d.get('version')!r}, expected {PROTOCOL_VERSION}")
    t = d["type"]
    try:
        if t == "register":
            return Register(str(d["client_id"]))
        if t == "local_model":
            return LocalModelMsg(str(d["client_id"]), local_from_dict(d["local_model"]))
        if t == "shard":
            return ShardMsg(str(d["client_id"]), dataset_from_dict(d["dataset"]))
        if t == "global_model":
            return GlobalModelMsg(int(d["round"]), GlobalModel.from_dict(d["global_model"]),
                                  bool(d.get("final", False)))
        if t == "eval_result":
            return EvalResult(str(d["client_id"]), dict(d["metrics"]))
        if t == "shutdown":
            return Shutdown()
    except (KeyError, TypeError, ValueError) as exc:
        raise MalformedPayload(f"bad {t} payload: {exc}") from exc
    raise UnknownType(f"unknown message type {t!r}")


def encode_payload(payload: bytes) -> bytes:
    if len(payload) > MAX_PAYLOAD:
        raise FrameTooLarge(f"payload of {len(payload)} bytes exceeds {MAX_PAYLOAD}")
    return _HEADER.pack(len(payload)) + payload


def serialize_message(msg) -> bytes:
    payload = json.dumps(message_to_dict(msg), separators=(",", ":"), sort_keys=True,
                         allow_nan=False).encode("utf-8")
    return encode_payload(payload)


def frame_length(header: bytes) -> int:
    if len(header) != _HEADER.size:
        raise MalformedPayload("truncated frame header")
    (n,) = _HEADER.unpack(header)
    if n > MAX_PAYLOAD:
        raise FrameTooLarge(f"declared payload of {n} bytes exceeds {MAX_PAYLOAD}")
    return n


def decode_payload(payload: bytes):
    try:
        d = json.loads(payload.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise MalformedPayload(f"payload is not UTF-8 JSON: {exc}") from exc
    return message_from_dict(d)


def deserialize_message(frame: bytes):
    n = frame_length(frame[:_HEADER.size])
    payload = frame[_HEADER.size:]
    if len(payload) != n:
        raise MalformedPayload(f"frame declares {n} payload bytes but carries {len(payload)}")
    return decode_payload(payload)
