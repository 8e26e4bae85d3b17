"""JSON model files.

Every file holds one object::

    {"format_version": "1", "type": "<commuting|tensor|quansal|behavior>", "payload": {...}}

Complex numbers are ``[re, im]`` pairs, matrices are row-major nested lists of
them.  Floats are written with ``repr`` precision, so ``load(store(x))``
reproduces every entry bit for bit.
"""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .models import Behavior, CommutingModel, Measurement, QuansalModel, Scenario, TensorModel

FORMAT_VERSION = "1"
TYPE_TAGS = ("commuting", "tensor", "quansal", "behavior")


class SchemaError(ValueError):
    pass


def encode_matrix(M: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(M, dtype=complex)]


def decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim != 3 or arr.shape[2] != 2:
        raise SchemaError(f"matrix must be a nested list of [re, im] pairs, got shape {arr.shape}")
    out = np.empty(arr.shape[:2], dtype=np.complex128)
    out.real, out.imag = arr[..., 0], arr[..., 1]
    return out


def encode_scenario(s: Scenario) -> dict:
    return {"outcomes_a": list(s.outcomes_a), "outcomes_b": list(s.outcomes_b)}


def decode_scenario(d: dict) -> Scenario:
    return Scenario(tuple(d["outcomes_a"]), tuple(d["outcomes_b"]))


def encode_measurement(m: Measurement) -> dict:
    return {"kind": m.kind, "operators": [encode_matrix(E) for E in m]}


def decode_measurement(d: dict) -> Measurement:
    return Measurement(tuple(decode_matrix(E) for E in d["operators"]), d.get("kind", "projective"))


def encode_behavior(p: Behavior) -> dict:
    return {
        "scenario": encode_scenario(p.scenario),
        "table": [[cell.tolist() for cell in row] for row in p.table],
    }


def decode_behavior(d: dict) -> Behavior:
    return Behavior(decode_scenario(d["scenario"]), tuple(tuple(np.asarray(c, dtype=float) for c in row) for row in d["table"]))


def encode(obj) -> dict:
    if isinstance(obj, CommutingModel):
        tag, payload = "commuting", {
            "dim": obj.dim,
            "rho": encode_matrix(obj.rho),
            "alice": [encode_measurement(m) for m in obj.alice],
            "bob": [encode_measurement(m) for m in obj.bob],
        }
    elif isinstance(obj, TensorModel):
        tag, payload = "tensor", {
            "dim_a": obj.dim_a,
            "dim_b": obj.dim_b,
            "rho_ab": encode_matrix(obj.rho_ab),
            "alice": [encode_measurement(m) for m in obj.alice],
            "bob": [encode_measurement(m) for m in obj.bob],
        }
    elif isinstance(obj, QuansalModel):
        tag, payload = "quansal", {
            "dim_b": obj.dim_b,
            "sigma": encode_matrix(obj.sigma),
            "sigma_family": [[encode_matrix(s) for s in row] for row in obj.sigma_family],
            "bob": [encode_measurement(m) for m in obj.bob],
        }
    elif isinstance(obj, Behavior):
        tag, payload = "behavior", encode_behavior(obj)
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")
    return {"format_version": FORMAT_VERSION, "type": tag, "payload": payload}


def decode(doc: dict):
    if not isinstance(doc, dict):
        raise SchemaError("top level must be an object")
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise SchemaError(f"unsupported format_version {version!r}")
    tag = doc.get("type")
    p = doc.get("payload")
    if tag not in TYPE_TAGS or not isinstance(p, dict):
        raise SchemaError(f"unknown type tag {tag!r}")
    try:
        if tag == "commuting":
            m = CommutingModel(
                decode_matrix(p["rho"]),
                tuple(decode_measurement(x) for x in p["alice"]),
                tuple(decode_measurement(x) for x in p["bob"]),
            )
            if m.dim != p["dim"]:
                raise SchemaError("dim does not match rho")
            return m
        if tag == "tensor":
            return TensorModel(
                int(p["dim_a"]),
                int(p["dim_b"]),
                decode_matrix(p["rho_ab"]),
                tuple(decode_measurement(x) for x in p["alice"]),
                tuple(decode_measurement(x) for x in p["bob"]),
            )
        if tag == "quansal":
            q = QuansalModel(
                tuple(tuple(decode_matrix(s) for s in row) for row in p["sigma_family"]),
                tuple(decode_measurement(x) for x in p["bob"]),
                sigma=decode_matrix(p["sigma"]),
            )
            if q.dim_b != p["dim_b"]:
                raise SchemaError("dim_b does not match sigma")
            return q
        return decode_behavior(p)
    except SchemaError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"malformed {tag} payload: {exc}") from exc


def dumps(obj) -> str:
    return json.dumps(encode(obj), indent=None, separators=(",", ":")) + "\n"


def loads(text: str):
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc
    return decode(doc)


def atomic_write_text(path, text: str) -> None:
    """Write via a temporary file in the target directory, then rename."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save(obj, path) -> None:
    atomic_write_text(path, dumps(obj))


def load(path):
    return loads(Path(path).read_text(encoding="utf-8"))
