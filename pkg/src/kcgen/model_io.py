"""Versioned model artifact files: JSON envelope with little-endian
float32 tensor payloads (base64) and a content checksum."""

from __future__ import annotations

import base64
import hashlib
import json

import numpy as np

FORMAT_VERSION = 1


class ArtifactError(Exception):
    pass


def _encode_tensor(arr: np.ndarray) -> dict:
    data = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return {
        "shape": list(arr.shape),
        "dtype": "float32",
        "data": base64.b64encode(data).decode("ascii"),
    }


def _decode_tensor(spec: dict) -> np.ndarray:
    raw = base64.b64decode(spec["data"])
    arr = np.frombuffer(raw, dtype="<f4").reshape(spec["shape"])
    return arr.astype(np.float64)


def _tensor_checksum(tensors: dict) -> str:
    digest = hashlib.sha256()
    for name in sorted(tensors):
        digest.update(name.encode("utf-8"))
        digest.update(base64.b64decode(tensors[name]["data"]))
    return digest.hexdigest()


def save_artifact(path, kind: str, meta: dict, tensors: dict[str, np.ndarray], vocab=None):
    payload = {name: _encode_tensor(arr) for name, arr in tensors.items()}
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "meta": meta,
        "vocab": vocab,
        "tensors": payload,
        "checksum": _tensor_checksum(payload),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_artifact(path, expect_kind: str | None = None):
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if doc.get("format_version") != FORMAT_VERSION:
        raise ArtifactError(f"unsupported format version: {doc.get('format_version')}")
    if expect_kind is not None and doc.get("kind") != expect_kind:
        raise ArtifactError(f"expected {expect_kind!r} artifact, got {doc.get('kind')!r}")
    if _tensor_checksum(doc["tensors"]) != doc["checksum"]:
        raise ArtifactError("tensor checksum mismatch")
    tensors = {name: _decode_tensor(spec) for name, spec in doc["tensors"].items()}
    return doc["meta"], tensors, doc.get("vocab")
