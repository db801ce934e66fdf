"""Run manifests: content-hashed artifact tracking with atomic writes."""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, field


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file + rename so readers never see partial content."""
    path = os.fspath(path)
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


@dataclass
class RunManifest:
    run_id: str
    config: dict
    stages: dict = field(default_factory=dict)  # stage -> record

    @classmethod
    def for_config(cls, config: dict) -> "RunManifest":
        snapshot = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
        return cls(run_id=sha256_bytes(snapshot.encode("utf-8"))[:16], config=config)

    def record_stage(self, stage: str, inputs: dict, outputs: dict, seeds: dict,
                     elapsed_s: float, error: str | None = None) -> None:
        self.stages[stage] = {
            "inputs": {name: sha256_file(p) for name, p in inputs.items()},
            "outputs": {name: sha256_file(p) for name, p in outputs.items()},
            "input_paths": {name: os.fspath(p) for name, p in inputs.items()},
            "output_paths": {name: os.fspath(p) for name, p in outputs.items()},
            "seeds": seeds,
            "elapsed_s": round(elapsed_s, 3),
            "status": "error" if error else "ok",
            **({"error": error} if error else {}),
        }

    def to_json(self) -> str:
        doc = {"run_id": self.run_id, "config": self.config, "stages": self.stages}
        return json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n"

    def save(self, path) -> None:
        atomic_write_text(path, self.to_json())

    @classmethod
    def load(cls, path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        return cls(run_id=doc["run_id"], config=doc["config"], stages=doc["stages"])

    def verify_artifacts(self) -> list[str]:
        """Return a list of mismatch descriptions (empty when all hashes check out)."""
        problems = []
        for stage, rec in self.stages.items():
            for name, path in rec.get("output_paths", {}).items():
                expect = rec["outputs"][name]
                if not os.path.exists(path):
                    problems.append(f"{stage}:{name}: missing {path}")
                elif sha256_file(path) != expect:
                    problems.append(f"{stage}:{name}: hash mismatch for {path}")
        return problems


class StageTimer:
    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.monotonic() - self.start
        return False
