"""Run manifest and atomic artifact bookkeeping tests."""

import hashlib
import json
import os

from kcgen.manifest import RunManifest, atomic_write_text, sha256_bytes, sha256_file


class TestHashing:
    def test_sha256_file_matches_hashlib(self, tmp_path):
        path = tmp_path / "blob.bin"
        path.write_bytes(b"some artifact bytes" * 1000)
        assert sha256_file(path) == hashlib.sha256(path.read_bytes()).hexdigest()

    def test_sha256_bytes(self):
        assert sha256_bytes(b"") == hashlib.sha256(b"").hexdigest()


class TestAtomicWrite:
    def test_creates_parent_dirs_and_leaves_no_temp(self, tmp_path):
        target = tmp_path / "a" / "b" / "out.json"
        atomic_write_text(target, "{}\n")
        assert target.read_text() == "{}\n"
        assert list(target.parent.iterdir()) == [target]

    def test_overwrite_replaces_content(self, tmp_path):
        target = tmp_path / "out.txt"
        atomic_write_text(target, "old")
        atomic_write_text(target, "new")
        assert target.read_text() == "new"


class TestRunManifest:
    def make_manifest(self, tmp_path):
        art = tmp_path / "artifact.jsonl"
        art.write_text('{"x":1}\n')
        manifest = RunManifest.for_config({"seed": 7, "k": 8})
        manifest.record_stage(
            "discover", inputs={}, outputs={"artifact": str(art)},
            seeds={"kmeans": 7}, elapsed_s=0.5,
        )
        return manifest, art

    def test_run_id_is_stable_for_config(self):
        a = RunManifest.for_config({"k": 8, "seed": 7})
        b = RunManifest.for_config({"seed": 7, "k": 8})
        c = RunManifest.for_config({"seed": 8, "k": 8})
        assert a.run_id == b.run_id
        assert a.run_id != c.run_id

    def test_save_load_roundtrip(self, tmp_path):
        manifest, _ = self.make_manifest(tmp_path)
        path = tmp_path / "manifest.json"
        manifest.save(path)
        loaded = RunManifest.load(path)
        assert loaded.run_id == manifest.run_id
        assert loaded.stages == manifest.stages
        json.loads(path.read_text())

    def test_verify_artifacts_clean(self, tmp_path):
        manifest, _ = self.make_manifest(tmp_path)
        assert manifest.verify_artifacts() == []

    def test_verify_artifacts_detects_tampering(self, tmp_path):
        manifest, art = self.make_manifest(tmp_path)
        art.write_text('{"x":2}\n')
        problems = manifest.verify_artifacts()
        assert len(problems) == 1
        assert "hash mismatch" in problems[0]

    def test_verify_artifacts_detects_missing_file(self, tmp_path):
        manifest, art = self.make_manifest(tmp_path)
        os.remove(art)
        problems = manifest.verify_artifacts()
        assert len(problems) == 1
        assert "missing" in problems[0]

    def test_stage_record_fields(self, tmp_path):
        manifest, art = self.make_manifest(tmp_path)
        rec = manifest.stages["discover"]
        assert rec["status"] == "ok"
        assert rec["seeds"] == {"kmeans": 7}
        assert rec["outputs"]["artifact"] == sha256_file(art)
