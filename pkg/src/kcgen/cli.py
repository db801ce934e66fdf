"""Command-line pipeline runner.

Stages run in the canonical order sample → discover → infer → enrich →
generate → evaluate. Each stage reads the previous stage's artifacts from
the output directory, and every completed stage is recorded in a run
manifest with content hashes, so runs are resumable and auditable.

Exit codes: 0 success, 1 usage, 2 data error, 3 upstream-service error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import llm, prompts
from .corpus import (
    Corpus,
    CorpusError,
    last_incorrect_attempts,
    load_corpus,
    sample_submissions,
)
from .discovery import (
    DiscoveryError,
    KcInventory,
    build_inventory,
    context_representations,
    kc_targets,
    submission_scored_subtrees,
)
from .javaparse import JavaSyntaxError, parse_program
from .manifest import RunManifest, StageTimer, atomic_write_text, sha256_file
from .model_io import ArtifactError
from .sann import SannHyperparams, SannModel, train_sann
from .stats import (
    RatingsError,
    format_summary_table,
    load_ratings,
    pair_ratings,
    summarize,
    summary_to_json,
)
from .subtrees import extract_subtrees, normalize_subtree
from .vae import VaeHyperparams, VaeModel, encode_latent, train_vae

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_UPSTREAM = 3

STAGE_ORDER = ("sample", "discover", "infer", "enrich", "generate", "evaluate")

ARTIFACTS = {
    "sampled": "sampled.jsonl",
    "sann": "model.sann",
    "vae": "model.vae",
    "inventory": "inventory.json",
    "assignments": "assignments.jsonl",
    "enriched": "inventory_enriched.json",
    "enrichments": "enrichments.jsonl",
    "examples": "examples.jsonl",
    "summary": "summary.json",
    "summary_table": "summary.txt",
    "manifest": "manifest.json",
}


class CliDataError(Exception):
    """Bad input data or missing upstream artifact (exit code 2)."""


# --- Configuration ---------------------------------------------------------


@dataclass
class PipelineConfig:
    submissions: str = ""
    problems: str = ""
    sample_n: int = 50
    sample_seed: int = 0
    sample_problems: list = field(default_factory=list)  # empty = all problems
    min_nodes: int = 3
    max_nodes: int = 60
    sann: SannHyperparams = field(default_factory=SannHyperparams)
    vae_d_z: int = 16
    vae_d_hidden: int = 64
    vae_beta: float = 1.0
    vae_learning_rate: float = 0.01
    vae_epochs: int = 200
    vae_batch_size: int = 32
    vae_seed: int = 0
    k: int = 50
    attention_threshold: float = 0.5
    target_cap: int = 5
    discovery_seed: int = 0
    llm: llm.LlmConfig = field(default_factory=lambda: llm.LlmConfig(endpoint="stub://canned"))
    template_dir: str | None = None
    output_root: str = "runs"
    ratings: str | None = None
    pairs: str | None = None

    def to_snapshot(self) -> dict:
        doc = {
            "submissions": self.submissions,
            "problems": self.problems,
            "sample": {"n": self.sample_n, "seed": self.sample_seed,
                       "problems": list(self.sample_problems)},
            "subtrees": {"min_nodes": self.min_nodes, "max_nodes": self.max_nodes},
            "sann": self.sann.to_dict(),
            "vae": {"d_z": self.vae_d_z, "d_hidden": self.vae_d_hidden,
                    "beta": self.vae_beta, "learning_rate": self.vae_learning_rate,
                    "epochs": self.vae_epochs, "batch_size": self.vae_batch_size,
                    "seed": self.vae_seed},
            "discovery": {"k": self.k, "attention_threshold": self.attention_threshold,
                          "target_cap": self.target_cap, "seed": self.discovery_seed},
            "llm": {"endpoint": self.llm.endpoint, "model": self.llm.model,
                    "api_key_env": self.llm.api_key_env, "timeout": self.llm.timeout,
                    "max_retries": self.llm.max_retries,
                    "parallelism": self.llm.parallelism},
            "template_dir": self.template_dir,
            "output_root": self.output_root,
            "ratings": self.ratings,
            "pairs": self.pairs,
        }
        return doc


def load_config(path) -> PipelineConfig:
    try:
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
    except FileNotFoundError:
        raise CliDataError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise CliDataError(f"invalid config file {path}: {exc}")
    cfg = PipelineConfig()
    corpus = doc.get("corpus", {})
    cfg.submissions = corpus.get("submissions", cfg.submissions)
    cfg.problems = corpus.get("problems", cfg.problems)
    sample = doc.get("sample", {})
    cfg.sample_n = int(sample.get("n", cfg.sample_n))
    cfg.sample_seed = int(sample.get("seed", cfg.sample_seed))
    cfg.sample_problems = list(sample.get("problems", []))
    sub = doc.get("subtrees", {})
    cfg.min_nodes = int(sub.get("min_nodes", cfg.min_nodes))
    cfg.max_nodes = int(sub.get("max_nodes", cfg.max_nodes))
    sann = doc.get("sann", {})
    cfg.sann = SannHyperparams(
        d_emb=int(sann.get("d_emb", cfg.sann.d_emb)),
        d_enc=int(sann.get("d_enc", cfg.sann.d_enc)),
        learning_rate=float(sann.get("learning_rate", cfg.sann.learning_rate)),
        epochs=int(sann.get("epochs", cfg.sann.epochs)),
        batch_size=int(sann.get("batch_size", cfg.sann.batch_size)),
        seed=int(sann.get("seed", cfg.sann.seed)),
    )
    vae = doc.get("vae", {})
    cfg.vae_d_z = int(vae.get("d_z", cfg.vae_d_z))
    cfg.vae_d_hidden = int(vae.get("d_hidden", cfg.vae_d_hidden))
    cfg.vae_beta = float(vae.get("beta", cfg.vae_beta))
    cfg.vae_learning_rate = float(vae.get("learning_rate", cfg.vae_learning_rate))
    cfg.vae_epochs = int(vae.get("epochs", cfg.vae_epochs))
    cfg.vae_batch_size = int(vae.get("batch_size", cfg.vae_batch_size))
    cfg.vae_seed = int(vae.get("seed", cfg.vae_seed))
    disc = doc.get("discovery", {})
    cfg.k = int(disc.get("k", cfg.k))
    cfg.attention_threshold = float(disc.get("attention_threshold", cfg.attention_threshold))
    cfg.target_cap = int(disc.get("target_cap", cfg.target_cap))
    cfg.discovery_seed = int(disc.get("seed", cfg.discovery_seed))
    lc = doc.get("llm", {})
    cfg.llm = llm.LlmConfig(
        endpoint=lc.get("endpoint", cfg.llm.endpoint),
        model=lc.get("model", cfg.llm.model),
        api_key_env=lc.get("api_key_env", cfg.llm.api_key_env),
        timeout=float(lc.get("timeout", cfg.llm.timeout)),
        max_retries=int(lc.get("max_retries", cfg.llm.max_retries)),
        parallelism=int(lc.get("parallelism", cfg.llm.parallelism)),
        backoff_base=float(lc.get("backoff_base", cfg.llm.backoff_base)),
    )
    templates = doc.get("templates", {})
    cfg.template_dir = templates.get("dir")
    output = doc.get("output", {})
    cfg.output_root = output.get("root", cfg.output_root)
    ev = doc.get("evaluate", {})
    cfg.ratings = ev.get("ratings")
    cfg.pairs = ev.get("pairs")
    return cfg


# --- Shared helpers --------------------------------------------------------


def _require(path, producer_stage):
    if not os.path.exists(path):
        raise CliDataError(
            f"missing artifact {path}; run the {producer_stage!r} stage first"
        )
    return path


def _read_jsonl(path):
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise CliDataError(f"{path} line {lineno}: invalid JSON ({exc})")
    return out


def _write_jsonl(path, records):
    text = "".join(
        json.dumps(rec, sort_keys=True, separators=(",", ":")) + "\n" for rec in records
    )
    atomic_write_text(path, text)


def _load_pipeline_corpus(cfg: PipelineConfig) -> Corpus:
    if not cfg.submissions or not cfg.problems:
        raise CliDataError("config must set corpus.submissions and corpus.problems")
    return load_corpus(cfg.submissions, cfg.problems)


def _normalized_subtrees(code: str, min_nodes: int, max_nodes: int):
    root = parse_program(code)
    return [normalize_subtree(s) for s in extract_subtrees(root, min_nodes, max_nodes)]


def _kc_label_for(kc_id: int, kc_meta: dict) -> prompts.KcLabel:
    meta = kc_meta.get(kc_id)
    if meta and meta.get("label"):
        return prompts.KcLabel(kc_id=kc_id, label=meta["label"],
                               description=meta["description"])
    return prompts.KcLabel(
        kc_id=kc_id,
        label=f"Recurring code pattern {kc_id}",
        description="A recurring structural pattern identified in student code.",
    )


# --- Pipeline stages -------------------------------------------------------


def stage_sample(cfg: PipelineConfig, out_dir: str) -> dict:
    corpus = _load_pipeline_corpus(cfg)
    problem_ids = cfg.sample_problems or sorted(corpus.problems)
    sampled = []
    for pid in problem_ids:
        candidates = last_incorrect_attempts(corpus, pid)
        if not candidates:
            continue
        n = min(cfg.sample_n, len(candidates))
        sampled.extend(sample_submissions(candidates, n, cfg.sample_seed))
    if not sampled:
        raise CliDataError("sampling produced no submissions")
    out_path = os.path.join(out_dir, ARTIFACTS["sampled"])
    _write_jsonl(out_path, [s.to_record() for s in sampled])
    return {
        "inputs": {"submissions": cfg.submissions, "problems": cfg.problems},
        "outputs": {"sampled": out_path},
        "seeds": {"sample": cfg.sample_seed},
    }


def stage_discover(cfg: PipelineConfig, out_dir: str) -> dict:
    corpus = _load_pipeline_corpus(cfg)
    pairs = []
    skipped = 0
    for sub in corpus.submissions:
        try:
            normalized = _normalized_subtrees(sub.code, cfg.min_nodes, cfg.max_nodes)
        except JavaSyntaxError:
            skipped += 1
            continue
        if normalized:
            pairs.append((normalized, sub.is_correct))
    if skipped:
        print(f"discover: skipped {skipped} unparseable submission(s)", file=sys.stderr)
    if not pairs:
        raise CliDataError("no parseable submissions with eligible subtrees")
    sann = train_sann(pairs, cfg.sann, seed=cfg.sann.seed)
    sann_path = os.path.join(out_dir, ARTIFACTS["sann"])
    sann.save(sann_path)

    reps = []
    for sub in corpus.submissions:
        if not sub.is_correct:
            continue
        try:
            scored = submission_scored_subtrees(
                sub, sann, cfg.attention_threshold, cfg.min_nodes, cfg.max_nodes
            )
        except DiscoveryError:
            continue
        reps.extend(context_representations(scored))
    if not reps:
        raise CliDataError("no context representations from correct submissions")
    x = np.stack(reps)
    vae_hp = VaeHyperparams(
        d_in=x.shape[1], d_hidden=cfg.vae_d_hidden, d_z=cfg.vae_d_z,
        beta=cfg.vae_beta, learning_rate=cfg.vae_learning_rate,
        epochs=cfg.vae_epochs, batch_size=cfg.vae_batch_size, seed=cfg.vae_seed,
    )
    vae = train_vae(x, vae_hp, seed=cfg.vae_seed)
    vae_path = os.path.join(out_dir, ARTIFACTS["vae"])
    vae.save(vae_path)

    zs = np.stack([encode_latent(vae, xi) for xi in x])
    inventory = build_inventory(
        zs, k=cfg.k, seed=cfg.discovery_seed,
        provenance={"n_latents": int(zs.shape[0]), "seed": cfg.discovery_seed},
    )
    inv_path = os.path.join(out_dir, ARTIFACTS["inventory"])
    inventory.save(inv_path)
    return {
        "inputs": {"submissions": cfg.submissions, "problems": cfg.problems},
        "outputs": {"sann": sann_path, "vae": vae_path, "inventory": inv_path},
        "seeds": {"sann": cfg.sann.seed, "vae": cfg.vae_seed,
                  "kmeans": cfg.discovery_seed},
    }


def stage_infer(cfg: PipelineConfig, out_dir: str, submission_id=None) -> dict:
    sampled_path = _require(os.path.join(out_dir, ARTIFACTS["sampled"]), "sample")
    sann_path = _require(os.path.join(out_dir, ARTIFACTS["sann"]), "discover")
    vae_path = _require(os.path.join(out_dir, ARTIFACTS["vae"]), "discover")
    inv_path = _require(os.path.join(out_dir, ARTIFACTS["inventory"]), "discover")

    corpus = _load_pipeline_corpus(cfg)
    by_id = {s.submission_id: s for s in corpus.submissions}
    sampled_ids = [rec["submission_id"] for rec in _read_jsonl(sampled_path)]
    if submission_id is not None:
        if submission_id not in by_id:
            raise CliDataError(f"unknown submission_id: {submission_id!r}")
        sampled_ids = [submission_id]
    sann = SannModel.load(sann_path)
    vae = VaeModel.load(vae_path)
    inventory = KcInventory.load(inv_path)

    records = []
    for sid in sampled_ids:
        sub = by_id.get(sid)
        if sub is None:
            records.append({"submission_id": sid, "error": "not in corpus"})
            continue
        try:
            assignment = kc_targets(
                sub, sann, vae, inventory,
                threshold=cfg.attention_threshold, target_cap=cfg.target_cap,
                min_nodes=cfg.min_nodes, max_nodes=cfg.max_nodes,
            )
        except DiscoveryError as exc:
            records.append({"submission_id": sid, "error": str(exc)})
            continue
        records.append(assignment.to_record())
    out_path = os.path.join(out_dir, ARTIFACTS["assignments"])
    _write_jsonl(out_path, records)
    return {
        "inputs": {"sampled": sampled_path, "sann": sann_path,
                   "vae": vae_path, "inventory": inv_path},
        "outputs": {"assignments": out_path},
        "seeds": {},
    }


def stage_enrich(cfg: PipelineConfig, out_dir: str) -> dict:
    assignments_path = _require(os.path.join(out_dir, ARTIFACTS["assignments"]), "infer")
    inv_path = _require(os.path.join(out_dir, ARTIFACTS["inventory"]), "discover")
    corpus = _load_pipeline_corpus(cfg)
    by_id = {s.submission_id: s for s in corpus.submissions}
    inventory = KcInventory.load(inv_path)
    transcripts = os.path.join(out_dir, "transcripts", "enrich")
    llm.ensure_ready(cfg.llm)

    enrichment_records = []
    for rec in _read_jsonl(assignments_path):
        if "error" in rec:
            continue
        sub = by_id.get(rec["submission_id"])
        if sub is None:
            continue
        problem = corpus.problems[sub.problem_id]
        for target in rec["targets"]:
            kc_id = int(target["kc_id"])
            snippet = target["snippet"] or " ".join(target["tokens"])
            bundle = prompts.build_enrichment_prompt(
                problem, sub, snippet, kc_id, template_dir=cfg.template_dir
            )
            try:
                label = llm.complete_with_format_retry(
                    cfg.llm, bundle,
                    lambda text: prompts.parse_enrichment_response(text, kc_id=kc_id),
                    transcript_dir=transcripts,
                )
            except (llm.LlmError, prompts.ResponseFormatError) as exc:
                enrichment_records.append(
                    {"submission_id": sub.submission_id, "kc_id": kc_id,
                     "error": str(exc)}
                )
                continue
            enrichment_records.append(
                {"submission_id": sub.submission_id, "kc_id": kc_id,
                 "label": label.label, "description": label.description}
            )
            # first successful enrichment wins for the shared inventory entry
            inventory.kc_meta.setdefault(
                kc_id, {"label": label.label, "description": label.description}
            )
    enriched_path = os.path.join(out_dir, ARTIFACTS["enriched"])
    inventory.save(enriched_path)
    enrichments_path = os.path.join(out_dir, ARTIFACTS["enrichments"])
    _write_jsonl(enrichments_path, enrichment_records)
    return {
        "inputs": {"assignments": assignments_path, "inventory": inv_path},
        "outputs": {"enriched": enriched_path, "enrichments": enrichments_path},
        "seeds": {},
    }


def stage_generate(cfg: PipelineConfig, out_dir: str, variant: str = "both") -> dict:
    assignments_path = _require(os.path.join(out_dir, ARTIFACTS["assignments"]), "infer")
    enriched_path = os.path.join(out_dir, ARTIFACTS["enriched"])
    inv_path = enriched_path if os.path.exists(enriched_path) else _require(
        os.path.join(out_dir, ARTIFACTS["inventory"]), "discover"
    )
    corpus = _load_pipeline_corpus(cfg)
    by_id = {s.submission_id: s for s in corpus.submissions}
    inventory = KcInventory.load(inv_path)
    transcripts = os.path.join(out_dir, "transcripts", "generate")
    llm.ensure_ready(cfg.llm)
    variants = (
        [prompts.BASELINE, prompts.KC_CONDITIONED] if variant == "both" else [variant]
    )

    jobs = []
    for rec in _read_jsonl(assignments_path):
        if "error" in rec:
            continue
        sub = by_id.get(rec["submission_id"])
        if sub is None:
            continue
        targets = [
            _kc_label_for(int(t["kc_id"]), inventory.kc_meta) for t in rec["targets"]
        ]
        for var in variants:
            jobs.append((sub, var, targets))

    def run_job(job):
        sub, var, targets = job
        problem = corpus.problems[sub.problem_id]
        var_targets = targets if var == prompts.KC_CONDITIONED else []
        try:
            bundle = prompts.build_worked_example_prompt(
                problem, sub, var, var_targets, template_dir=cfg.template_dir
            )
            example = llm.complete_with_format_retry(
                cfg.llm, bundle,
                lambda text: prompts.parse_worked_example(text, var, var_targets),
                transcript_dir=transcripts,
            )
        except llm.LlmError as exc:
            return {"submission_id": sub.submission_id, "variant": var,
                    "error": str(exc), "error_kind": "llm"}
        except (prompts.ResponseFormatError, prompts.PromptError) as exc:
            return {"submission_id": sub.submission_id, "variant": var,
                    "error": str(exc), "error_kind": "format"}
        return {"submission_id": sub.submission_id, "variant": var,
                "example": example.to_record()}

    if cfg.llm.parallelism > 1:
        with ThreadPoolExecutor(max_workers=cfg.llm.parallelism) as pool:
            results = list(pool.map(run_job, jobs))
    else:
        results = [run_job(job) for job in jobs]
    out_path = os.path.join(out_dir, ARTIFACTS["examples"])
    _write_jsonl(out_path, results)
    llm_failures = [r for r in results if r.get("error_kind") == "llm"]
    if jobs and len(llm_failures) == len(jobs):
        raise llm.LlmError(
            f"all {len(jobs)} completion requests failed: {llm_failures[0]['error']}"
        )
    failures = sum(1 for r in results if "error" in r)
    if failures:
        print(f"generate: {failures} example(s) failed; see {out_path}", file=sys.stderr)
    return {
        "inputs": {"assignments": assignments_path, "inventory": inv_path},
        "outputs": {"examples": out_path},
        "seeds": {},
    }


def stage_evaluate(cfg: PipelineConfig, out_dir: str) -> dict:
    if not cfg.ratings or not cfg.pairs:
        raise CliDataError("config must set evaluate.ratings and evaluate.pairs")
    scores = load_ratings(cfg.ratings)
    pairs_spec = _read_jsonl(cfg.pairs)
    pairs = pair_ratings(scores, pairs_spec)
    summary = summarize(pairs)
    summary_path = os.path.join(out_dir, ARTIFACTS["summary"])
    atomic_write_text(summary_path, summary_to_json(summary))
    table_path = os.path.join(out_dir, ARTIFACTS["summary_table"])
    atomic_write_text(table_path, format_summary_table(summary))
    return {
        "inputs": {"ratings": cfg.ratings, "pairs": cfg.pairs},
        "outputs": {"summary": summary_path, "summary_table": table_path},
        "seeds": {},
    }


STAGE_FUNCS = {
    "sample": stage_sample,
    "discover": stage_discover,
    "infer": stage_infer,
    "enrich": stage_enrich,
    "generate": stage_generate,
    "evaluate": stage_evaluate,
}


def run_pipeline(cfg: PipelineConfig, stages, out_dir: str) -> RunManifest:
    """Run the requested stages in canonical order, updating the manifest."""
    unknown = [s for s in stages if s not in STAGE_ORDER]
    if unknown:
        raise CliDataError(f"unknown stage(s): {', '.join(unknown)}")
    ordered = [s for s in STAGE_ORDER if s in stages]
    os.makedirs(out_dir, exist_ok=True)
    manifest_path = os.path.join(out_dir, ARTIFACTS["manifest"])
    if os.path.exists(manifest_path):
        manifest = RunManifest.load(manifest_path)
    else:
        manifest = RunManifest.for_config(cfg.to_snapshot())
    for stage in ordered:
        with StageTimer() as timer:
            result = STAGE_FUNCS[stage](cfg, out_dir)
        manifest.record_stage(
            stage, result["inputs"], result["outputs"], result["seeds"], timer.elapsed
        )
        manifest.save(manifest_path)
    return manifest


# --- Argument parsing ------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="kc", description="Knowledge-component discovery pipeline")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    corpus_p = sub.add_parser("corpus", help="corpus operations")
    corpus_sub = corpus_p.add_subparsers(dest="subcommand", required=True,
                                         parser_class=_Parser)
    p = corpus_sub.add_parser("sample", help="sample last-incorrect attempts")
    p.add_argument("--problem", required=True)
    p.add_argument("--n", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--in", dest="submissions", required=True)
    p.add_argument("--problems", required=True)
    p.add_argument("--out", required=True)

    ast_p = sub.add_parser("ast", help="AST operations")
    ast_sub = ast_p.add_subparsers(dest="subcommand", required=True,
                                   parser_class=_Parser)
    p = ast_sub.add_parser("extract", help="extract normalized subtrees")
    p.add_argument("--in", dest="submissions", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-nodes", type=int, default=3)
    p.add_argument("--max-nodes", type=int, default=60)

    sann_p = sub.add_parser("sann", help="attention model operations")
    sann_sub = sann_p.add_subparsers(dest="subcommand", required=True,
                                     parser_class=_Parser)
    p = sann_sub.add_parser("train", help="train the attention classifier")
    p.add_argument("--subtrees", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config")

    for name in ("sample", "discover", "infer", "enrich", "generate", "evaluate", "run"):
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument("--config", required=True)
        p.add_argument("--out", help="run output directory (default: <output root>/default)")
        if name == "infer":
            p.add_argument("--submission", help="restrict to one submission id")
        if name == "generate":
            p.add_argument("--variant", choices=["baseline", "kc_conditioned", "both"],
                           default="both")
        if name == "evaluate":
            p.add_argument("--ratings", help="override evaluate.ratings from the config")
            p.add_argument("--pairs", help="override evaluate.pairs from the config")
        if name == "run":
            p.add_argument("--stages",
                           help="comma-separated subset of " + ",".join(STAGE_ORDER))
    return parser


# --- Standalone (non-pipeline) commands ------------------------------------


def cmd_corpus_sample(args) -> int:
    corpus = load_corpus(args.submissions, args.problems)
    candidates = last_incorrect_attempts(corpus, args.problem)
    if not candidates:
        raise CliDataError(f"no incorrect attempts for problem {args.problem!r}")
    n = min(args.n, len(candidates))
    sampled = sample_submissions(candidates, n, args.seed)
    _write_jsonl(args.out, [s.to_record() for s in sampled])
    print(f"sampled {len(sampled)} submission(s) -> {args.out}")
    return EXIT_OK


def cmd_ast_extract(args) -> int:
    records = []
    skipped = 0
    for rec in _read_jsonl(args.submissions):
        sid = rec.get("submission_id", "?")
        try:
            normalized = _normalized_subtrees(rec["code"], args.min_nodes, args.max_nodes)
        except JavaSyntaxError as exc:
            print(f"ast extract: skipping {sid}: {exc}", file=sys.stderr)
            skipped += 1
            continue
        for ns in normalized:
            entry = ns.to_record()
            entry["submission_id"] = sid
            records.append(entry)
    _write_jsonl(args.out, records)
    print(f"extracted {len(records)} subtree(s) "
          f"({skipped} submission(s) skipped) -> {args.out}")
    return EXIT_OK


def cmd_sann_train(args) -> int:
    labels = {}
    for rec in _read_jsonl(args.labels):
        labels[rec["submission_id"]] = bool(rec["is_correct"])
    grouped: dict[str, list] = {}
    for rec in _read_jsonl(args.subtrees):
        grouped.setdefault(rec["submission_id"], []).append(tuple(rec["tokens"]))
    pairs = [
        (grouped[sid], lbl) for sid, lbl in labels.items() if grouped.get(sid)
    ]
    if not pairs:
        raise CliDataError("no labeled submissions with subtrees")
    hp = load_config(args.config).sann if args.config else SannHyperparams()
    model = train_sann(pairs, hp, seed=args.seed)
    model.save(args.out)
    print(f"trained on {len(pairs)} submission(s); "
          f"final epoch loss {model.loss_trace[-1]:.4f} -> {args.out}")
    return EXIT_OK


def _resolve_out_dir(cfg: PipelineConfig, args) -> str:
    if getattr(args, "out", None):
        return args.out
    return os.path.join(cfg.output_root, "default")


def cmd_stage(args) -> int:
    cfg = load_config(args.config)
    if getattr(args, "ratings", None):
        cfg.ratings = args.ratings
    if getattr(args, "pairs", None):
        cfg.pairs = args.pairs
    out_dir = _resolve_out_dir(cfg, args)
    if args.command == "run":
        stages = (
            [s.strip() for s in args.stages.split(",") if s.strip()]
            if args.stages
            else [s for s in STAGE_ORDER
                  if s != "evaluate" or (cfg.ratings and cfg.pairs)]
        )
        manifest = run_pipeline(cfg, stages, out_dir)
        print(f"run {manifest.run_id}: completed {', '.join(s for s in STAGE_ORDER if s in stages)}")
        print(f"manifest: {os.path.join(out_dir, ARTIFACTS['manifest'])}")
        return EXIT_OK
    os.makedirs(out_dir, exist_ok=True)
    with StageTimer() as timer:
        if args.command == "infer":
            result = stage_infer(cfg, out_dir, submission_id=args.submission)
        elif args.command == "generate":
            result = stage_generate(cfg, out_dir, variant=args.variant)
        else:
            result = STAGE_FUNCS[args.command](cfg, out_dir)
    manifest_path = os.path.join(out_dir, ARTIFACTS["manifest"])
    manifest = (
        RunManifest.load(manifest_path)
        if os.path.exists(manifest_path)
        else RunManifest.for_config(cfg.to_snapshot())
    )
    manifest.record_stage(args.command, result["inputs"], result["outputs"],
                          result["seeds"], timer.elapsed)
    manifest.save(manifest_path)
    for name, path in result["outputs"].items():
        print(f"{name}: {path} ({sha256_file(path)[:12]})")
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "corpus":
            return cmd_corpus_sample(args)
        if args.command == "ast":
            return cmd_ast_extract(args)
        if args.command == "sann":
            return cmd_sann_train(args)
        return cmd_stage(args)
    except llm.LlmConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except llm.LlmError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UPSTREAM
    except (CliDataError, CorpusError, DiscoveryError, RatingsError, ArtifactError,
            JavaSyntaxError, prompts.PromptError, prompts.ResponseFormatError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
