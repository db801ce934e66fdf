"""Acceptance gate: one test per headline criterion, each printing a
single PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`.
"""

import itertools
import json
import pathlib
import time
from collections import Counter

import numpy as np
import pytest
from scipy.stats import rankdata

from kcgen import cli, prompts
from kcgen.corpus import load_corpus
from kcgen.discovery import DEFAULT_K, KcInventory
from kcgen.javaparse import parse_program
from kcgen.kmeans import kmeans_fit, nearest_centroid
from kcgen.sann import (
    SannHyperparams,
    _forward_backward,
    build_vocab,
    init_params,
    predict_correctness,
    train_sann,
)
from kcgen.stats import (
    cohen_kappa,
    holm_correct,
    load_ratings,
    pair_ratings,
    summarize,
    summary_to_json,
    wilcoxon_signed_rank,
)
from kcgen.subtrees import extract_subtrees, normalize_subtree
from kcgen.synth import generate_corpus, planted_signature_sets
from kcgen.vae import VaeHyperparams
from kcgen.vae import init_params as vae_init_params
from kcgen.vae import loss_and_grads

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
SUBMISSIONS = FIXTURES / "corpus_submissions.jsonl"
PROBLEMS = FIXTURES / "corpus_problems.jsonl"

PIPELINE_ARTIFACTS = ("sampled.jsonl", "model.sann", "model.vae",
                      "inventory.json", "assignments.jsonl")


def report(name, ok, detail=""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({detail})" if detail else "")
    print("\n" + line)
    assert ok, line


def write_config(path, out_root):
    path.write_text(f"""
[corpus]
submissions = "{SUBMISSIONS}"
problems = "{PROBLEMS}"

[sample]
n = 5
seed = 0

[output]
root = "{out_root}"

[llm]
endpoint = "stub://canned"
""")
    return path


@pytest.fixture(scope="module")
def pipeline_runs(tmp_path_factory):
    """Two identical sample -> discover -> infer runs at default hyperparams."""
    base = tmp_path_factory.mktemp("acceptance")
    config = write_config(base / "config.toml", base / "runs")
    start = time.monotonic()
    dirs = []
    for name in ("a", "b"):
        out_dir = base / name
        for stage in ("sample", "discover", "infer"):
            assert cli.main([stage, "--config", str(config), "--out", str(out_dir)]) == 0
        dirs.append(out_dir)
    elapsed = time.monotonic() - start
    return {"dirs": dirs, "elapsed": elapsed, "config": config, "base": base}


def test_determinism(pipeline_runs):
    a, b = pipeline_runs["dirs"]
    identical = all(
        (a / art).read_bytes() == (b / art).read_bytes() for art in PIPELINE_ARTIFACTS
    )
    elapsed = pipeline_runs["elapsed"]
    report(
        "determinism: repeated sample->discover->infer runs are bit-identical in < 5 min",
        identical and elapsed < 300,
        f"elapsed {elapsed:.1f}s",
    )


def test_planted_pattern_discovery():
    corpus, _ = generate_corpus(seed=0, students_per_problem=50)
    pairs, labels = [], []
    for sub in corpus.submissions:
        root = parse_program(sub.code)
        normalized = [normalize_subtree(s) for s in extract_subtrees(root)]
        pairs.append(normalized)
        labels.append(sub.is_correct)
    idx = np.random.default_rng(7).permutation(len(pairs))
    split = int(0.8 * len(pairs))
    train_idx, test_idx = idx[:split], idx[split:]
    model = train_sann(
        [(pairs[i], labels[i]) for i in train_idx], SannHyperparams(), seed=1
    )
    correct = sum(
        (predict_correctness(model, pairs[i])[0] >= 0.5) == labels[i] for i in test_idx
    )
    accuracy = correct / len(test_idx)

    planted_forms = set().union(*planted_signature_sets())
    planted_att, other_att = [], []
    for i in test_idx:
        _, scored = predict_correctness(model, pairs[i])
        for s in scored:
            bucket = planted_att if tuple(s.subtree.tokens) in planted_forms else other_att
            bucket.append(s.attention)
    gap = float(np.mean(planted_att) - np.mean(other_att))
    report(
        "planted patterns: held-out accuracy >= 0.90 and attention gap >= 0.15",
        accuracy >= 0.90 and gap >= 0.15,
        f"accuracy {accuracy:.3f}, gap {gap:.3f}",
    )


def _max_rel_err_sann(n_draws=20):
    rng = np.random.default_rng(42)
    tokens = ["if", "(", "VAR", "==", "NUM", ")", "{", "}", "+", ";", "TYPE"]
    vocab = build_vocab([tuple(tokens)])
    hp = SannHyperparams(d_emb=4, d_enc=3)
    worst = 0.0
    for _ in range(n_draws):
        params = init_params(len(vocab), hp, rng)
        batch = []
        for _ in range(3):
            seq_ids = [
                np.array(rng.integers(0, len(vocab), rng.integers(2, 6)), dtype=np.int64)
                for _ in range(int(rng.integers(1, 4)))
            ]
            batch.append((seq_ids, bool(rng.integers(2))))
        _, grads = _forward_backward(params, batch)
        for name, tensor in params.items():
            flat, gflat = tensor.reshape(-1), grads[name].reshape(-1)
            for j in rng.choice(flat.size, size=min(4, flat.size), replace=False):
                h, orig = 1e-5, flat[j]
                flat[j] = orig + h
                lp, _ = _forward_backward(params, batch)
                flat[j] = orig - h
                lm, _ = _forward_backward(params, batch)
                flat[j] = orig
                fd = (lp - lm) / (2 * h)
                worst = max(worst, abs(fd - gflat[j]) / max(abs(fd), abs(gflat[j]), 1e-6))
    return worst


def _max_rel_err_vae(n_draws=20):
    rng = np.random.default_rng(123)
    hp = VaeHyperparams(d_in=5, d_hidden=4, d_z=3)
    worst = 0.0
    for _ in range(n_draws):
        params = vae_init_params(hp, rng)
        x = rng.normal(0, 1, (3, 5))
        eps = rng.standard_normal((3, 3))
        beta = float(rng.uniform(0.0, 2.0))
        _, grads = loss_and_grads(params, x, eps, beta)
        for name, tensor in params.items():
            flat, gflat = tensor.reshape(-1), grads[name].reshape(-1)
            for j in rng.choice(flat.size, size=min(4, flat.size), replace=False):
                h, orig = 1e-5, flat[j]
                flat[j] = orig + h
                lp, _ = loss_and_grads(params, x, eps, beta)
                flat[j] = orig - h
                lm, _ = loss_and_grads(params, x, eps, beta)
                flat[j] = orig
                fd = (lp - lm) / (2 * h)
                worst = max(worst, abs(fd - gflat[j]) / max(abs(fd), abs(gflat[j]), 1e-6))
    return worst


def test_gradient_checks():
    worst_sann = _max_rel_err_sann(20)
    worst_vae = _max_rel_err_vae(20)
    report(
        "gradient checks: analytic grads match central differences within 1e-4 "
        "on >= 20 draws each",
        worst_sann < 1e-4 and worst_vae < 1e-4,
        f"max rel err sann {worst_sann:.2e}, vae {worst_vae:.2e}",
    )


def test_clustering(pipeline_runs):
    rng = np.random.default_rng(11)
    monotone = fixpoints = True
    for _ in range(50):
        n = int(rng.integers(30, 200))
        d = int(rng.integers(2, 10))
        k = int(rng.integers(2, min(12, n)))
        points = rng.normal(0, 1, (n, d))
        result = kmeans_fit(points, k=k, seed=int(rng.integers(1 << 30)))
        if np.any(np.diff(result.inertia_trace) > 1e-9):
            monotone = False
        relabeled = np.array([nearest_centroid(result.centroids, p) for p in points])
        if not np.array_equal(relabeled, result.labels):
            fixpoints = False

    centroids = rng.normal(0, 1, (50, 8))
    queries = rng.normal(0, 1, (1000, 8))
    brute = np.argmin(((queries[:, None, :] - centroids[None]) ** 2).sum(axis=2), axis=1)
    fast = np.array([nearest_centroid(centroids, q) for q in queries])
    brute_match = np.array_equal(brute, fast)

    inventory = KcInventory.load(pipeline_runs["dirs"][0] / "inventory.json")
    fifty = inventory.k == 50 and DEFAULT_K == 50
    report(
        "clustering: inertia non-increasing on 50 datasets, assignments are "
        "fixpoints, 1000-query brute-force agreement, inventory has 50 centroids",
        monotone and fixpoints and brute_match and fifty,
        f"inventory k={inventory.k}",
    )


def _enum_oracle(x, y):
    d = np.asarray(x, float) - np.asarray(y, float)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks = rankdata(np.abs(d))
    total = ranks.sum()
    w_obs = min(ranks[d > 0].sum(), total - ranks[d > 0].sum())
    count = sum(
        min(wp := sum(r for r, s in zip(ranks, signs) if s), total - wp) <= w_obs + 1e-9
        for signs in itertools.product((0, 1), repeat=n)
    )
    return count / 2**n


def _kappa_direct(a, b):
    n = len(a)
    p_o = sum(x == y for x, y in zip(a, b)) / n
    ca, cb = Counter(a), Counter(b)
    p_e = sum(ca[c] * cb[c] for c in set(ca) | set(cb)) / n**2
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1 - p_e)


def test_statistics_oracles():
    rng = np.random.default_rng(99)
    wilcoxon_ok = True
    for _ in range(100):
        n = int(rng.integers(1, 13))
        x = rng.integers(0, 3, n).astype(float)
        y = rng.integers(0, 3, n).astype(float)
        _, p, _ = wilcoxon_signed_rank(x, y, mode="exact")
        if abs(p - _enum_oracle(x, y)) > 1e-12:
            wilcoxon_ok = False

    kappa_ok = True
    for _ in range(100):
        n = int(rng.integers(2, 40))
        a = list(rng.integers(0, 3, n))
        b = list(rng.integers(0, 3, n))
        if abs(cohen_kappa(a, b) - _kappa_direct(a, b)) > 1e-12:
            kappa_ok = False

    holm_ok = holm_correct([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06])

    scores = load_ratings(FIXTURES / "ratings.jsonl")
    pairs_spec = [json.loads(line) for line in
                  (FIXTURES / "pairs.jsonl").read_text().splitlines() if line.strip()]
    summary = summarize(pair_ratings(scores, pairs_spec))
    golden_ok = summary_to_json(summary).encode() == (FIXTURES / "golden_summary.json").read_bytes()
    report(
        "statistics: exact Wilcoxon matches enumeration (100 fixtures, 1e-12), "
        "kappa matches direct formula (100 pairs), Holm example, golden summary "
        "byte-for-byte",
        wilcoxon_ok and kappa_ok and holm_ok and golden_ok,
    )


def _example_text(num_steps, drop_code_step=None):
    parts = ["QUESTION: Count the matching values.",
             "OVERVIEW: One pass with a counter."]
    for i in range(1, num_steps + 1):
        parts.append(f"STEP {i}: Explain part {i}.")
        if i != drop_code_step:
            parts.append(f"```java\nint v{i} = {i};\n```")
    return "\n".join(parts) + "\n"


def test_format_contract():
    def accepts(text):
        try:
            prompts.parse_worked_example(text, "baseline")
            return True
        except prompts.ResponseFormatError:
            return False

    steps_ok = (accepts(_example_text(3)) and accepts(_example_text(10))
                and not accepts(_example_text(2)) and not accepts(_example_text(11))
                and not accepts(_example_text(4, drop_code_step=3)))

    corpus = load_corpus(SUBMISSIONS, PROBLEMS)
    sub = corpus.submissions[0]
    problem = corpus.problems[sub.problem_id]
    target = prompts.KcLabel(0, "Boolean operator precedence",
                             "Combines && and || with explicit grouping.")
    base = prompts.build_worked_example_prompt(problem, sub, "baseline")
    cond = prompts.build_worked_example_prompt(problem, sub, "kc_conditioned", [target])
    kc_block = cond.substitutions["kc_section"]
    prompt_ok = (base.system_text == cond.system_text and kc_block
                 and cond.user_text.replace(kc_block, "") == base.user_text)

    def label_rejected(label):
        try:
            prompts.KcLabel(0, label, "One sentence.")
            return False
        except prompts.ResponseFormatError:
            return True

    label_ok = (label_rejected("Loops") and label_rejected("a b c d e f g")
                and not label_rejected("Loop bound check"))
    report(
        "format contract: 3/10-step accepted, 2/11-step and missing-code rejected, "
        "variants differ only in KC block, 2-6 word labels enforced",
        steps_ok and prompt_ok and label_ok,
    )


def test_end_to_end_stub_run(pipeline_runs):
    out_dir = pipeline_runs["dirs"][0]
    sampled = [json.loads(line) for line in
               (out_dir / "sampled.jsonl").read_text().splitlines() if line.strip()]
    assert len(sampled) == 10
    code = cli.main(["generate", "--config", str(pipeline_runs["config"]),
                     "--out", str(out_dir)])
    examples = [json.loads(line) for line in
                (out_dir / "examples.jsonl").read_text().splitlines() if line.strip()]
    parsed = []
    for rec in (r for r in examples if "example" in r):
        text = "\n".join(
            [f"QUESTION: {rec['example']['question']}",
             f"OVERVIEW: {rec['example']['overview']}"]
            + [f"STEP {i}: {s['explanation']}\n```java\n{s['code']}\n```"
               for i, s in enumerate(rec["example"]["steps"], start=1)]
        )
        parsed.append(prompts.parse_worked_example(text, rec["variant"]))
    generation_ok = code == 0 and len(parsed) == 20

    cases = json.loads((FIXTURES / "coverage_cases.json").read_text())
    agree = 0
    for case in cases:
        ex = prompts.WorkedExample(
            question=case["example"]["question"],
            overview=case["example"]["overview"],
            steps=tuple((s["explanation"], s["code"]) for s in case["example"]["steps"]),
            variant="kc_conditioned",
        )
        t = case["target"]
        target = prompts.CoverageTarget(
            label=prompts.KcLabel(t["kc_id"], t["label"], t["description"]),
            supporter_tokens=tuple(t["supporter_tokens"]),
        )
        got = prompts.kc_coverage_heuristic(ex, [target])[t["kc_id"]]
        agree += got == case["hand"]
    report(
        "end-to-end stub run: 10 submissions -> 20 parsed worked examples; "
        "coverage heuristic agrees with hand labels on >= 18/20",
        generation_ok and agree >= 18,
        f"examples {len(parsed)}, agreement {agree}/20",
    )
