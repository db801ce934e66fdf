"""Rubric records, inter-rater agreement, paired signed-rank tests, and
multiple-comparison correction for the expert-evaluation harness."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from ._kernels import signrank_count_leq

RUBRIC_ITEMS = (
    "formatting",
    "clear_explanations",
    "correctness",
    "step_structure",
    "relevance",
)

VALID_SCORES = (0, 1, 2)
EXACT_MODE_MAX_N = 20


class RatingsError(Exception):
    pass


@dataclass(frozen=True)
class RubricScore:
    example_id: str
    rater_id: str
    items: dict
    kc_coverage: int | None = None
    preference: str | None = None  # baseline / kc_conditioned / none

    def __post_init__(self):
        for name, score in self.items.items():
            if score not in VALID_SCORES:
                raise RatingsError(f"{self.example_id}: score {score!r} for {name} not in 0..2")
        if self.kc_coverage is not None and self.kc_coverage not in VALID_SCORES:
            raise RatingsError(f"{self.example_id}: kc_coverage {self.kc_coverage!r} not in 0..2")


@dataclass(frozen=True)
class PairedRating:
    submission_id: str
    baseline: dict
    kc_conditioned: dict
    preference: str | None = None
    kc_coverage: int | None = None


def load_ratings(path) -> list[RubricScore]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            try:
                out.append(
                    RubricScore(
                        example_id=rec["example_id"],
                        rater_id=rec["rater_id"],
                        items=rec["items"],
                        kc_coverage=rec.get("kc_coverage"),
                        preference=rec.get("preference"),
                    )
                )
            except KeyError as exc:
                raise RatingsError(f"ratings line {lineno}: missing field {exc}") from exc
    return out


def cohen_kappa(a, b) -> float:
    """Chance-corrected agreement between two raters' categorical ratings."""
    a = list(a)
    b = list(b)
    if len(a) != len(b):
        raise ValueError(f"length mismatch: {len(a)} vs {len(b)}")
    if not a:
        raise ValueError("empty rating lists")
    n = len(a)
    p_o = sum(x == y for x, y in zip(a, b)) / n
    cats = set(a) | set(b)
    p_e = sum((a.count(c) / n) * (b.count(c) / n) for c in cats)
    if p_e == 1.0:
        return 1.0
    return (p_o - p_e) / (1.0 - p_e)


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values))
    i = 0
    sorted_vals = values[order]
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    return ranks


def wilcoxon_signed_rank(x, y, mode: str = "auto"):
    """Paired two-sided Wilcoxon signed-rank test.

    Zero differences are dropped; absolute differences are mid-ranked.
    Returns (W, p_value, n_effective) with W = min(W+, W-). Exact mode
    enumerates all 2^n sign assignments (n <= 20); approx mode uses the
    normal approximation with tie-corrected variance and continuity
    correction. All-zero differences give p = 1.0.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    if mode not in ("exact", "approx", "auto"):
        raise ValueError(f"unknown mode {mode!r}")
    d = x - y
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 0.0, 1.0, 0
    ranks = _midranks(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    total = float(ranks.sum())
    w = min(w_plus, total - w_plus)
    if mode == "auto":
        mode = "exact" if n <= EXACT_MODE_MAX_N else "approx"
    if mode == "exact":
        if n > EXACT_MODE_MAX_N:
            raise ValueError(f"exact mode limited to n <= {EXACT_MODE_MAX_N}, got {n}")
        count = signrank_count_leq(ranks, w)
        p = count / (1 << n)
    else:
        mu = total / 2.0
        sigma = math.sqrt(float(np.sum(ranks**2)) / 4.0)
        if sigma == 0.0:
            return w, 1.0, n
        z = (w - mu + 0.5) / sigma
        p = min(1.0, math.erfc(-z / math.sqrt(2.0)))
    return w, min(1.0, p), n


def holm_correct(p_values):
    """Holm step-down adjusted p-values, returned in the input order."""
    ps = list(p_values)
    for p in ps:
        if not (0.0 <= p <= 1.0):
            raise ValueError(f"p-value {p} outside [0, 1]")
    m = len(ps)
    order = sorted(range(m), key=lambda i: ps[i])
    adjusted = [0.0] * m
    running = 0.0
    for rank, idx in enumerate(order):
        candidate = min(1.0, (m - rank) * ps[idx])
        running = max(running, candidate)
        adjusted[idx] = running
    return adjusted


def pair_ratings(scores: list[RubricScore], pairs_spec) -> list[PairedRating]:
    """Join per-example rubric scores into baseline/KC-conditioned pairs.

    pairs_spec: iterable of {submission_id, baseline_example_id,
    kc_example_id} records.
    """
    by_example = {s.example_id: s for s in scores}
    out = []
    for rec in pairs_spec:
        try:
            base = by_example[rec["baseline_example_id"]]
            kc = by_example[rec["kc_example_id"]]
        except KeyError as exc:
            raise RatingsError(f"pair {rec.get('submission_id')}: missing ratings for {exc}") from exc
        preference = kc.preference or base.preference
        out.append(
            PairedRating(
                submission_id=rec["submission_id"],
                baseline=dict(base.items),
                kc_conditioned=dict(kc.items),
                preference=preference,
                kc_coverage=kc.kc_coverage,
            )
        )
    return out


def summarize(pairs: list[PairedRating], mode: str = "auto") -> dict:
    """Per-item means and paired tests, Holm-corrected across the rubric.

    Returns a JSON-serializable summary with per-item baseline/KC means,
    raw and Holm-adjusted p-values, preference tallies, and the mean KC
    coverage score.
    """
    if not pairs:
        raise ValueError("need at least one pair")
    items = {}
    raw_ps = []
    for item in RUBRIC_ITEMS:
        base = [p.baseline[item] for p in pairs]
        kc = [p.kc_conditioned[item] for p in pairs]
        _, p_value, n_eff = wilcoxon_signed_rank(base, kc, mode=mode)
        items[item] = {
            "baseline_mean": float(np.mean(base)),
            "kc_conditioned_mean": float(np.mean(kc)),
            "p_value": p_value,
            "n_effective": n_eff,
        }
        raw_ps.append(p_value)
    for item, p_adj in zip(RUBRIC_ITEMS, holm_correct(raw_ps)):
        items[item]["p_holm"] = p_adj

    tallies = {"baseline": 0, "kc_conditioned": 0, "none": 0}
    for p in pairs:
        if p.preference in tallies:
            tallies[p.preference] += 1
    coverages = [p.kc_coverage for p in pairs if p.kc_coverage is not None]
    return {
        "n_pairs": len(pairs),
        "items": items,
        "preference": tallies,
        "kc_coverage_mean": float(np.mean(coverages)) if coverages else None,
    }


def summary_to_json(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, separators=(",", ":")) + "\n"


def format_summary_table(summary: dict) -> str:
    """Human-readable table mirroring the machine summary."""
    lines = []
    header = f"{'Rubric item':<20} {'Baseline M':>10} {'KC M':>8} {'p':>8} {'p(Holm)':>8}"
    lines.append(header)
    lines.append("-" * len(header))
    for item in RUBRIC_ITEMS:
        row = summary["items"][item]
        lines.append(
            f"{item:<20} {row['baseline_mean']:>10.3f} {row['kc_conditioned_mean']:>8.3f}"
            f" {row['p_value']:>8.4f} {row['p_holm']:>8.4f}"
        )
    pref = summary["preference"]
    lines.append(
        f"{'preference':<20} none={pref['none']} kc={pref['kc_conditioned']} baseline={pref['baseline']}"
    )
    cov = summary["kc_coverage_mean"]
    lines.append(f"{'kc_coverage mean':<20} {'-' if cov is None else format(cov, '.3f')}")
    return "\n".join(lines) + "\n"
