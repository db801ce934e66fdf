import itertools
import json
import math
import pathlib

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import rankdata

from kcgen.stats import (
    PairedRating,
    RatingsError,
    RubricScore,
    RUBRIC_ITEMS,
    cohen_kappa,
    format_summary_table,
    holm_correct,
    load_ratings,
    pair_ratings,
    summarize,
    summary_to_json,
    wilcoxon_signed_rank,
)

FIXTURES = pathlib.Path(__file__).parent / "fixtures"


def enum_oracle(x, y):
    """Independent 2^n enumeration of the exact two-sided p-value."""
    d = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    d = d[d != 0]
    n = len(d)
    if n == 0:
        return 1.0
    ranks = rankdata(np.abs(d))
    total = ranks.sum()
    w_obs = min(ranks[d > 0].sum(), total - ranks[d > 0].sum())
    count = 0
    for signs in itertools.product((0, 1), repeat=n):
        wp = sum(r for r, s in zip(ranks, signs) if s)
        if min(wp, total - wp) <= w_obs + 1e-9:
            count += 1
    return count / 2**n


class TestKappa:
    def test_perfect_agreement(self):
        assert cohen_kappa([0, 1, 2, 1], [0, 1, 2, 1]) == pytest.approx(1.0)

    def test_perfect_disagreement(self):
        assert cohen_kappa([0, 0, 1, 1], [1, 1, 0, 0]) == pytest.approx(-1.0)

    def test_direct_formula(self):
        a = [2, 2, 1, 2, 0, 1, 2, 2, 1, 2]
        b = [2, 2, 1, 2, 1, 1, 2, 2, 1, 2]
        n = len(a)
        p_o = sum(x == y for x, y in zip(a, b)) / n
        p_e = sum((a.count(c) / n) * (b.count(c) / n) for c in set(a) | set(b))
        expected = (p_o - p_e) / (1 - p_e)
        assert cohen_kappa(a, b) == pytest.approx(expected)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            cohen_kappa([1, 2], [1])

    def test_degenerate_single_category(self):
        assert cohen_kappa([1, 1, 1], [1, 1, 1]) == 1.0

    @given(
        st.lists(st.tuples(st.integers(0, 2), st.integers(0, 2)), min_size=1, max_size=30)
    )
    def test_symmetry(self, pairs):
        a = [p[0] for p in pairs]
        b = [p[1] for p in pairs]
        assert cohen_kappa(a, b) == pytest.approx(cohen_kappa(b, a))

    def test_random_pairs_match_formula(self):
        rng = np.random.default_rng(0)
        for _ in range(100):
            n = int(rng.integers(2, 40))
            a = list(rng.integers(0, 3, n))
            b = list(rng.integers(0, 3, n))
            p_o = sum(x == y for x, y in zip(a, b)) / n
            p_e = sum((a.count(c) / n) * (b.count(c) / n) for c in set(a) | set(b))
            if p_e == 1.0:
                assert cohen_kappa(a, b) == 1.0
            else:
                assert cohen_kappa(a, b) == pytest.approx((p_o - p_e) / (1 - p_e))


class TestWilcoxon:
    def test_identical_inputs(self):
        w, p, n = wilcoxon_signed_rank([1, 2, 3], [1, 2, 3])
        assert p == 1.0
        assert n == 0

    def test_all_negative_unit_differences(self):
        x = [1, 2, 3, 4, 5, 6]
        y = [2, 3, 4, 5, 6, 7]
        w, p, n = wilcoxon_signed_rank(x, y, mode="exact")
        assert n == 6
        assert p == pytest.approx(2 / 64)

    def test_exact_matches_enumeration(self):
        rng = np.random.default_rng(1)
        for _ in range(30):
            n = int(rng.integers(2, 13))
            x = rng.integers(0, 3, n).astype(float)
            y = rng.integers(0, 3, n).astype(float)
            _, p, _ = wilcoxon_signed_rank(x, y, mode="exact")
            assert p == pytest.approx(enum_oracle(x, y), abs=1e-12)

    def test_approx_close_to_exact(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            x = rng.normal(0, 1, 12)
            y = x + rng.normal(0.3, 1, 12)
            _, p_exact, n_eff = wilcoxon_signed_rank(x, y, mode="exact")
            _, p_approx, _ = wilcoxon_signed_rank(x, y, mode="approx")
            assert n_eff == 12
            assert abs(p_exact - p_approx) < 0.02

    def test_pair_order_permutation_invariance(self):
        rng = np.random.default_rng(3)
        x = rng.integers(0, 3, 10).astype(float)
        y = rng.integers(0, 3, 10).astype(float)
        _, p1, _ = wilcoxon_signed_rank(x, y, mode="exact")
        perm = rng.permutation(10)
        _, p2, _ = wilcoxon_signed_rank(x[perm], y[perm], mode="exact")
        assert p1 == pytest.approx(p2, abs=1e-12)

    def test_swap_invariance(self):
        rng = np.random.default_rng(4)
        x = rng.integers(0, 3, 12).astype(float)
        y = rng.integers(0, 3, 12).astype(float)
        _, p1, _ = wilcoxon_signed_rank(x, y, mode="exact")
        _, p2, _ = wilcoxon_signed_rank(y, x, mode="exact")
        assert p1 == pytest.approx(p2, abs=1e-12)

    def test_auto_mode_switches(self):
        rng = np.random.default_rng(5)
        x = rng.normal(0, 1, 30)
        y = rng.normal(0.5, 1, 30)
        w_auto, p_auto, n = wilcoxon_signed_rank(x, y, mode="auto")
        _, p_approx, _ = wilcoxon_signed_rank(x, y, mode="approx")
        assert n > 20
        assert p_auto == p_approx

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            wilcoxon_signed_rank([1, 2], [1])


class TestHolm:
    def test_single_p_unchanged(self):
        assert holm_correct([0.2]) == [0.2]

    def test_worked_example(self):
        assert holm_correct([0.01, 0.04, 0.03]) == pytest.approx([0.03, 0.06, 0.06])

    def test_cap_at_one(self):
        assert holm_correct([1.0, 1.0]) == [1.0, 1.0]

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            holm_correct([0.5, 1.2])

    @given(st.lists(st.floats(min_value=0.0, max_value=1.0), min_size=1, max_size=12))
    @settings(max_examples=200)
    def test_properties(self, ps):
        adj = holm_correct(ps)
        for raw, a in zip(ps, adj):
            assert a >= raw - 1e-15
            assert a <= 1.0
        # monotone in the sorted raw order
        order = sorted(range(len(ps)), key=lambda i: ps[i])
        sorted_adj = [adj[i] for i in order]
        assert all(b >= a for a, b in zip(sorted_adj, sorted_adj[1:]))


def make_pairs(n, rng):
    pairs = []
    for i in range(n):
        base = {item: int(rng.integers(0, 3)) for item in RUBRIC_ITEMS}
        kc = {item: int(rng.integers(0, 3)) for item in RUBRIC_ITEMS}
        pairs.append(
            PairedRating(
                submission_id=f"s{i}",
                baseline=base,
                kc_conditioned=kc,
                preference=["baseline", "kc_conditioned", "none"][int(rng.integers(3))],
                kc_coverage=int(rng.integers(0, 3)),
            )
        )
    return pairs


class TestSummarize:
    def test_degenerate_identical(self):
        pairs = [
            PairedRating(
                submission_id=f"s{i}",
                baseline={item: 1 for item in RUBRIC_ITEMS},
                kc_conditioned={item: 1 for item in RUBRIC_ITEMS},
                preference="none",
                kc_coverage=2,
            )
            for i in range(5)
        ]
        summary = summarize(pairs)
        for item in RUBRIC_ITEMS:
            row = summary["items"][item]
            assert row["baseline_mean"] == row["kc_conditioned_mean"]
            assert row["p_value"] == 1.0

    def test_schema(self):
        summary = summarize(make_pairs(12, np.random.default_rng(0)))
        assert set(summary["items"]) == set(RUBRIC_ITEMS)
        assert set(summary["preference"]) == {"baseline", "kc_conditioned", "none"}
        assert "kc_coverage_mean" in summary
        table = format_summary_table(summary)
        assert table.count("\n") == len(RUBRIC_ITEMS) + 4

    def test_golden_fixture(self):
        scores = load_ratings(FIXTURES / "ratings.jsonl")
        with open(FIXTURES / "pairs.jsonl") as fh:
            pairs_spec = [json.loads(line) for line in fh if line.strip()]
        pairs = pair_ratings(scores, pairs_spec)
        summary = summarize(pairs)
        golden = (FIXTURES / "golden_summary.json").read_bytes()
        assert summary_to_json(summary).encode() == golden

    def test_invalid_score_rejected(self):
        with pytest.raises(RatingsError):
            RubricScore(example_id="e", rater_id="r", items={"formatting": 3})
