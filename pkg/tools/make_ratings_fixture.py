"""Generate the bundled ratings fixture and its golden summary.

Run from the repo root:  python3 tools/make_ratings_fixture.py
Regenerating overwrites tests/fixtures/{ratings.jsonl,pairs.jsonl,
golden_summary.json}; the golden file is frozen output of stats.summarize.
"""

import json
import pathlib

import numpy as np

from kcgen.stats import RUBRIC_ITEMS, load_ratings, pair_ratings, summarize, summary_to_json

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main():
    rng = np.random.default_rng(20190301)
    ratings = []
    pairs = []
    # KC-conditioned scores drawn slightly higher on explanation/relevance,
    # mirroring the shape of a real evaluation without copying its numbers.
    for i in range(40):
        base_items = {
            "formatting": 2,
            "clear_explanations": int(rng.choice([1, 2], p=[0.3, 0.7])),
            "correctness": int(rng.choice([1, 2], p=[0.05, 0.95])),
            "step_structure": int(rng.choice([1, 2], p=[0.1, 0.9])),
            "relevance": int(rng.choice([0, 1, 2], p=[0.1, 0.4, 0.5])),
        }
        kc_items = {
            "formatting": 2,
            "clear_explanations": int(rng.choice([1, 2], p=[0.15, 0.85])),
            "correctness": int(rng.choice([1, 2], p=[0.05, 0.95])),
            "step_structure": int(rng.choice([1, 2], p=[0.15, 0.85])),
            "relevance": int(rng.choice([1, 2], p=[0.25, 0.75])),
        }
        preference = str(rng.choice(
            ["none", "kc_conditioned", "baseline"], p=[0.5, 0.4, 0.1]
        ))
        ratings.append(
            {
                "example_id": f"ex{i:03d}-base",
                "rater_id": "r1",
                "items": base_items,
            }
        )
        ratings.append(
            {
                "example_id": f"ex{i:03d}-kc",
                "rater_id": "r1",
                "items": kc_items,
                "kc_coverage": int(rng.choice([1, 2], p=[0.1, 0.9])),
                "preference": preference,
            }
        )
        pairs.append(
            {
                "submission_id": f"sub{i:03d}",
                "baseline_example_id": f"ex{i:03d}-base",
                "kc_example_id": f"ex{i:03d}-kc",
            }
        )

    FIXTURES.mkdir(parents=True, exist_ok=True)
    with open(FIXTURES / "ratings.jsonl", "w") as fh:
        for rec in ratings:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    with open(FIXTURES / "pairs.jsonl", "w") as fh:
        for rec in pairs:
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    scores = load_ratings(FIXTURES / "ratings.jsonl")
    paired = pair_ratings(scores, pairs)
    summary = summarize(paired)
    (FIXTURES / "golden_summary.json").write_text(summary_to_json(summary))
    print("wrote", FIXTURES)
    for item in RUBRIC_ITEMS:
        row = summary["items"][item]
        print(f"{item}: base={row['baseline_mean']:.2f} kc={row['kc_conditioned_mean']:.2f} p={row['p_value']:.4f}")


if __name__ == "__main__":
    main()
