"""Write the bundled synthetic corpus fixture (200 programs, 2 problems).

Regenerates tests/fixtures/corpus_submissions.jsonl,
corpus_problems.jsonl, and corpus_planted.json deterministically.
"""

import json
import pathlib
import sys

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from kcgen.synth import generate_corpus  # noqa: E402

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "tests" / "fixtures"


def main():
    corpus, planted_map = generate_corpus(seed=0, students_per_problem=50)
    assert len(corpus.submissions) == 200
    assert len(corpus.problems) == 2

    with open(FIXTURES / "corpus_submissions.jsonl", "w", encoding="utf-8") as fh:
        for sub in corpus.submissions:
            fh.write(json.dumps(sub.to_record(), sort_keys=True) + "\n")
    with open(FIXTURES / "corpus_problems.jsonl", "w", encoding="utf-8") as fh:
        for pid in sorted(corpus.problems):
            p = corpus.problems[pid]
            fh.write(json.dumps(
                {"problem_id": p.problem_id, "title": p.title, "statement": p.statement},
                sort_keys=True) + "\n")
    with open(FIXTURES / "corpus_planted.json", "w", encoding="utf-8") as fh:
        json.dump({sid: planted_map[sid] for sid in sorted(planted_map)}, fh,
                  sort_keys=True, indent=1)
        fh.write("\n")
    print(f"wrote {len(corpus.submissions)} submissions to {FIXTURES}")


if __name__ == "__main__":
    main()
