"""Synthetic fixture corpus with planted error patterns.

Programs are small Java methods assembled from filler statements. An
incorrect submission contains exactly one of four planted patterns; a
correct one contains none. After identifier/literal normalization each
planted pattern has a token signature no filler can produce, so the
attention network has a clean, learnable signal.
"""

from __future__ import annotations

import numpy as np

from .corpus import Corpus, Problem, Submission, parse_timestamp
from .javaparse import parse_statements
from .subtrees import extract_subtrees, normalize_subtree

# {v} fresh identifiers, {n} fresh integer literals
PLANTED_TEMPLATES = [
    "if ({v0} == {n0} || {v0} == {n1} && {v1} != {n2}) {{ {v2} = {n3}; }}",
    "for (int {v0} = 0; {v0} <= {v1}; {v0}++) {{ {v2} = {v2} + {v3}[{v0}]; }}",
    "{v0} = {v1} % {n0} % {n1};",
    "while ({v0} == {v1} && {v2} != {v3}) {{ {v0}++; }}",
]

FILLER_TEMPLATES = [
    "int {v0} = {n0};",
    "{v0} = {v0} + {v1};",
    "{v0} = {v1} * {n0};",
    "if ({v0} > {v1}) {{ {v0} = {v1}; }}",
    "if ({v0} < {n0}) {{ {v1} = {v1} + {n1}; }}",
    "for (int {v0} = 0; {v0} < {v1}; {v0}++) {{ {v2} = {v2} + {v0}; }}",
    "{v0} = {v1}[{v2}] + {n0};",
    "int {v0} = {v1} - {n0};",
]

NAME_POOL = [
    "count", "total", "idx", "pos", "val", "tmp", "acc", "cur", "lim",
    "left", "right", "mid", "best", "ans", "num", "item", "size", "step",
]

PROBLEMS = [
    Problem(
        problem_id="sumRange",
        title="sumRange",
        statement="Given an int array and a bound n, return the sum of the first n elements.",
    ),
    Problem(
        problem_id="countMatch",
        title="countMatch",
        statement="Count how many elements of an int array equal a target value.",
    ),
]


def _fill(template: str, rng: np.random.Generator) -> str:
    names = list(rng.choice(NAME_POOL, size=6, replace=False))
    subs = {f"v{i}": names[i] for i in range(6)}
    subs.update({f"n{i}": str(int(rng.integers(1, 100))) for i in range(4)})
    return template.format(**subs)


def planted_token_signatures() -> list[tuple[str, ...]]:
    """Normalized token sequence of each planted pattern's outermost subtree."""
    rng = np.random.default_rng(0)
    sigs = []
    for tpl in PLANTED_TEMPLATES:
        root = parse_statements(_fill(tpl, rng))
        sub = extract_subtrees(root, 1, 10_000)[0]
        sigs.append(normalize_subtree(sub).tokens)
    return sigs


def _template_forms(templates, min_nodes=3, max_nodes=60):
    rng = np.random.default_rng(0)
    out = []
    for tpl in templates:
        root = parse_statements(_fill(tpl, rng))
        forms = {normalize_subtree(s).tokens for s in extract_subtrees(root, min_nodes, max_nodes)}
        out.append(forms)
    return out


def planted_signature_sets(min_nodes=3, max_nodes=60) -> list[set]:
    """Per pattern: normalized forms occurring only inside that planted
    pattern, never in fillers or in the other planted patterns."""
    planted = _template_forms(PLANTED_TEMPLATES, min_nodes, max_nodes)
    filler = set().union(*_template_forms(FILLER_TEMPLATES, min_nodes, max_nodes))
    sets = []
    for i, forms in enumerate(planted):
        others = set().union(*(planted[j] for j in range(len(planted)) if j != i))
        sets.append(forms - filler - others)
    return sets


def generate_program(rng: np.random.Generator, planted: int | None) -> str:
    n_filler = int(rng.integers(3, 7))
    stmts = [_fill(FILLER_TEMPLATES[int(rng.integers(len(FILLER_TEMPLATES)))], rng)
             for _ in range(n_filler)]
    if planted is not None:
        pos = int(rng.integers(len(stmts) + 1))
        stmts.insert(pos, _fill(PLANTED_TEMPLATES[planted], rng))
    body = "\n        ".join(stmts)
    return (
        "public class Solution {\n"
        "    public int run(int[] arr, int n) {\n"
        f"        {body}\n"
        "        return n;\n"
        "    }\n"
        "}\n"
    )


def generate_corpus(seed: int = 0, students_per_problem: int = 50):
    """Synthetic corpus: 2 problems x students_per_problem x 2 attempts.

    Every student's first attempt is incorrect (contains a planted pattern);
    the second is correct or incorrect with equal probability. Returns
    (corpus, planted_map) where planted_map maps submission_id to the
    planted pattern index, or None for correct submissions.
    """
    rng = np.random.default_rng(np.random.PCG64(seed))
    submissions = []
    planted_map: dict[str, int | None] = {}
    base = parse_timestamp("2019-02-01T09:00:00.000Z")
    counter = 0
    for problem in PROBLEMS:
        for s in range(students_per_problem):
            student = f"{problem.problem_id}-stu{s:03d}"
            for attempt in range(2):
                if attempt == 0:
                    planted = int(rng.integers(len(PLANTED_TEMPLATES)))
                else:
                    planted = (
                        int(rng.integers(len(PLANTED_TEMPLATES)))
                        if rng.random() < 0.5
                        else None
                    )
                code = generate_program(rng, planted)
                sid = f"syn{counter:05d}"
                counter += 1
                ts = base.fromtimestamp(base.timestamp() + counter * 60, tz=base.tzinfo)
                submissions.append(
                    Submission(
                        submission_id=sid,
                        student_id=student,
                        problem_id=problem.problem_id,
                        timestamp=ts,
                        code=code,
                        is_correct=planted is None,
                    )
                )
                planted_map[sid] = planted
    corpus = Corpus(problems={p.problem_id: p for p in PROBLEMS}, submissions=submissions)
    return corpus, planted_map


def corpus_to_training_pairs(corpus: Corpus, min_nodes: int = 3, max_nodes: int = 60):
    """(normalized-subtree list, is_correct) pairs for SANN training."""
    from .javaparse import parse_program

    pairs = []
    for sub in corpus.submissions:
        root = parse_program(sub.code)
        subtrees = extract_subtrees(root, min_nodes, max_nodes)
        if not subtrees:
            continue
        pairs.append(([normalize_subtree(s) for s in subtrees], sub.is_correct))
    return pairs
