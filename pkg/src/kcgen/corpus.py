"""Submission corpus loading, last-incorrect selection, and seeded sampling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone


class CorpusError(Exception):
    """Raised for malformed corpus files or unresolvable references."""


@dataclass(frozen=True)
class Submission:
    submission_id: str
    student_id: str
    problem_id: str
    timestamp: datetime
    code: str
    is_correct: bool

    def to_record(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "student_id": self.student_id,
            "problem_id": self.problem_id,
            "timestamp": format_timestamp(self.timestamp),
            "code": self.code,
            "is_correct": self.is_correct,
        }


@dataclass(frozen=True)
class Problem:
    problem_id: str
    title: str
    statement: str


@dataclass
class Corpus:
    problems: dict[str, Problem] = field(default_factory=dict)
    submissions: list[Submission] = field(default_factory=list)

    def counts_by_problem(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for sub in self.submissions:
            counts[sub.problem_id] = counts.get(sub.problem_id, 0) + 1
        return counts


SUBMISSION_FIELDS = (
    "submission_id",
    "student_id",
    "problem_id",
    "timestamp",
    "code",
    "is_correct",
)

PROBLEM_FIELDS = ("problem_id", "title", "statement")


def parse_timestamp(raw: str) -> datetime:
    """Parse an ISO-8601 instant; naive values are taken as UTC."""
    ts = datetime.fromisoformat(raw.replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"


def _load_jsonl(path, required, label):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"{label} line {lineno}: invalid JSON ({exc})") from exc
            missing = [f for f in required if f not in rec]
            if missing:
                raise CorpusError(
                    f"{label} line {lineno}: missing field(s) {', '.join(missing)}"
                )
            records.append((lineno, rec))
    return records


def load_corpus(submissions_path, problems_path) -> Corpus:
    """Load a corpus from a submissions JSONL file plus a problems sidecar.

    Raises CorpusError naming the offending line for schema violations, and
    listing every unresolvable problem_id when referential checks fail.
    """
    problems: dict[str, Problem] = {}
    for lineno, rec in _load_jsonl(problems_path, PROBLEM_FIELDS, "problems"):
        if not rec["statement"]:
            raise CorpusError(f"problems line {lineno}: empty statement")
        problems[rec["problem_id"]] = Problem(
            problem_id=rec["problem_id"], title=rec["title"], statement=rec["statement"]
        )

    submissions: list[Submission] = []
    seen_ids: set[str] = set()
    for lineno, rec in _load_jsonl(submissions_path, SUBMISSION_FIELDS, "submissions"):
        if not rec["code"]:
            raise CorpusError(f"submissions line {lineno}: empty code")
        if rec["submission_id"] in seen_ids:
            raise CorpusError(
                f"submissions line {lineno}: duplicate submission_id {rec['submission_id']!r}"
            )
        seen_ids.add(rec["submission_id"])
        try:
            ts = parse_timestamp(rec["timestamp"])
        except ValueError as exc:
            raise CorpusError(f"submissions line {lineno}: bad timestamp ({exc})") from exc
        submissions.append(
            Submission(
                submission_id=rec["submission_id"],
                student_id=rec["student_id"],
                problem_id=rec["problem_id"],
                timestamp=ts,
                code=rec["code"],
                is_correct=bool(rec["is_correct"]),
            )
        )

    unresolved = sorted({s.problem_id for s in submissions if s.problem_id not in problems})
    if unresolved:
        raise CorpusError("unresolvable problem_id(s): " + ", ".join(unresolved))
    return Corpus(problems=problems, submissions=submissions)


def last_incorrect_attempts(corpus: Corpus, problem_id: str) -> list[Submission]:
    """Each student's latest incorrect submission for the problem.

    Timestamp ties break toward the lexicographically largest submission_id.
    Output is sorted by student_id.
    """
    if problem_id not in corpus.problems:
        raise CorpusError(f"unknown problem_id: {problem_id!r}")
    best: dict[str, Submission] = {}
    for sub in corpus.submissions:
        if sub.problem_id != problem_id or sub.is_correct:
            continue
        cur = best.get(sub.student_id)
        if cur is None or (sub.timestamp, sub.submission_id) > (cur.timestamp, cur.submission_id):
            best[sub.student_id] = sub
    return [best[sid] for sid in sorted(best)]


# --- Portable sampling RNG -------------------------------------------------
#
# Sampling uses a splitmix64 stream driving a partial Fisher-Yates shuffle,
# so any implementation of this format can reproduce samples byte-for-byte.
# See README "Sampling RNG" for the normative description.

_MASK64 = (1 << 64) - 1


def _splitmix64(state: int):
    """Yield an endless splitmix64 stream from a 64-bit seed."""
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK64
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        yield z ^ (z >> 31)


def sample_submissions(candidates: list[Submission], n: int, seed: int) -> list[Submission]:
    """Uniform sample of n candidates without replacement, seed-deterministic.

    Returns all candidates when n covers them. Output preserves the
    candidates' original relative order.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not candidates:
        raise ValueError("empty candidate list")
    if len(candidates) <= n:
        return list(candidates)
    stream = _splitmix64(seed & _MASK64)
    idx = list(range(len(candidates)))
    for i in range(n):
        j = i + next(stream) % (len(idx) - i)
        idx[i], idx[j] = idx[j], idx[i]
    chosen = sorted(idx[:n])
    return [candidates[i] for i in chosen]
