"""Prompt construction and response parsing for KC enrichment and
worked-example generation.

Templates are plain-text files with {{placeholder}} substitution; the
default set ships with the package and can be overridden by a template
directory. Baseline and KC-conditioned worked-example prompts share one
template and differ only in the KC section.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .javaparse import parse_program, parse_statements
from .subtrees import extract_subtrees, normalize_subtree

BASELINE = "baseline"
KC_CONDITIONED = "kc_conditioned"
ENRICHMENT = "enrichment"

MIN_STEPS = 3
MAX_STEPS = 10
MIN_LABEL_WORDS = 2
MAX_LABEL_WORDS = 6
MAX_DESC_CHARS = 300

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")


class PromptError(Exception):
    pass


class ResponseFormatError(Exception):
    pass


@dataclass(frozen=True)
class KcLabel:
    kc_id: int
    label: str
    description: str

    def __post_init__(self):
        words = self.label.split()
        if not (MIN_LABEL_WORDS <= len(words) <= MAX_LABEL_WORDS):
            raise ResponseFormatError(
                f"label must be {MIN_LABEL_WORDS}-{MAX_LABEL_WORDS} words, got {len(words)}: {self.label!r}"
            )
        desc = self.description.strip()
        if not desc or len(desc) > MAX_DESC_CHARS:
            raise ResponseFormatError("description must be a non-empty sentence of <= 300 chars")
        if not desc.endswith(".") or re.search(r"[.!?]\s", desc):
            raise ResponseFormatError(f"description must be one sentence: {desc!r}")


@dataclass(frozen=True)
class PromptBundle:
    system_text: str
    user_text: str
    variant: str
    substitutions: dict = field(default_factory=dict)


@dataclass(frozen=True)
class WorkedExample:
    question: str
    overview: str
    steps: tuple  # of (explanation, code)
    variant: str
    kc_targets: tuple = ()

    def to_record(self) -> dict:
        return {
            "question": self.question,
            "overview": self.overview,
            "steps": [{"explanation": e, "code": c} for e, c in self.steps],
            "variant": self.variant,
            "kc_targets": [
                {"kc_id": t.kc_id, "label": t.label, "description": t.description}
                for t in self.kc_targets
            ],
        }


def load_template(name: str, template_dir=None) -> str:
    if template_dir is not None:
        path = Path(template_dir) / name
        if path.exists():
            return path.read_text(encoding="utf-8")
    return resources.files("kcgen.templates").joinpath(name).read_text(encoding="utf-8")


def substitute(template: str, values: dict) -> str:
    def repl(match):
        key = match.group(1)
        if key not in values:
            raise PromptError(f"unresolved placeholder {{{{{key}}}}}")
        return str(values[key])

    text = _PLACEHOLDER_RE.sub(repl, template)
    leftover = _PLACEHOLDER_RE.search(text)
    if leftover:
        raise PromptError(f"unresolved placeholder {{{{{leftover.group(1)}}}}}")
    return text


def build_enrichment_prompt(problem, submission, snippet: str, kc_id: int, template_dir=None) -> PromptBundle:
    """Prompt asking for a 2-6 word label and one-sentence description."""
    if not snippet.strip():
        raise PromptError("empty snippet")
    values = {
        "problem_statement": problem.statement,
        "student_code": submission.code,
        "snippet": snippet,
        "kc_id": kc_id,
    }
    return PromptBundle(
        system_text=load_template("enrichment_system.txt", template_dir),
        user_text=substitute(load_template("enrichment_user.txt", template_dir), values),
        variant=ENRICHMENT,
        substitutions=values,
    )


def parse_enrichment_response(text: str, kc_id: int = -1) -> KcLabel:
    label = desc = None
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.upper().startswith("LABEL:"):
            label = stripped[len("LABEL:"):].strip()
        elif stripped.upper().startswith("DESC:"):
            desc = stripped[len("DESC:"):].strip()
    if label is None or desc is None:
        raise ResponseFormatError("response must contain LABEL: and DESC: lines")
    return KcLabel(kc_id=kc_id, label=label, description=desc)


def format_kc_list(targets) -> str:
    return "".join(f"- {t.label}: {t.description}\n" for t in targets)


def build_worked_example_prompt(problem, submission, variant: str, targets=(), template_dir=None) -> PromptBundle:
    """Shared template for both variants; only the KC section differs."""
    targets = tuple(targets)
    if variant == KC_CONDITIONED and not targets:
        raise PromptError("kc_conditioned prompt requires at least one KC target")
    if variant == BASELINE and targets:
        raise PromptError("baseline prompt must not carry KC targets")
    if variant not in (BASELINE, KC_CONDITIONED):
        raise PromptError(f"unknown variant {variant!r}")
    if variant == KC_CONDITIONED:
        kc_section = substitute(
            load_template("kc_section.txt", template_dir), {"kc_list": format_kc_list(targets)}
        )
    else:
        kc_section = ""
    values = {
        "problem_statement": problem.statement,
        "student_code": submission.code,
        "kc_section": kc_section,
    }
    return PromptBundle(
        system_text=load_template("worked_example_system.txt", template_dir),
        user_text=substitute(load_template("worked_example_user.txt", template_dir), values),
        variant=variant,
        substitutions=values,
    )


_STEP_RE = re.compile(r"^STEP (\d+):\s*(.*)$")
_FENCE_RE = re.compile(r"^```")


def parse_worked_example(text: str, variant: str, targets=()) -> WorkedExample:
    """Parse the tagged plain-text layout into a WorkedExample.

    Enforces 3-10 consecutively numbered steps, each pairing a non-empty
    explanation with a non-empty fenced code block.
    """
    lines = text.splitlines()
    question_parts: list[str] = []
    overview_parts: list[str] = []
    steps: list[tuple[str, str]] = []
    section = None
    cur_explanation: list[str] = []
    cur_code: list[str] = []
    in_fence = False
    step_no = 0

    def close_step():
        nonlocal cur_explanation, cur_code
        if step_no:
            explanation = "\n".join(cur_explanation).strip()
            code = "\n".join(cur_code).rstrip()
            if not explanation:
                raise ResponseFormatError(f"step {step_no} has no explanation")
            if not code.strip():
                raise ResponseFormatError(f"step {step_no} has no code")
            steps.append((explanation, code))
        cur_explanation, cur_code = [], []

    for line in lines:
        if in_fence:
            if _FENCE_RE.match(line.strip()):
                in_fence = False
            else:
                cur_code.append(line)
            continue
        m = _STEP_RE.match(line.strip())
        if m:
            close_step()
            step_no += 1
            if int(m.group(1)) != step_no:
                raise ResponseFormatError(
                    f"expected STEP {step_no}, found STEP {m.group(1)}"
                )
            section = "step"
            if m.group(2).strip():
                cur_explanation.append(m.group(2).strip())
            continue
        if line.strip().upper().startswith("QUESTION:"):
            section = "question"
            question_parts.append(line.strip()[len("QUESTION:"):].strip())
            continue
        if line.strip().upper().startswith("OVERVIEW:"):
            section = "overview"
            overview_parts.append(line.strip()[len("OVERVIEW:"):].strip())
            continue
        if _FENCE_RE.match(line.strip()):
            if section != "step":
                raise ResponseFormatError("code block outside a step")
            in_fence = True
            continue
        if section == "question":
            question_parts.append(line)
        elif section == "overview":
            overview_parts.append(line)
        elif section == "step":
            if line.strip():
                cur_explanation.append(line.strip())
    close_step()

    question = "\n".join(question_parts).strip()
    overview = "\n".join(overview_parts).strip()
    if not question:
        raise ResponseFormatError("missing QUESTION section")
    if not overview:
        raise ResponseFormatError("missing OVERVIEW section")
    if not (MIN_STEPS <= len(steps) <= MAX_STEPS):
        raise ResponseFormatError(
            f"worked example must have {MIN_STEPS}-{MAX_STEPS} steps, got {len(steps)}"
        )
    return WorkedExample(
        question=question,
        overview=overview,
        steps=tuple(steps),
        variant=variant,
        kc_targets=tuple(targets),
    )


def render_worked_example(example: WorkedExample) -> str:
    """Inverse of parse_worked_example on the structured fields."""
    parts = [f"QUESTION: {example.question}", f"OVERVIEW: {example.overview}"]
    for i, (explanation, code) in enumerate(example.steps, start=1):
        parts.append(f"STEP {i}: {explanation}")
        parts.append(f"```java\n{code}\n```")
    return "\n".join(parts) + "\n"


# --- KC coverage pre-screen ------------------------------------------------

_STOPWORDS = {
    "a", "an", "the", "of", "in", "on", "with", "and", "or", "to", "for",
    "use", "using", "used",
}


@dataclass(frozen=True)
class CoverageTarget:
    label: KcLabel
    supporter_tokens: tuple


def _content_words(label: str) -> set[str]:
    return {w.lower() for w in re.findall(r"[a-zA-Z&|+*/%<>=!-]+", label)} - _STOPWORDS


def _step_code_subtree_forms(example: WorkedExample) -> set:
    code = "\n".join(code for _, code in example.steps)
    root = None
    for parser in (parse_statements, parse_program):
        try:
            root = parser(code)
            break
        except Exception:
            continue
    if root is None:
        wrapped = "public class W { public void m(int[] arr, int n) {\n%s\n} }" % code
        try:
            root = parse_program(wrapped)
        except Exception:
            return set()
    return {normalize_subtree(s).tokens for s in extract_subtrees(root, 1, 10_000)}


def kc_coverage_heuristic(example: WorkedExample, targets: list[CoverageTarget]) -> dict:
    """Machine pre-screen of KC coverage (authoritative scoring is human).

    in_text: the overview or a step explanation mentions at least half of
    the label's content words. in_code: the target's normalized supporter
    pattern appears among the normalized subtrees of the concatenated step
    code; unparseable code counts as not covered, never an error.
    """
    if not targets:
        raise ValueError("need at least one target")
    prose = " ".join([example.overview] + [e for e, _ in example.steps]).lower()
    prose_words = set(re.findall(r"[a-zA-Z&|+*/%<>=!-]+", prose))
    code_forms = _step_code_subtree_forms(example)
    result = {}
    for target in targets:
        words = _content_words(target.label.label)
        overlap = len(words & prose_words)
        in_text = bool(words) and overlap * 2 >= len(words)
        in_code = tuple(target.supporter_tokens) in code_forms
        result[target.label.kc_id] = {"in_text": in_text, "in_code": in_code}
    return result
