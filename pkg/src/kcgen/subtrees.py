"""Candidate subtree enumeration and identifier/literal normalization."""

from __future__ import annotations

import json
from dataclasses import dataclass

from .javaparse import AstNode

# Root kinds eligible as pattern candidates: expressions and conditions,
# assignments, declarations, statement-level constructs, and loop headers.
ELIGIBLE_KINDS = frozenset(
    {
        "binary_expr",
        "unary_expr",
        "ternary_expr",
        "assignment",
        "local_var_decl",
        "if_stmt",
        "for_stmt",
        "while_stmt",
        "return_stmt",
        "for_header",
    }
)

DEFAULT_MIN_NODES = 3
DEFAULT_MAX_NODES = 60

# Leaf kind -> placeholder class. Kinds not listed keep their token text.
PLACEHOLDERS = {
    "identifier": "VAR",
    "method_name": "CALL",
    "type_name": "TYPE",
    "num_lit": "NUM",
    "str_lit": "STR",
    "char_lit": "STR",
}


@dataclass(frozen=True)
class Subtree:
    root: AstNode
    depth: int
    node_count: int
    source_span: tuple[int, int]


@dataclass(frozen=True)
class NormalizedSubtree:
    tokens: tuple[str, ...]
    origin: Subtree | None = None
    placeholder_map: tuple[tuple[str, str], ...] = ()

    def to_record(self) -> dict:
        rec = {"tokens": list(self.tokens)}
        if self.origin is not None:
            rec["span"] = list(self.origin.source_span)
            rec["kind"] = self.origin.root.kind
        return rec

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def _measure(node: AstNode) -> tuple[int, int]:
    """(node_count, depth) of the rooted fragment."""
    count = 1
    depth = 1
    for child in node.children:
        c, d = _measure(child)
        count += c
        depth = max(depth, d + 1)
    return count, depth


def extract_subtrees(
    root: AstNode,
    min_nodes: int = DEFAULT_MIN_NODES,
    max_nodes: int = DEFAULT_MAX_NODES,
) -> list[Subtree]:
    """All eligible-rooted fragments within the size bounds, in pre-order."""
    if not (1 <= min_nodes <= max_nodes):
        raise ValueError("require 1 <= min_nodes <= max_nodes")
    out = []
    for node in root.walk():
        if node.kind not in ELIGIBLE_KINDS:
            continue
        count, depth = _measure(node)
        if min_nodes <= count <= max_nodes:
            out.append(Subtree(root=node, depth=depth, node_count=count, source_span=node.span))
    return out


def normalize_tokens(root: AstNode) -> tuple[tuple[str, ...], tuple[tuple[str, str], ...]]:
    tokens = []
    pmap = {}
    for leaf in root.leaves():
        cls = PLACEHOLDERS.get(leaf.kind)
        if cls is None:
            tokens.append(leaf.token_text)
        else:
            tokens.append(cls)
            pmap.setdefault(leaf.token_text, cls)
    return tuple(tokens), tuple(sorted(pmap.items()))


def normalize_subtree(subtree: Subtree) -> NormalizedSubtree:
    """Abstract identifiers and literals to placeholder classes.

    Two fragments with the same logic modulo renaming and literal values
    normalize to identical token sequences.
    """
    tokens, pmap = normalize_tokens(subtree.root)
    return NormalizedSubtree(tokens=tokens, origin=subtree, placeholder_map=pmap)


PLACEHOLDER_CLASSES = frozenset(PLACEHOLDERS.values())


def normalize_sequence(tokens) -> tuple[str, ...]:
    """Lexically normalize a flat token sequence.

    Placeholder classes, keywords, operators, and punctuation are fixed
    points, so this is idempotent on already-normalized sequences.
    """
    from .javaparse import KEYWORDS

    out = []
    for tok in tokens:
        if tok in PLACEHOLDER_CLASSES or tok in KEYWORDS or tok in ("true", "false", "null"):
            out.append(tok)
        elif tok[0].isdigit():
            out.append("NUM")
        elif tok[0] in "\"'":
            out.append("STR")
        elif tok[0].isalpha() or tok[0] in "_$":
            out.append("VAR")
        else:
            out.append(tok)
    return tuple(out)


def snippet_for(subtree: Subtree, source: str) -> str:
    """Exact source text of the subtree's span, trimmed of blank edge lines."""
    start, end = subtree.source_span
    if start < 0 or end > len(source) or start > end:
        raise ValueError(f"span ({start}, {end}) out of bounds for source of length {len(source)}")
    text = source[start:end]
    lines = text.split("\n")
    while lines and not lines[0].strip():
        lines.pop(0)
    while lines and not lines[-1].strip():
        lines.pop()
    return "\n".join(lines)
