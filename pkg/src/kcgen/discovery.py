"""KC inventory construction and submission-to-KC mapping.

Each high-attention subtree is represented as its encoding concatenated
with the attention-weighted mean of its neighbors' encodings, embedded by
the VAE encoder, and assigned to the nearest of the k=50 centroids.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .corpus import Submission
from .javaparse import parse_program
from .kmeans import kmeans_fit, nearest_centroid
from .sann import SannModel, ScoredSubtree, high_attention_subtrees
from .subtrees import extract_subtrees, normalize_subtree, snippet_for
from .vae import VaeModel, encode_latent

DEFAULT_K = 50
DEFAULT_TARGET_CAP = 5


class DiscoveryError(Exception):
    pass


@dataclass
class KcInventory:
    centroids: np.ndarray  # (k, d_z)
    kc_meta: dict[int, dict] = field(default_factory=dict)  # kc_id -> {label, description}
    provenance: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    def to_json(self) -> str:
        doc = {
            "k": self.k,
            "d_z": int(self.centroids.shape[1]),
            "centroids": [[float(v) for v in row] for row in self.centroids],
            "kc_meta": {str(kc): meta for kc, meta in sorted(self.kc_meta.items())},
            "provenance": self.provenance,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        centroids = np.array(doc["centroids"], dtype=np.float64)
        if centroids.shape[0] != doc["k"]:
            raise DiscoveryError("inventory centroid count does not match k")
        return cls(
            centroids=centroids,
            kc_meta={int(kc): meta for kc, meta in doc.get("kc_meta", {}).items()},
            provenance=doc.get("provenance", {}),
        )


@dataclass(frozen=True)
class KcTarget:
    kc_id: int
    supporter: ScoredSubtree
    snippet: str


@dataclass
class KcAssignment:
    submission_id: str
    targets: list[KcTarget]

    def to_record(self) -> dict:
        return {
            "submission_id": self.submission_id,
            "targets": [
                {
                    "kc_id": t.kc_id,
                    "attention": t.supporter.attention,
                    "tokens": list(t.supporter.subtree.tokens),
                    "snippet": t.snippet,
                }
                for t in self.targets
            ],
        }


def context_representation(scored: ScoredSubtree, neighbors) -> np.ndarray:
    """[encoding || attention-weighted mean of neighbor encodings].

    The context half is the zero vector when there are no neighbors.
    """
    enc = scored.encoding
    neighbors = list(neighbors)
    if not neighbors:
        ctx = np.zeros_like(enc)
    else:
        att = np.array([n.attention for n in neighbors])
        encs = np.stack([n.encoding for n in neighbors])
        ctx = (att[:, None] * encs).sum(axis=0) / att.sum()
    return np.concatenate([enc, ctx])


def submission_scored_subtrees(
    submission: Submission,
    sann: SannModel,
    threshold: float = 0.5,
    min_nodes: int = 3,
    max_nodes: int = 60,
) -> list[ScoredSubtree]:
    """Parse, extract, normalize, and attention-filter one submission."""
    try:
        root = parse_program(submission.code)
    except Exception as exc:
        raise DiscoveryError(f"submission {submission.submission_id}: {exc}") from exc
    subtrees = extract_subtrees(root, min_nodes, max_nodes)
    if not subtrees:
        raise DiscoveryError(f"submission {submission.submission_id}: no eligible subtrees")
    normalized = [normalize_subtree(s) for s in subtrees]
    return high_attention_subtrees(sann, normalized, threshold)


def context_representations(scored: list[ScoredSubtree]) -> list[np.ndarray]:
    return [
        context_representation(s, scored[:i] + scored[i + 1 :])
        for i, s in enumerate(scored)
    ]


def build_inventory(
    latents,
    k: int = DEFAULT_K,
    seed: int = 0,
    max_iters: int = 100,
    provenance: dict | None = None,
) -> KcInventory:
    result = kmeans_fit(np.asarray(latents), k=k, seed=seed, max_iters=max_iters)
    return KcInventory(centroids=result.centroids, provenance=provenance or {})


def assign_kc(inventory: KcInventory, z) -> int:
    """Nearest centroid by squared Euclidean distance; ties to smallest id."""
    return nearest_centroid(inventory.centroids, z)


def kc_targets(
    submission: Submission,
    sann: SannModel,
    vae: VaeModel,
    inventory: KcInventory,
    threshold: float = 0.5,
    target_cap: int = DEFAULT_TARGET_CAP,
    min_nodes: int = 3,
    max_nodes: int = 60,
) -> KcAssignment:
    """Map a submission's high-attention subtrees to KC IDs.

    Targets are deduplicated by kc_id (highest-attention supporter kept),
    ordered by descending supporter attention, and capped.
    """
    scored = submission_scored_subtrees(submission, sann, threshold, min_nodes, max_nodes)
    reps = context_representations(scored)
    best: dict[int, KcTarget] = {}
    for s, rep in zip(scored, reps):
        z = encode_latent(vae, rep)
        kc = assign_kc(inventory, z)
        snippet = (
            snippet_for(s.subtree.origin, submission.code)
            if s.subtree.origin is not None
            else ""
        )
        cur = best.get(kc)
        if cur is None or s.attention > cur.supporter.attention:
            best[kc] = KcTarget(kc_id=kc, supporter=s, snippet=snippet)
    ordered = sorted(best.values(), key=lambda t: (-t.supporter.attention, t.kc_id))
    return KcAssignment(submission_id=submission.submission_id, targets=ordered[:target_cap])
