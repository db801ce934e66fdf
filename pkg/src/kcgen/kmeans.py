"""Lloyd's k-means with k-means++ seeding over the latent space.

Nearest-centroid assignment runs on the compiled kernel when available.
Empty clusters are reseeded to the point farthest from its assigned
centroid, a fixed rule so inventories reproduce exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import assign_nearest


@dataclass
class KMeansResult:
    centroids: np.ndarray  # (k, d)
    labels: np.ndarray  # (n,)
    inertia_trace: list[float] = field(default_factory=list)

    @property
    def inertia(self) -> float:
        return self.inertia_trace[-1]


def _kmeanspp_init(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centroids = np.empty((k, points.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = points[first]
    closest = np.sum((points - centroids[0]) ** 2, axis=1)
    for j in range(1, k):
        total = closest.sum()
        if total <= 0:
            # all remaining points coincide with a centroid; pick uniformly
            idx = int(rng.integers(n))
        else:
            r = rng.random() * total
            idx = int(np.searchsorted(np.cumsum(closest), r, side="right"))
            idx = min(idx, n - 1)
        centroids[j] = points[idx]
        closest = np.minimum(closest, np.sum((points - centroids[j]) ** 2, axis=1))
    return centroids


def kmeans_fit(points, k: int, seed: int = 0, max_iters: int = 100) -> KMeansResult:
    """Cluster points into k centroids; deterministic for a fixed seed.

    Stops when the assignment reaches a fixpoint or after max_iters. The
    recorded inertia trace is non-increasing.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    n = points.shape[0]
    if n < k:
        raise ValueError(f"need at least k={k} points, got {n}")
    rng = np.random.default_rng(np.random.PCG64(seed))
    centroids = _kmeanspp_init(points, k, rng)
    labels = np.full(n, -1, dtype=np.int64)
    trace: list[float] = []
    for _it in range(max_iters):
        new_labels, sqdists = assign_nearest(points, centroids)
        trace.append(float(sqdists.sum()))
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for j in range(k):
            members = points[labels == j]
            if len(members) == 0:
                farthest = int(np.argmax(sqdists))
                centroids[j] = points[farthest]
                sqdists[farthest] = 0.0
            else:
                centroids[j] = members.mean(axis=0)
    final_labels, sqdists = assign_nearest(points, centroids)
    if trace and not np.array_equal(final_labels, labels):
        trace.append(float(sqdists.sum()))
    labels = final_labels
    return KMeansResult(centroids=centroids, labels=labels, inertia_trace=trace)


def nearest_centroid(centroids: np.ndarray, z) -> int:
    """Index of the closest centroid; ties go to the smallest index."""
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (centroids.shape[1],):
        raise ValueError(f"expected vector of dimension {centroids.shape[1]}, got {z.shape}")
    labels, _ = assign_nearest(z[None, :], centroids)
    return int(labels[0])
