"""NumPy fallback implementations of the hot kernels."""

from __future__ import annotations

import numpy as np

BACKEND = "python"


def assign_nearest(points: np.ndarray, centroids: np.ndarray):
    """Nearest centroid per point by squared Euclidean distance.

    Ties break toward the smallest centroid index. Returns (labels, sqdists).
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    centroids = np.ascontiguousarray(centroids, dtype=np.float64)
    n = points.shape[0]
    labels = np.empty(n, dtype=np.int64)
    sqdists = np.empty(n, dtype=np.float64)
    # Chunked to bound the (chunk x k) distance matrix.
    chunk = max(1, min(n, 4096))
    for lo in range(0, n, chunk):
        hi = min(n, lo + chunk)
        diff = points[lo:hi, None, :] - centroids[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        labels[lo:hi] = np.argmin(d2, axis=1)
        sqdists[lo:hi] = d2[np.arange(hi - lo), labels[lo:hi]]
    return labels, sqdists


def signrank_count_leq(ranks: np.ndarray, w_obs: float) -> int:
    """Count sign assignments with min(W+, W-) <= w_obs (+eps).

    Enumerates all 2^n assignments over the given absolute-difference ranks.
    """
    ranks = np.asarray(ranks, dtype=np.float64)
    n = ranks.shape[0]
    if n > 25:
        raise ValueError("enumeration limited to n <= 25")
    total = float(ranks.sum())
    eps = 1e-9
    count = 0
    chunk = 1 << 16
    masks = np.arange(1 << n, dtype=np.uint64)
    for lo in range(0, 1 << n, chunk):
        m = masks[lo : lo + chunk]
        bits = (m[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
        wplus = bits.astype(np.float64) @ ranks
        wmin = np.minimum(wplus, total - wplus)
        count += int(np.count_nonzero(wmin <= w_obs + eps))
    return count
