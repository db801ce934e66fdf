# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: nearest-centroid assignment and signed-rank
enumeration. Mirrors the _py module's contracts exactly."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

BACKEND = "cython"


def assign_nearest(points, centroids):
    cdef double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(centroids, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], k = c.shape[0], d = p.shape[1]
    labels_arr = np.empty(n, dtype=np.int64)
    sq_arr = np.empty(n, dtype=np.float64)
    cdef long long[::1] labels = labels_arr
    cdef double[::1] sq = sq_arr
    cdef Py_ssize_t i, j, m
    cdef double best, dist, diff
    cdef long long best_j
    for i in range(n):
        best = -1.0
        best_j = 0
        for j in range(k):
            dist = 0.0
            for m in range(d):
                diff = p[i, m] - c[j, m]
                dist += diff * diff
            if best < 0.0 or dist < best:
                best = dist
                best_j = j
        labels[i] = best_j
        sq[i] = best
    return labels_arr, sq_arr


def signrank_count_leq(ranks, double w_obs):
    cdef double[::1] r = np.ascontiguousarray(ranks, dtype=np.float64)
    cdef Py_ssize_t n = r.shape[0]
    if n > 25:
        raise ValueError("enumeration limited to n <= 25")
    cdef double total = 0.0
    cdef Py_ssize_t i
    for i in range(n):
        total += r[i]
    cdef double eps = 1e-9
    cdef double thresh = w_obs + eps
    cdef unsigned long long count = 0, mask, gray, prev_gray = 0, flipped
    cdef double wplus = 0.0, wmin
    cdef Py_ssize_t bit
    cdef unsigned long long limit = (<unsigned long long>1) << n
    # Gray-code walk: each step flips one bit, so W+ updates in O(1).
    for mask in range(limit):
        gray = mask ^ (mask >> 1)
        flipped = gray ^ prev_gray
        if flipped:
            bit = 0
            while not (flipped & 1):
                flipped >>= 1
                bit += 1
            if gray & ((<unsigned long long>1) << bit):
                wplus += r[bit]
            else:
                wplus -= r[bit]
            prev_gray = gray
        wmin = wplus if wplus <= total - wplus else total - wplus
        if wmin <= thresh:
            count += 1
    return int(count)
