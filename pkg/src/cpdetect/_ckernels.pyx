# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Mirrors :mod:`cpdetect._pykernels` one-to-one."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def wilcoxon_counts(const cnp.int64_t[::1] ranks, Py_ssize_t n_levels):
    """Pair counts ``#{i <= k < j : r_i < r_j}`` for ``k = 1..n-1``.

    ``ranks`` are dense ranks in ``[0, n_levels)``. Two Fenwick sweeps,
    O(n log n).
    """
    cdef Py_ssize_t n = ranks.shape[0]
    cdef Py_ssize_t t, j, r
    cdef cnp.int64_t acc, total
    cdef cnp.int64_t[::1] tree = np.zeros(n_levels + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] less_before = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] greater_after = np.empty(n, dtype=np.int64)
    out = np.empty(max(n - 1, 0), dtype=np.int64)
    cdef cnp.int64_t[::1] counts = out

    # forward sweep: strictly smaller values already seen
    for t in range(n):
        r = ranks[t]
        acc = 0
        j = r  # prefix over ranks 0..r-1 is tree index r
        while j > 0:
            acc += tree[j]
            j -= j & (-j)
        less_before[t] = acc
        j = r + 1
        while j <= n_levels:
            tree[j] += 1
            j += j & (-j)

    tree[:] = 0
    total = 0
    # backward sweep: strictly larger values still to come
    for t in range(n - 1, -1, -1):
        r = ranks[t]
        acc = 0
        j = r + 1
        while j > 0:
            acc += tree[j]
            j -= j & (-j)
        greater_after[t] = total - acc
        j = r + 1
        while j <= n_levels:
            tree[j] += 1
            j += j & (-j)
        total += 1

    acc = 0
    for t in range(n - 1):
        acc += greater_after[t] - less_before[t]
        counts[t] = acc
    return out
