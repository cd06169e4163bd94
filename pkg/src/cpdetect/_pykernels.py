"""Pure-Python fallback for the compiled kernels in ``_ckernels.pyx``."""

import numpy as np


class FenwickTree:
    """Binary indexed tree of counts over positions ``0..size-1``."""

    def __init__(self, size):
        self.size = size
        self.tree = [0] * (size + 1)

    def add(self, pos, value=1):
        j = pos + 1
        tree = self.tree
        while j <= self.size:
            tree[j] += value
            j += j & -j

    def prefix(self, end):
        """Sum over positions ``0..end-1``."""
        j = end
        tree = self.tree
        acc = 0
        while j > 0:
            acc += tree[j]
            j -= j & -j
        return acc


def wilcoxon_counts(ranks, n_levels):
    ranks = [int(r) for r in ranks]
    n = len(ranks)

    less_before = [0] * n
    fw = FenwickTree(n_levels)
    for t, r in enumerate(ranks):
        less_before[t] = fw.prefix(r)
        fw.add(r)

    greater_after = [0] * n
    bw = FenwickTree(n_levels)
    for t in range(n - 1, -1, -1):
        r = ranks[t]
        greater_after[t] = (n - 1 - t) - bw.prefix(r + 1)
        bw.add(r)

    counts = np.empty(max(n - 1, 0), dtype=np.int64)
    acc = 0
    for t in range(n - 1):
        acc += greater_after[t] - less_before[t]
        counts[t] = acc
    return counts
