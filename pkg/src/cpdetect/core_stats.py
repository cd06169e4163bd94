"""Two-sample U-statistic processes over all split points of a series.

For a series ``X_1..X_n`` and split ``k`` the raw process value is the double
sum ``sum_{i<=k} sum_{j>k} h(X_i, X_j)`` with either

* the Wilcoxon kernel ``1{x < y} - 1/2``, or
* the CUSUM kernel ``x - y``,

and the normalized value divides by ``n ** 1.5``. The max-type statistics
are the largest absolute normalized values.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from ._kernels import wilcoxon_counts
from .errors import InputError

BRUTE_FORCE_MAX_N = 10_000


class Kind(str, Enum):
    WILCOXON = "wilcoxon"
    CUSUM = "cusum"


def as_series(values):
    """Validate ``values`` and return them as a read-only float64 array."""
    x = np.array(values, dtype=np.float64)
    if x.ndim != 1:
        raise InputError(f"series must be one-dimensional, got shape {x.shape}")
    if x.size < 2:
        raise InputError(f"series needs at least 2 observations, got {x.size}")
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.isfinite(x))[0])
        raise InputError(f"series contains a non-finite value at index {bad}")
    x.flags.writeable = False
    return x


@dataclass(frozen=True)
class ProcessTrace:
    """Values of the process at split points ``k = 1..n-1``.

    ``raw[k-1]`` is the inner double sum at split ``k``. For the Wilcoxon
    kernel ``counts`` holds the exact pair counts ``#{i<=k<j : X_i < X_j}``,
    so ``raw = counts - k(n-k)/2``.
    """

    kind: Kind
    n: int
    raw: np.ndarray
    normalized: np.ndarray
    counts: np.ndarray | None = None

    @property
    def k(self):
        return np.arange(1, self.n, dtype=np.int64)

    @property
    def grid(self):
        """Split fractions ``k/n``."""
        return self.k / self.n


@dataclass(frozen=True)
class MaxStatistic:
    value: float
    argmax_k: int


def _trace(kind, n, raw, counts=None):
    raw = np.asarray(raw, dtype=np.float64)
    normalized = raw / n**1.5
    for arr in (raw, normalized, counts):
        if arr is not None:
            arr.flags.writeable = False
    return ProcessTrace(Kind(kind), n, raw, normalized, counts)


def _centering(n):
    k = np.arange(1, n, dtype=np.int64)
    return k * (n - k)


def cusum_process(series):
    """CUSUM process via the prefix-sum identity ``n*S_k - k*S_n``. O(n)."""
    x = as_series(series)
    n = x.size
    s = np.cumsum(x)
    k = np.arange(1, n, dtype=np.float64)
    raw = n * s[:-1] - k * s[-1]
    return _trace(Kind.CUSUM, n, raw)


def dense_ranks(x):
    """Dense ranks in ``[0, m)`` and the number ``m`` of distinct values."""
    levels, inverse = np.unique(x, return_inverse=True)
    return np.ascontiguousarray(inverse.ravel(), dtype=np.int64), levels.size


def wilcoxon_process(series):
    """Wilcoxon process in O(n log n) with exact integer pair counts.

    Ties count as ``1{x < y} = 0``.
    """
    x = as_series(series)
    n = x.size
    ranks, m = dense_ranks(x)
    counts = wilcoxon_counts(ranks, m)
    raw = counts - _centering(n) / 2.0
    return _trace(Kind.WILCOXON, n, raw, counts)


def brute_force_process(series, kind):
    """Literal double-sum evaluation for every split. Test oracle only."""
    x = as_series(series)
    n = x.size
    if n > BRUTE_FORCE_MAX_N:
        raise InputError(
            f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got n = {n}"
        )
    kind = Kind(kind)
    raw = np.empty(n - 1)
    if kind is Kind.WILCOXON:
        counts = np.empty(n - 1, dtype=np.int64)
        for k in range(1, n):
            counts[k - 1] = np.count_nonzero(x[:k, None] < x[None, k:])
        raw[:] = counts - _centering(n) / 2.0
        return _trace(kind, n, raw, counts)
    for k in range(1, n):
        raw[k - 1] = np.sum(x[:k, None] - x[None, k:])
    return _trace(kind, n, raw)


def process(series, kind):
    kind = Kind(kind)
    if kind is Kind.WILCOXON:
        return wilcoxon_process(series)
    return cusum_process(series)


def max_statistic(trace):
    """Largest ``|normalized|`` and the smallest split attaining it."""
    a = np.abs(trace.normalized)
    idx = int(np.argmax(a))
    return MaxStatistic(float(a[idx]), idx + 1)
