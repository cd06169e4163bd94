"""Subsampling estimators of the long-run scale used to studentize the tests.

Both estimators work on block sums of length ``l``. Non-overlapping blocks
use the ``n // l`` disjoint blocks (a partial trailing block is dropped);
overlapping blocks use all ``n - l + 1`` windows. Each block sum is centered
by ``l`` times the grand mean of the series.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core_stats import as_series
from .errors import DegenerateVarianceError, InputError

RHO_CLAMP = 0.999


class Overlap(str, Enum):
    OVERLAPPING = "ol"
    NON_OVERLAPPING = "nol"


@dataclass(frozen=True)
class BlockLengthRule:
    """Either a fixed block length or Carlstein's AR(1) plug-in rule."""

    length: int | None = None

    @classmethod
    def fixed(cls, length):
        if int(length) != length or length < 1:
            raise InputError(f"block length must be a positive integer, got {length!r}")
        return cls(int(length))

    @classmethod
    def adaptive(cls):
        return cls(None)

    @property
    def is_adaptive(self):
        return self.length is None

    def __str__(self):
        return "adaptive" if self.is_adaptive else f"fixed:{self.length}"


@dataclass(frozen=True)
class VarianceEstimate:
    sigma_hat: float
    block_length_used: int
    rho_hat: float | None = None


def lag1_autocorrelation(series):
    """Sample lag-one autocorrelation, clamped to ``[-0.999, 0.999]``."""
    x = as_series(series)
    if x.size < 3:
        raise InputError("lag-1 autocorrelation needs at least 3 observations")
    d = x - x.mean()
    denom = float(np.dot(d, d))
    if denom == 0.0 or np.ptp(x) == 0.0:
        raise DegenerateVarianceError(
            "degenerate variance: lag-1 autocorrelation undefined for a constant series"
        )
    rho = float(np.dot(d[:-1], d[1:])) / denom
    return min(max(rho, -RHO_CLAMP), RHO_CLAMP)


def carlstein_block_length(n, rho):
    """MSE-optimal block length for AR(1) data, capped at ``n // 2``.

    Uses ``|rho|`` so negative autocorrelation maps to the same length as
    positive autocorrelation of equal strength.
    """
    if n < 2:
        raise InputError(f"n must be at least 2, got {n}")
    if not -1.0 < rho < 1.0:
        raise InputError(f"|rho| must be < 1, got {rho}")
    r = abs(rho)
    length = math.ceil(n ** (1.0 / 3.0) * (2.0 * r / (1.0 - r * r)) ** (2.0 / 3.0))
    return min(max(length, 1), n // 2)


def resolve_block_length(series, rule):
    """Return ``(l, rho_hat)``; ``rho_hat`` is None for a fixed rule."""
    x = as_series(series)
    n = x.size
    if rule.is_adaptive:
        rho = lag1_autocorrelation(x)
        return carlstein_block_length(n, rho), rho
    if rule.length > n / 2:
        raise InputError(f"block length {rule.length} exceeds n/2 = {n / 2:g}")
    return rule.length, None


def block_sums(x, length, overlap):
    overlap = Overlap(overlap)
    if overlap is Overlap.NON_OVERLAPPING:
        m = x.size // length
        return x[: m * length].reshape(m, length).sum(axis=1)
    cs = np.concatenate(([0.0], np.cumsum(x)))
    return cs[length:] - cs[:-length]


def edf_transform(series):
    """``Y_j = F_n(X_j) = #{i : X_i <= X_j} / n``."""
    x = as_series(series)
    s = np.sort(x)
    return np.searchsorted(s, x, side="right") / x.size


def _centered_blocks(y, length, overlap):
    if np.ptp(y) == 0.0:
        n_blocks = y.size // length if Overlap(overlap) is Overlap.NON_OVERLAPPING else y.size - length + 1
        return np.zeros(n_blocks)
    d = y - y.mean()
    return block_sums(d, length, overlap) - length * d.mean()


def sigma2_subsampling(series, rule, overlap=Overlap.NON_OVERLAPPING):
    """Block estimate of ``sigma_2``, the long-run standard deviation of X.

    Returns the square root of the mean of ``(B_i - l * mean(X))**2 / l``.
    """
    x = as_series(series)
    length, rho = resolve_block_length(x, rule)
    c = _centered_blocks(x, length, overlap)
    sigma2 = float(np.mean(c * c)) / length
    return VarianceEstimate(math.sqrt(sigma2), length, rho)


def sigma1_subsampling(series, rule, overlap=Overlap.NON_OVERLAPPING):
    """Block estimate of ``sigma_1`` from the EDF-transformed series.

    Mean absolute centered block sum of ``F_n(X)``, divided by ``sqrt(l)``
    and scaled by ``sqrt(pi/2)`` so that it is unbiased for a Gaussian
    block sum. This estimates the scale directly, not its square.
    """
    x = as_series(series)
    length, rho = resolve_block_length(x, rule)
    y = edf_transform(x)
    c = _centered_blocks(y, length, overlap)
    sigma1 = math.sqrt(math.pi / 2.0) * float(np.mean(np.abs(c))) / math.sqrt(length)
    return VarianceEstimate(sigma1, length, rho)
