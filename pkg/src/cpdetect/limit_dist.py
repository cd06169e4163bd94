"""Limit distribution of the normalized U-statistic process.

Under the null hypothesis the process converges to

    Z(lam) = (1 - lam) * W1(lam) + lam * (W2(1) - W2(lam))

for a two-dimensional Brownian motion ``(W1, W2)`` with covariance matrix
``[[s11, s12], [s12, s22]]`` per unit time. For antisymmetric kernels
``W2 = -W1`` and ``Z`` is a scaled Brownian bridge, whose sup-norm follows
the Kolmogorov-Smirnov law.
"""

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InputError

_SERIES_TOL = 1e-12
_PSD_TOL = 1e-12


def ks_cdf(x):
    """``P(sup |B(t)| <= x)`` for a standard Brownian bridge ``B``."""
    x = float(x)
    if x <= 0.0:
        return 0.0
    if x < 1.0:
        # Jacobi-dual form; the alternating series converges slowly here.
        acc = 0.0
        k = 1
        c = math.pi**2 / (8.0 * x * x)
        while True:
            term = math.exp(-((2 * k - 1) ** 2) * c)
            acc += term
            if term < _SERIES_TOL:
                break
            k += 1
        return min(max(math.sqrt(2.0 * math.pi) / x * acc, 0.0), 1.0)
    acc = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        acc += term if k % 2 else -term
        if term < _SERIES_TOL:
            break
        k += 1
    return min(max(1.0 - 2.0 * acc, 0.0), 1.0)


def ks_sf(x):
    """Upper tail ``1 - ks_cdf(x)``, accurate for large ``x``."""
    x = float(x)
    if x < 1.0:
        return 1.0 - ks_cdf(x)
    acc = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        acc += term if k % 2 else -term
        if term < _SERIES_TOL * max(acc, 1e-300) or term == 0.0:
            break
        k += 1
    return min(max(2.0 * acc, 0.0), 1.0)


def ks_quantile(p, tol=1e-10):
    """Inverse of :func:`ks_cdf` by bisection."""
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InputError(f"probability must lie in (0, 1), got {p}")
    lo, hi = 0.0, 1.0
    while ks_cdf(hi) < p:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if ks_cdf(mid) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class CovarianceSpec:
    sigma11: float
    sigma12: float
    sigma22: float

    def __post_init__(self):
        s11, s12, s22 = self.sigma11, self.sigma12, self.sigma22
        if not all(math.isfinite(v) for v in (s11, s12, s22)):
            raise InputError("covariance entries must be finite")
        scale = max(abs(s11), abs(s22), abs(s12), 1.0)
        if s11 < -_PSD_TOL * scale or s22 < -_PSD_TOL * scale:
            raise InputError(f"covariance {self} has a negative diagonal entry")
        if s12 * s12 > s11 * s22 + _PSD_TOL * scale * scale:
            raise InputError(f"covariance {self} is not positive semidefinite")

    @classmethod
    def antisymmetric(cls, variance):
        """Spec of an antisymmetric kernel, for which ``W2 = -W1``."""
        return cls(variance, -variance, variance)

    def matrix(self):
        return np.array([[self.sigma11, self.sigma12], [self.sigma12, self.sigma22]])

    def sqrt(self):
        """Symmetric square root of :meth:`matrix`."""
        w, v = np.linalg.eigh(self.matrix())
        return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.T


def z_covariance(lam, mu, spec):
    """``Cov(Z(lam), Z(mu))`` in closed form."""
    for name, v in (("lambda", lam), ("mu", mu)):
        if not 0.0 <= v <= 1.0:
            raise InputError(f"{name} must lie in [0, 1], got {v}")
    m = min(lam, mu)
    # 1 - mu - lam + min(lam, mu) == 1 - max(lam, mu); this form is exact at the endpoints
    return (
        spec.sigma11 * ((1 - lam) * (1 - mu) * m)
        + spec.sigma22 * (lam * mu * (1 - max(lam, mu)))
        + spec.sigma12 * (mu * (1 - lam) * (lam - m) + lam * (1 - mu) * (mu - m))
    )


@dataclass(frozen=True)
class LimitPath:
    grid: np.ndarray
    z_values: np.ndarray


def simulate_limit_paths(spec, grid_size, n_paths, rng):
    """Simulate ``n_paths`` paths of ``Z`` on ``linspace(0, 1, grid_size)``.

    Returns ``(grid, z)`` with ``z`` of shape ``(n_paths, grid_size)``.
    ``rng`` is a seed or a :class:`numpy.random.Generator`.
    """
    if grid_size < 2:
        raise InputError(f"grid_size must be at least 2, got {grid_size}")
    rng = np.random.default_rng(rng)
    grid = np.linspace(0.0, 1.0, grid_size)
    steps = grid_size - 1
    root = spec.sqrt() * math.sqrt(1.0 / steps)
    inc = rng.standard_normal((n_paths, steps, 2)) @ root
    w = np.zeros((n_paths, grid_size, 2))
    np.cumsum(inc, axis=1, out=w[:, 1:, :])
    w1, w2 = w[..., 0], w[..., 1]
    z = (1.0 - grid) * w1 + grid * (w2[:, -1:] - w2)
    return grid, z


def simulate_limit_process(spec, grid_size=2048, rng=None):
    """One path of ``Z``; deterministic for a fixed seed."""
    grid, z = simulate_limit_paths(spec, grid_size, 1, rng)
    return LimitPath(grid, z[0])


def sup_abs(path):
    return float(np.max(np.abs(path.z_values)))


def sample_sup_abs(spec, n_paths, grid_size=2048, rng=None, chunk=1000):
    """``sup |Z|`` for ``n_paths`` independent paths, simulated in chunks."""
    rng = np.random.default_rng(rng)
    out = np.empty(n_paths)
    for start in range(0, n_paths, chunk):
        stop = min(start + chunk, n_paths)
        _, z = simulate_limit_paths(spec, grid_size, stop - start, rng)
        out[start:stop] = np.abs(z).max(axis=1)
    return out


class Projection(str, Enum):
    WILCOXON_H1 = "wilcoxon_h1"
    WILCOXON_H2 = "wilcoxon_h2"
    GAUSS_H1 = "gauss_h1"
    GAUSS_H2 = "gauss_h2"


def kernel_projection(kind, cdf=None, mean=0.0):
    """Linear parts ``h1``, ``h2`` of the Hoeffding decomposition.

    The Wilcoxon kernel ``1{x < y}`` needs the marginal ``cdf``
    (continuous, so ``theta = 1/2``); the Gauss kernel ``y - x`` needs the
    marginal ``mean``. In both cases ``h2 = -h1``.
    """
    kind = Projection(kind)
    if kind in (Projection.WILCOXON_H1, Projection.WILCOXON_H2):
        if cdf is None:
            raise InputError("the Wilcoxon projections need a distribution function")
        sign = 1.0 if kind is Projection.WILCOXON_H1 else -1.0
        return lambda x: sign * (0.5 - np.asarray(cdf(x), dtype=float))
    sign = 1.0 if kind is Projection.GAUSS_H1 else -1.0
    return lambda x: sign * (mean - np.asarray(x, dtype=float))


def gaussian_copula_cov(r):
    """``Cov(Phi(Z1), Phi(Z2))`` for standard normals with correlation ``r``."""
    return math.asin(r / 2.0) / (2.0 * math.pi)


def wilcoxon_sigma1_true(rho):
    """Long-run variance ``sigma_1**2`` of ``F(X_t)`` for Gaussian AR(1) data.

    Sums the lag covariances ``asin(rho**j / 2) / (2 pi)`` until they drop
    below ``1e-12``. Note this returns the variance, not its square root.
    """
    if not -1.0 < rho < 1.0:
        raise InputError(f"|rho| must be < 1, got {rho}")
    total = 1.0 / 12.0
    r = rho
    while abs(r) > 0.0:
        term = gaussian_copula_cov(r)
        total += 2.0 * term
        if abs(term) < _SERIES_TOL:
            break
        r *= rho
    return total


def cusum_sigma2_true(rho, innovation_variance=1.0):
    """Long-run variance ``sigma_2**2`` of an AR(1) process."""
    if not -1.0 < rho < 1.0:
        raise InputError(f"|rho| must be < 1, got {rho}")
    return innovation_variance / (1.0 - rho) ** 2
