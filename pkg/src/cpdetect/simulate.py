"""AR(1) data with an optional level shift, and seeded random streams."""

import hashlib
import math
from dataclasses import dataclass

import numpy as np
from scipy import signal, special

from .errors import InputError

BURN_IN = 1000
T_SCALE_PERCENTILE = 0.8413


def t_cdf(t, nu):
    """Student-t distribution function via the regularized incomplete beta."""
    tail = 0.5 * special.betainc(nu / 2.0, 0.5, nu / (nu + t * t))
    return 1.0 - tail if t >= 0 else tail


def t_quantile(p, nu, tol=1e-10):
    if not 0.0 < p < 1.0:
        raise InputError(f"probability must lie in (0, 1), got {p}")
    lo, hi = -1.0, 1.0
    while t_cdf(lo, nu) > p:
        lo *= 2.0
    while t_cdf(hi, nu) < p:
        hi *= 2.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if t_cdf(mid, nu) < p:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def t_scale_constant(nu):
    """Factor that moves the 84.13% quantile of ``t_nu`` to 1."""
    if not nu >= 1:
        raise InputError(f"degrees of freedom must be >= 1, got {nu}")
    return 1.0 / t_quantile(T_SCALE_PERCENTILE, nu)


@dataclass(frozen=True)
class InnovationModel:
    """Gaussian (``nu is None``) or scaled Student-t innovations."""

    nu: float | None = None

    def __post_init__(self):
        if self.nu is not None and not self.nu >= 1:
            raise InputError(f"degrees of freedom must be >= 1, got {self.nu}")

    @classmethod
    def parse(cls, text):
        """``"gauss"``/``"gaussian"``/``"normal"`` or ``"t<nu>"``, e.g. ``"t3"``."""
        s = str(text).strip().lower()
        if s in ("gauss", "gaussian", "normal"):
            return cls(None)
        if s.startswith("t"):
            try:
                nu = float(s[1:])
            except ValueError:
                pass
            else:
                return cls(int(nu) if nu.is_integer() else nu)
        raise InputError(f"unknown innovation model {text!r}; use 'gauss' or 't<nu>'")

    @property
    def is_gaussian(self):
        return self.nu is None

    @property
    def scale(self):
        return 1.0 if self.nu is None else _t_scale_cached(self.nu)

    def __str__(self):
        return "gauss" if self.nu is None else f"t{self.nu:g}"

    def sample(self, rng, size=None):
        if self.nu is None:
            return rng.standard_normal(size)
        return self.scale * rng.standard_t(self.nu, size)


_T_SCALES = {}


def _t_scale_cached(nu):
    if nu not in _T_SCALES:
        _T_SCALES[nu] = t_scale_constant(nu)
    return _T_SCALES[nu]


def innovation_sample(model, rng):
    """A single innovation draw."""
    return float(model.sample(rng))


@dataclass(frozen=True)
class ChangePointModel:
    """``X_i = xi_i`` for ``i <= tau`` and ``mu + xi_i`` after, xi AR(1)."""

    n: int
    rho: float = 0.0
    innovation: InnovationModel = InnovationModel()
    mu: float = 0.0
    tau: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"n must be positive, got {self.n}")
        if not -1.0 < self.rho < 1.0:
            raise InputError(f"|rho| must be < 1, got {self.rho}")
        if not math.isfinite(self.mu):
            raise InputError(f"shift must be finite, got {self.mu}")
        if self.tau is None:
            object.__setattr__(self, "tau", self.n // 2)
        if not 0 <= self.tau <= self.n:
            raise InputError(f"tau must lie in [0, n], got {self.tau}")


def gen_ar1(model, rng=None):
    """Simulate the change-point model.

    The AR recursion starts at ``xi = 0`` and discards ``BURN_IN`` steps.
    """
    rng = np.random.default_rng(rng)
    eps = model.innovation.sample(rng, BURN_IN + model.n)
    xi = signal.lfilter([1.0], [1.0, -model.rho], eps)[BURN_IN:]
    xi[model.tau:] += model.mu
    return xi


def stream_key(*parts):
    """Stable 64-bit integer for an arbitrary tuple of labels."""
    h = hashlib.blake2b(repr(parts).encode(), digest_size=8)
    return int.from_bytes(h.digest(), "little")


def derive_rng(master_seed, *key):
    """Independent generator for ``(master_seed, *key)``; key items are ints."""
    ss = np.random.SeedSequence(master_seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))
