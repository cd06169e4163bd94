"""Studentized change-point tests and the Monte Carlo size/power harness.

Every replicate draws from its own generator, derived from the master seed,
a hash of the cell labels (rho, innovation, statistic, variant) and the
replicate index. Cells therefore do not share draws, results do not depend
on execution order, and the shift height is deliberately left out of the
key so power curves use common random numbers across ``mu``.
"""

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from itertools import product
from pathlib import Path

import numpy as np

from .core_stats import Kind, as_series, max_statistic, process
from .errors import CPDetectError, DegenerateVarianceError, InputError
from .limit_dist import ks_quantile, ks_sf
from .simulate import ChangePointModel, InnovationModel, derive_rng, gen_ar1, stream_key
from .variance import (
    BlockLengthRule,
    Overlap,
    edf_transform,
    sigma1_subsampling,
    sigma2_subsampling,
)

STATISTICS = {"T1": Kind.WILCOXON, "T2": Kind.CUSUM}
VARIANTS = ("unadjusted", "fixed-ol", "fixed-nol", "adaptive-ol", "adaptive-nol")


def parse_statistic(name):
    s = str(name).strip()
    if s.upper() in STATISTICS:
        return STATISTICS[s.upper()]
    try:
        return Kind(s.lower())
    except ValueError:
        raise InputError(f"unknown statistic {name!r}; use T1/wilcoxon or T2/cusum") from None


@dataclass(frozen=True)
class TestResult:
    statistic: float
    sigma_hat: float
    normalized: float
    p_value: float
    critical_value: float
    reject: bool
    change_point_estimate: int
    block_length_used: int | None = None
    rho_hat: float | None = None

    __test__ = False  # not a pytest class

    @property
    def decision(self):
        return "reject" if self.reject else "retain"


def unadjusted_scale(x, kind, method="block1"):
    """Scale that ignores serial correlation.

    T2 uses the sample standard deviation. For T1 the default ``"block1"``
    is the subsampling estimator with unit blocks, ``sqrt(pi/2)`` times the
    mean absolute deviation of ``F_n(X)`` (about ``0.313`` for tie-free
    data); ``"moment"`` gives the standard deviation of ``F_n(X)`` instead
    (about ``sqrt(1/12)``).
    """
    if kind is Kind.CUSUM:
        return float(np.std(x, ddof=1))
    if method == "block1":
        return sigma1_subsampling(x, BlockLengthRule.fixed(1)).sigma_hat
    if method == "moment":
        return float(np.std(edf_transform(x)))
    raise InputError(f"unknown unadjusted scale method {method!r}")


def estimate_scale(x, kind, rule=None, overlap=Overlap.NON_OVERLAPPING):
    """``(sigma_hat, block_length, rho_hat)``; ``rule=None`` means unadjusted."""
    if rule is None:
        return unadjusted_scale(x, kind), None, None
    estimator = sigma1_subsampling if kind is Kind.WILCOXON else sigma2_subsampling
    est = estimator(x, rule, overlap)
    return est.sigma_hat, est.block_length_used, est.rho_hat


def run_single_test(series, statistic, rule=None, overlap=Overlap.NON_OVERLAPPING, alpha=0.05):
    """Max-type test studentized by the chosen scale estimate.

    ``statistic`` is ``"T1"``/``"wilcoxon"`` or ``"T2"``/``"cusum"``.
    ``rule`` is a :class:`BlockLengthRule` for subsampling, or None for the
    independence scale. Raises :class:`DegenerateVarianceError` when the
    scale estimate is zero.
    """
    if not 0.0 < alpha < 1.0:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    x = as_series(series)
    kind = parse_statistic(statistic)
    stat = max_statistic(process(x, kind))
    sigma, length, rho = estimate_scale(x, kind, rule, overlap)
    if not sigma > 0.0:
        raise DegenerateVarianceError("degenerate variance: scale estimate is zero")
    normalized = stat.value / sigma
    crit = ks_quantile(1.0 - alpha)
    return TestResult(
        statistic=stat.value,
        sigma_hat=sigma,
        normalized=normalized,
        p_value=ks_sf(normalized),
        critical_value=crit,
        reject=normalized > crit,
        change_point_estimate=stat.argmax_k,
        block_length_used=length,
        rho_hat=rho,
    )


def variant_settings(variant, fixed_l):
    """Map a variant name such as ``"adaptive-nol"`` to ``(rule, overlap)``."""
    if variant == "unadjusted":
        return None, Overlap.NON_OVERLAPPING
    if variant not in VARIANTS:
        raise InputError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    mode, ov = variant.split("-")
    rule = BlockLengthRule.adaptive() if mode == "adaptive" else BlockLengthRule.fixed(fixed_l)
    return rule, Overlap(ov)


def _default_mu_grid():
    return [0.25 * i for i in range(9)]


@dataclass
class ExperimentConfig:
    n: int = 200
    rhos: list = field(default_factory=lambda: [0.0, 0.4, 0.8])
    innovations: list = field(default_factory=lambda: ["gauss", "t3"])
    statistics: list = field(default_factory=lambda: ["T1", "T2"])
    variants: list = field(default_factory=lambda: list(VARIANTS))
    fixed_l: int = 9
    alpha: float = 0.05
    replicates: int = 4000
    mu_grid: list = field(default_factory=_default_mu_grid)
    tau: int | None = None
    master_seed: int = 20130101

    def __post_init__(self):
        self.validate()

    @classmethod
    def from_dict(cls, data):
        """Build from a JSON-style mapping, reporting every bad field at once."""
        if not isinstance(data, dict):
            raise ConfigError(["config: expected a JSON object"])
        known = {f.name for f in fields(cls)}
        errors = [f"{k}: unknown field" for k in data if k not in known]
        if errors:
            raise ConfigError(errors)
        return cls(**data)

    def validate(self):
        errors = []

        def is_int(v):
            return isinstance(v, (int, np.integer)) and not isinstance(v, bool)

        def is_num(v):
            return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)

        if not is_int(self.n) or self.n < 10:
            errors.append(f"n: must be an integer >= 10, got {self.n!r}")
        if not isinstance(self.rhos, (list, tuple)) or not self.rhos:
            errors.append("rhos: must be a non-empty list")
        elif not all(is_num(r) and -1 < r < 1 for r in self.rhos):
            errors.append(f"rhos: every entry must satisfy -1 < rho < 1, got {self.rhos!r}")
        if not isinstance(self.innovations, (list, tuple)) or not self.innovations:
            errors.append("innovations: must be a non-empty list")
        else:
            for v in self.innovations:
                try:
                    InnovationModel.parse(v)
                except InputError as exc:
                    errors.append(f"innovations: {exc}")
        if not isinstance(self.statistics, (list, tuple)) or not self.statistics:
            errors.append("statistics: must be a non-empty list")
        else:
            for s in self.statistics:
                if str(s).upper() not in STATISTICS:
                    errors.append(f"statistics: unknown statistic {s!r}; use T1 or T2")
        if not isinstance(self.variants, (list, tuple)) or not self.variants:
            errors.append("variants: must be a non-empty list")
        else:
            for v in self.variants:
                if v not in VARIANTS:
                    errors.append(f"variants: unknown variant {v!r}")
        if not is_int(self.fixed_l) or self.fixed_l < 1:
            errors.append(f"fixed_l: must be a positive integer, got {self.fixed_l!r}")
        elif is_int(self.n) and self.fixed_l > self.n / 2:
            errors.append(f"fixed_l: must not exceed n/2, got {self.fixed_l!r}")
        if not is_num(self.alpha) or not 0 < self.alpha < 1:
            errors.append(f"alpha: must lie in (0, 1), got {self.alpha!r}")
        if not is_int(self.replicates) or self.replicates < 1:
            errors.append(f"replicates: must be an integer >= 1, got {self.replicates!r}")
        if not isinstance(self.mu_grid, (list, tuple)) or not self.mu_grid:
            errors.append("mu_grid: must be a non-empty list")
        elif not all(is_num(m) and math.isfinite(m) for m in self.mu_grid):
            errors.append("mu_grid: entries must be finite numbers")
        elif list(self.mu_grid) != sorted(self.mu_grid):
            errors.append("mu_grid: must be sorted ascending")
        if self.tau is not None and (not is_int(self.tau) or not (is_int(self.n) and 0 <= self.tau <= self.n)):
            errors.append(f"tau: must be an integer in [0, n], got {self.tau!r}")
        if not is_int(self.master_seed) or self.master_seed < 0:
            errors.append(f"master_seed: must be a non-negative integer, got {self.master_seed!r}")
        if errors:
            raise ConfigError(errors)

    def to_dict(self):
        d = asdict(self)
        d["rhos"] = [float(r) for r in self.rhos]
        d["mu_grid"] = [float(m) for m in self.mu_grid]
        return d

    @property
    def change_index(self):
        return self.n // 2 if self.tau is None else self.tau


class ConfigError(InputError):
    """Configuration rejected; ``errors`` lists one message per bad field."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("invalid experiment config:\n  " + "\n  ".join(self.errors))


@dataclass(frozen=True)
class CellResult:
    rho: float
    innovation: str
    statistic: str
    variant: str
    mu: float | None
    value: float
    se: float
    rejections: int
    replicates: int
    failures: int
    mean_sigma_hat: float | None
    mean_block_length: float | None


CSV_COLUMNS = [f.name for f in fields(CellResult)]


@dataclass
class ResultTable:
    """Rejection fractions per cell. ``kind`` is ``"size"`` or ``"power"``."""

    kind: str
    config: dict
    cells: list

    def lookup(self, rho, innovation, statistic, variant, mu=None):
        for c in self.cells:
            if (
                c.rho == rho
                and c.innovation == str(innovation)
                and c.statistic == statistic
                and c.variant == variant
                and (mu is None or c.mu == mu)
            ):
                return c
        raise KeyError((rho, innovation, statistic, variant, mu))

    def curve(self, rho, innovation, statistic, variant):
        """Cells of one power curve, ordered by ``mu``."""
        out = [
            c
            for c in self.cells
            if c.rho == rho and c.innovation == str(innovation)
            and c.statistic == statistic and c.variant == variant
        ]
        return sorted(out, key=lambda c: c.mu)


def binomial_se(p, r):
    return math.sqrt(p * (1.0 - p) / r) if r > 0 else float("nan")


def _cell_task(args):
    config, rho, innovation, statistic, variant, mus = args
    innov = InnovationModel.parse(innovation)
    rule, overlap = variant_settings(variant, config.fixed_l)
    n, tau = config.n, config.change_index
    key = stream_key(float(rho), str(innov), statistic.upper(), variant)
    base = ChangePointModel(n, float(rho), innov, 0.0, tau)
    rejections = np.zeros(len(mus), dtype=np.int64)
    failures = np.zeros(len(mus), dtype=np.int64)
    sigma_sum = np.zeros(len(mus))
    length_sum = np.zeros(len(mus))
    for r in range(config.replicates):
        xi = gen_ar1(base, derive_rng(config.master_seed, key, r))
        for m, mu in enumerate(mus):
            if mu == 0.0:
                x = xi
            else:
                x = xi.copy()
                x[tau:] += mu
            try:
                res = run_single_test(x, statistic, rule, overlap, config.alpha)
            except CPDetectError:
                failures[m] += 1
                continue
            rejections[m] += res.reject
            sigma_sum[m] += res.sigma_hat
            if res.block_length_used is not None:
                length_sum[m] += res.block_length_used
    out = []
    for m, mu in enumerate(mus):
        done = config.replicates - int(failures[m])
        p = rejections[m] / done if done else float("nan")
        out.append(
            CellResult(
                rho=float(rho),
                innovation=str(innov),
                statistic=statistic.upper(),
                variant=variant,
                mu=None if mu is None else float(mu),
                value=float(p),
                se=binomial_se(p, done),
                rejections=int(rejections[m]),
                replicates=done,
                failures=int(failures[m]),
                mean_sigma_hat=float(sigma_sum[m] / done) if done else None,
                mean_block_length=(float(length_sum[m] / done) if done and rule is not None else None),
            )
        )
    return out


def worker_count(workers=None):
    """Explicit count, else ``CPDETECT_THREADS`` (0 = all cores), else 1."""
    if workers is None:
        env = os.environ.get("CPDETECT_THREADS")
        if env is None or env.strip() == "":
            return 1
        try:
            workers = int(env)
        except ValueError:
            raise InputError(f"CPDETECT_THREADS must be an integer, got {env!r}") from None
    if workers < 0:
        raise InputError(f"worker count must be >= 0, got {workers}")
    return workers or (os.cpu_count() or 1)


def _run(config, mus, workers):
    tasks = [
        (config, rho, innov, stat, variant, mus)
        for rho, innov, stat, variant in product(
            config.rhos, config.innovations, config.statistics, config.variants
        )
    ]
    workers = min(worker_count(workers), len(tasks))
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_cell_task, tasks))
    else:
        chunks = [_cell_task(t) for t in tasks]
    return [cell for chunk in chunks for cell in chunk]


def run_size_experiment(config, workers=None):
    """Rejection rates under the null hypothesis for every cell."""
    cells = _run(config, [0.0], workers)
    cells = [CellResult(**{**asdict(c), "mu": None}) for c in cells]
    return ResultTable("size", config.to_dict(), cells)


def run_power_experiment(config, workers=None):
    """Rejection rates for each shift height in ``config.mu_grid``."""
    cells = _run(config, [float(m) for m in config.mu_grid], workers)
    return ResultTable("power", config.to_dict(), cells)


def _row(cell, kind):
    d = asdict(cell)
    if kind == "size":
        d.pop("mu")
    return d


def columns(kind):
    return [c for c in CSV_COLUMNS if not (kind == "size" and c == "mu")]


def to_json(table):
    """Nested ``rho -> innovation -> statistic -> variant [-> mu]`` document."""
    nested = {}
    for c in table.cells:
        node = nested.setdefault(repr(c.rho), {}).setdefault(c.innovation, {})
        node = node.setdefault(c.statistic, {})
        if table.kind == "power":
            node = node.setdefault(c.variant, {})
            leaf_key = repr(c.mu)
        else:
            leaf_key = c.variant
        leaf = _row(c, table.kind)
        for k in ("rho", "innovation", "statistic", "variant", "mu"):
            leaf.pop(k, None)
        node[leaf_key] = leaf
    return {
        "kind": table.kind,
        "master_seed": table.config.get("master_seed"),
        "config": table.config,
        "cells": nested,
    }


def from_json(doc):
    kind = doc["kind"]
    cells = []
    for rho, by_innov in doc["cells"].items():
        for innov, by_stat in by_innov.items():
            for stat, by_variant in by_stat.items():
                for variant, node in by_variant.items():
                    leaves = node.items() if kind == "power" else [(None, node)]
                    for mu, leaf in leaves:
                        cells.append(
                            CellResult(
                                rho=float(rho),
                                innovation=innov,
                                statistic=stat,
                                variant=variant,
                                mu=None if mu is None else float(mu),
                                **leaf,
                            )
                        )
    return ResultTable(kind, doc["config"], cells)


def emit_results(table, path, fmt=None):
    """Write ``table`` as CSV (one row per cell) or nested JSON."""
    path = Path(path)
    fmt = fmt or path.suffix.lstrip(".").lower()
    try:
        if fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=columns(table.kind))
                writer.writeheader()
                for c in table.cells:
                    writer.writerow(_row(c, table.kind))
        elif fmt == "json":
            with open(path, "w") as fh:
                json.dump(to_json(table), fh, indent=2)
                fh.write("\n")
        else:
            raise InputError(f"unknown output format {fmt!r}; use csv or json")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc.strerror or exc}") from exc
    return path


def load_results(path):
    with open(path) as fh:
        return from_json(json.load(fh))


def write_tables(table, out_dir):
    """Write ``size_table.*`` or ``power_curves.*`` into ``out_dir``."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    stem = "size_table" if table.kind == "size" else "power_curves"
    return [
        emit_results(table, out_dir / f"{stem}.csv", "csv"),
        emit_results(table, out_dir / f"{stem}.json", "json"),
    ]
