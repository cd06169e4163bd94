"""Robust change-point tests for dependent time series.

Wilcoxon-type (T1) and CUSUM (T2) max statistics of two-sample U-statistic
processes, studentized by subsampling estimates of the long-run scale and
compared against the Kolmogorov-Smirnov law.
"""

from ._kernels import BACKEND
from .core_stats import (
    Kind,
    MaxStatistic,
    ProcessTrace,
    as_series,
    brute_force_process,
    cusum_process,
    max_statistic,
    wilcoxon_process,
)
from .errors import CPDetectError, DegenerateVarianceError, InputError
from .experiments import (
    ExperimentConfig,
    TestResult,
    run_power_experiment,
    run_single_test,
    run_size_experiment,
)
from .limit_dist import (
    CovarianceSpec,
    ks_cdf,
    ks_quantile,
    simulate_limit_process,
    sup_abs,
    z_covariance,
)
from .simulate import ChangePointModel, InnovationModel, gen_ar1
from .variance import (
    BlockLengthRule,
    Overlap,
    carlstein_block_length,
    edf_transform,
    lag1_autocorrelation,
    sigma1_subsampling,
    sigma2_subsampling,
)

__version__ = "0.1.0"
