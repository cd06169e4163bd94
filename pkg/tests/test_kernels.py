import os
import subprocess
import sys

import numpy as np
import pytest

from cpdetect import _kernels, _pykernels
from cpdetect.core_stats import dense_ranks

ckernels = pytest.importorskip("cpdetect._ckernels")


def brute_counts(r):
    n = len(r)
    return np.array(
        [sum(r[i] < r[j] for i in range(k) for j in range(k, n)) for k in range(1, n)],
        dtype=np.int64,
    )


@pytest.mark.parametrize("n", [1, 2, 3, 10, 57])
def test_backends_agree(rng, n):
    for levels in (3, 1000):
        x = rng.integers(0, levels, size=n).astype(float)
        ranks, m = dense_ranks(x)
        c = ckernels.wilcoxon_counts(ranks, m)
        p = _pykernels.wilcoxon_counts(ranks, m)
        assert c.dtype == p.dtype == np.int64
        np.testing.assert_array_equal(c, p)
        np.testing.assert_array_equal(c, brute_counts(ranks))


def test_counts_exact_for_large_n(rng):
    n = 50_000
    x = rng.standard_normal(n)
    ranks, m = dense_ranks(x)
    c = ckernels.wilcoxon_counts(ranks, m)
    assert c.shape == (n - 1,)
    # every pair crossing the middle split, counted directly
    k = n // 2
    left = np.sort(x[:k])
    expected = int(np.searchsorted(left, x[k:], side="left").sum())
    assert c[k - 1] == expected


def test_fenwick_prefix():
    fw = _pykernels.FenwickTree(8)
    for pos in (0, 3, 3, 7):
        fw.add(pos)
    assert [fw.prefix(e) for e in range(9)] == [0, 1, 1, 1, 3, 3, 3, 3, 4]


def test_compiled_backend_selected_by_default():
    assert _kernels.BACKEND == "cython"


def test_pure_python_forced_by_env():
    env = dict(os.environ, CPDETECT_PURE_PYTHON="1")
    out = subprocess.run(
        [sys.executable, "-c", "import cpdetect; print(cpdetect.BACKEND)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.strip() == "python"
