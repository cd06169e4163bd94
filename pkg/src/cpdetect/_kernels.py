"""Backend selection for the hot loops.

The compiled extension is used when it was built; otherwise the pure-Python
implementation is imported. ``CPDETECT_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _pykernels

BACKEND = "python"
wilcoxon_counts = _pykernels.wilcoxon_counts

if not os.environ.get("CPDETECT_PURE_PYTHON"):
    try:
        from . import _ckernels
    except ImportError:  # extension not built
        _ckernels = None
    else:
        BACKEND = "cython"
        wilcoxon_counts = _ckernels.wilcoxon_counts
else:
    _ckernels = None

__all__ = ["BACKEND", "wilcoxon_counts"]
