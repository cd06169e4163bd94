import os

from setuptools import setup, Extension

# Set CPDETECT_NO_EXT=1 to install the pure-Python fallback only.
ext_modules = []
if not os.environ.get("CPDETECT_NO_EXT"):
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "cpdetect._ckernels",
                    [os.path.join("src", "cpdetect", "_ckernels.pyx")],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level="3",
        )

setup(ext_modules=ext_modules)
