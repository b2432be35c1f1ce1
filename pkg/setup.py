"""Build script: compiles the optional hot-kernel extension.

Set CSSMODEM_NO_EXT=1 to skip compilation; the package then runs on the
pure-numpy kernel fallback selected at import time.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("CSSMODEM_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "cssmodem._kernels",
                    ["src/cssmodem/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    # no contraction: the convolution kernel promises the
                    # same rounding as the numpy fallback
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
