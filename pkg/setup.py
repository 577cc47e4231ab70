"""Build script for the compiled simplex kernel.

The package installs fine without a C toolchain: the extension is optional and
the solver falls back to the numpy implementation at import time.
"""

import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "tap.solve._core",
                ["src/tap/solve/_core.pyx"],
                include_dirs=[np.get_include()],
                # contraction off: the numpy twin rounds multiply and
                # subtract separately, and the two must agree bitwise
                extra_compile_args=["-O3", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    ext_modules = []

setup(ext_modules=ext_modules)
