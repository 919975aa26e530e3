"""Build script for the optional compiled kernels.

The package works without the extension (a pure-Python lane is selected at
import time), so the build must not fail when Cython or a C compiler is
missing. -ffp-contract=off keeps the compiled lane's float arithmetic
bit-identical to the numpy-based pure lane: fused multiply-add would round
differently.
"""

import sys

from setuptools import Extension, setup

extensions = []
try:
    from Cython.Build import cythonize

    compile_args = [] if sys.platform == "win32" else ["-O3", "-ffp-contract=off"]
    extensions = cythonize(
        [
            Extension(
                "mgdetect._kernels._ckernels",
                ["src/mgdetect/_kernels/_ckernels.pyx"],
                extra_compile_args=compile_args,
                optional=True,
            )
        ],
        language_level=3,
    )
except ImportError:
    print("Cython not available; building without compiled kernels", file=sys.stderr)

setup(ext_modules=extensions)
