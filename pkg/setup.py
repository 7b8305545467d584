"""Build script for the optional compiled convolution kernels.

The package works without the extension (a numpy/scipy fallback is selected
at import time), so a missing Cython toolchain only costs speed.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "torusns._kernels._direct",
                ["src/torusns/_kernels/_direct.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
