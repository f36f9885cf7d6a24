"""Build script for the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); building it just makes the density-matrix sweeps several
times faster.  If Cython or a C compiler is missing the extension is
skipped silently.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    kernels = Extension(
        "qlandscape._kernels",
        sources=["src/qlandscape/_kernels.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
    ext_modules = cythonize([kernels], language_level="3")

setup(ext_modules=ext_modules)
