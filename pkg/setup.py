"""Build script: compiles the optional Cython kernel extension.

The package works without the extension (NumPy fallbacks are selected at
import time), so a missing compiler or Cython only costs speed.

Force a pure-Python install with SPARSERADAR_NO_EXT=1.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("SPARSERADAR_NO_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "sparseradar._ckernels",
                    ["src/sparseradar/_ckernels.pyx"],
                    include_dirs=[numpy.get_include()],
                    extra_compile_args=["-O3"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level="3",
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
