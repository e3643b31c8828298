"""Build script: compiles the native kernels, falling back to pure Python.

Set SKNET_NO_NATIVE=1 to skip the extension entirely (the package then
runs on the numpy fallback selected at import time).
"""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("SKNET_NO_NATIVE", "0") != "1":
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools.extension import Extension

        compile_args = ["-O3"]
        link_args = []
        if sys.platform != "win32":
            compile_args.append("-fopenmp")
            link_args.append("-fopenmp")

        ext_modules = cythonize(
            [
                Extension(
                    "sknet._kernels._native",
                    ["src/sknet/_kernels/_native.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=compile_args,
                    extra_link_args=link_args,
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
