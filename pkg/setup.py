"""Builds the optional compiled kernel extension.

The package works without it: gridloop.kernels falls back to the pure-Python
implementation when the extension is missing or fails to import.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gridloop.kernels._core",
                ["src/gridloop/kernels/_core.pyx"],
                extra_compile_args=["-O2"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
