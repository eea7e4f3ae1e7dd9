"""Builds the optional compiled stepping kernel; the package works without it."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("HARVEST_DDE_NO_EXT", "") not in ("1", "true", "yes"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "harvest_dde._march",
                    ["src/harvest_dde/_march.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
