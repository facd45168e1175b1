"""Build the optional Cython Sinkhorn kernel.

The package works without it; ``entropic_gaussians._kernels`` falls back
to a NumPy implementation when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ENTROPIC_GAUSSIANS_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "entropic_gaussians._sinkhorn_ext",
                    ["src/entropic_gaussians/_sinkhorn_ext.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
