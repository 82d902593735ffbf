"""Build script: compiles the optional Cython kernels.

The package works without them; ``fraisse.kernels`` falls back to
``fraisse._pykernels`` when the extension is missing.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("FRAISSE_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension(
                "fraisse._ckernels",
                ["src/fraisse/_ckernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )],
            language_level=3,
        )

setup(ext_modules=ext_modules)
