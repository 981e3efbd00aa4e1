"""Build shim for the optional accelerated kernels.

The package is fully functional without the extension; a pure numpy
fallback is selected at import time when the build is unavailable.
"""

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "costore.kernels._accel",
                ["src/costore/kernels/_accel.pyx"],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
