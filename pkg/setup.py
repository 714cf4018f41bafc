"""Build the optional Cython convolution core.

The extension is marked optional: if Cython or a C compiler is unavailable the
package installs without it and falls back to the numpy kernels at import.
"""
import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ecgdenoise._kernels",
                ["src/ecgdenoise/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
