"""Build script for the optional compiled kernels.

The extension is optional: if Cython or a compiler is unavailable the
package falls back to the NumPy implementation at import time.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("biphoton._kernels", ["src/biphoton/_kernels.pyx"],
                   include_dirs=[numpy.get_include()],
                   extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:  # pragma: no cover
    pass

setup(ext_modules=ext_modules)
