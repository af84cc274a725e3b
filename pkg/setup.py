"""Build script for the optional compiled kernel extension.

The package works without the extension (a pure-Python fallback is selected
at import time); building it makes simulation batches roughly two orders of
magnitude faster.  `pip install -e . --no-build-isolation` compiles it when
Cython and a C compiler are available.
"""

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "windfleet._kernels.fast",
                ["src/windfleet/_kernels/fast.pyx"],
                include_dirs=[numpy.get_include()],
                # Keep the compiled kernels bit-identical to the pure-Python
                # fallback: no FMA contraction and no sin+cos fusion into
                # glibc sincos (which rounds differently by 1 ulp).
                extra_compile_args=[
                    "-O3",
                    "-ffp-contract=off",
                    "-fno-builtin-sin",
                    "-fno-builtin-cos",
                    "-fno-builtin-sincos",
                ],
            )
        ],
        language_level=3,
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
