"""Build script for the compiled evaluation core.

The extension is optional at runtime: spherebot falls back to the pure
NumPy implementation when the import of spherebot._core fails.  The build
itself is not optional here because Cython and a C compiler are part of
the supported toolchain; keeping it strict surfaces build breakage early
instead of silently shipping the slow path.
"""

from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        "spherebot._core",
        ["src/spherebot/_core.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "infer_types": True,
        },
    )
)
