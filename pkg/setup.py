"""Build hooks: compile the optional shading kernel extension.

The package works without the extension (a pure-Python kernel is used
instead), so a missing compiler toolchain downgrades to a plain install.
"""
import sys

from setuptools import Extension, setup


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("Cython unavailable; installing with pure-Python kernel", file=sys.stderr)
        return []
    ext = Extension(
        "linelod.raster._kernel",
        sources=["src/linelod/raster/_kernel.pyx"],
    )
    try:
        return cythonize([ext], compiler_directives={"language_level": "3"})
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"skipping compiled kernel: {exc}", file=sys.stderr)
        return []


setup(ext_modules=extensions())
