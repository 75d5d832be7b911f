"""Build hook: optionally compile the relate kernel to a C extension.

The kernel module src/geolink/kernel/relate_impl.py is written in
Cython pure-Python mode: the same file runs under the plain interpreter
and compiles to a native module when Cython plus a C toolchain are
available.  The compiled .so shadows the .py at import time; without it
the package falls back to the interpreted kernel transparently.
"""

from setuptools import setup, Extension

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "geolink.kernel.relate_impl",
        ["src/geolink/kernel/relate_impl.py"],
        extra_compile_args=["-O2"],
        optional=True,
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
