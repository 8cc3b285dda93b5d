"""Build script for the optional compiled kernels.

The package is fully functional without the extension: parity_bpe._kernels
falls back to the pure-Python implementation at import time. Set
PARITY_BPE_NO_EXT=1 to skip the extension build entirely.
"""

import os

from setuptools import setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the accelerator if possible, otherwise install pure-Python."""

    def run(self):
        try:
            build_ext.run(self)
        except Exception as exc:
            self._warn(exc)

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"could not build the compiled kernels ({exc}); "
            "falling back to the pure-Python implementation"
        )


ext_modules = []
cmdclass = {}
if os.environ.get("PARITY_BPE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "parity_bpe._kernels._speedups",
                    ["src/parity_bpe/_kernels/_speedups.pyx"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
            },
        )
        cmdclass = {"build_ext": optional_build_ext}
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules, cmdclass=cmdclass)
