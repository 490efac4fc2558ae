"""Build the optional compiled search kernel.

The package works without it: if Cython or a C compiler is missing, the
build falls back to the pure-Python kernel with a warning.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any build failure means "no extension"
            print(f"warning: compiled kernel not built ({exc}); using the pure-Python kernel", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"warning: could not build {ext.name} ({exc})", file=sys.stderr)


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("warning: Cython not available; using the pure-Python kernel", file=sys.stderr)
        return []
    ext = Extension(
        "composedc.optimizer._bnb_ext",
        ["src/composedc/optimizer/_bnb_ext.pyx"],
        # No fast-math or FMA contraction: results must match the Python kernel bit for bit.
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
