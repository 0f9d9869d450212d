"""Build script for the compiled simulation kernel.

The Cython extension is optional: if a C compiler is unavailable the install
still succeeds and the package falls back to the pure-Python kernel at
import time (see qtazrp.sim._select).
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            print(f"WARNING: compiled kernel not built ({exc}); "
                  "falling back to the pure-Python kernel")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"WARNING: failed to compile {ext.name} ({exc}); "
                  "falling back to the pure-Python kernel")


def extensions():
    from Cython.Build import cythonize

    ext = Extension(
        "qtazrp.sim._kernel",
        ["src/qtazrp/sim/_kernel.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level="3")


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
