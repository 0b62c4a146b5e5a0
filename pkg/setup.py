"""Build the optional compiled transport kernel.

Cython is used when available; otherwise the shipped C file is compiled.
If compilation fails the package still installs and runs on the pure
Python kernel.
"""
import os
import sys

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

SOURCE = "src/nchodge/flat_transport/_transport_ext"

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing or failing
            print(f"warning: compiled transport kernel not built ({exc}); using the Python kernel", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: could not build {ext.name} ({exc}); using the Python kernel", file=sys.stderr)


def extensions():
    if cythonize is None and not os.path.exists(SOURCE + ".c"):
        return []
    ext = Extension(
        "nchodge.flat_transport._transport_ext",
        [SOURCE + (".pyx" if cythonize is not None else ".c")],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], language_level=3) if cythonize is not None else [ext]


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
