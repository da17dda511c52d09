"""Build script for the compiled episode kernel.

The extension is optional: if compilation fails (no compiler, no Cython),
the package installs anyway and ``arusim.kernels`` falls back to the pure
Python implementation at import time.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if possible, warn and continue otherwise."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"could not build the compiled episode kernel ({exc}); "
            "arusim will use the pure-Python fallback"
        )


def extensions():
    if os.environ.get("ARUSIM_NO_EXT"):
        return []
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "arusim._grid_kernel",
        ["src/arusim/_grid_kernel.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
