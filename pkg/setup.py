"""Build script for the optional compiled kernel.

The package works without the extension: score_models falls back to the
numpy kernel when the import fails, so the build is best-effort and never
blocks installation.
"""

import warnings

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class BestEffortBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain, ...
            warnings.warn(f"compiled kernel skipped ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"compiled kernel skipped ({exc}); using numpy fallback")


def extensions():
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "noisecoder._kernels._gmm",
        ["src/noisecoder/_kernels/_gmm.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


setup(ext_modules=extensions(), cmdclass={"build_ext": BestEffortBuildExt})
