"""Build script: compiles the optional Cython kernel extension.

The extension is a pure speedup; if it cannot be built the package
falls back to the NumPy implementation at import time.
"""

import numpy
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Swallow extension build failures so the pure-Python install still works."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"WARNING: skipping compiled kernels ({exc}); "
                  "falling back to the NumPy backend")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"WARNING: could not compile {ext.name} ({exc}); "
                  "falling back to the NumPy backend")


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover
        return []
    ext = Extension(
        "fasst._kernels",
        ["src/fasst/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # keep bit-for-bit parity with the NumPy fallback: no FMA contraction,
        # and no cos+sin -> sincos merging (glibc sincos differs from cos by
        # an ulp for some arguments)
        extra_compile_args=["-O2", "-ffp-contract=off",
                            "-fno-builtin-sin", "-fno-builtin-cos"],
    )
    return cythonize([ext], language_level=3)


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
