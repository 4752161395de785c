"""Build script: compiles the optional accelerated kernels.

The package works without the extension (a numpy fallback is selected at
import time), so any failure here downgrades to a pure-Python install
instead of aborting.
"""

from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    extensions = cythonize(
        [
            Extension(
                "ctrlgrad.kernels._fast",
                ["src/ctrlgrad/kernels/_fast.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # Contraction (FMA) would change rounding and break the
                # bitwise agreement between the compiled and pure backends.
                extra_compile_args=["-O3", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"ctrlgrad: skipping compiled kernels ({exc}); pure-Python fallback will be used")
    extensions = []

setup(ext_modules=extensions)
