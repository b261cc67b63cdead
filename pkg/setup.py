"""Build script for the optional compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing compiler or Cython must not abort installation.
"""

import sys

from setuptools import setup

ext_modules = []
if "--no-ext" not in sys.argv:
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "kernpot._kernel_ext",
                    sources=["src/kernpot/_kernel_ext.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            language_level=3,
        )
    except ImportError as exc:
        sys.stderr.write(f"kernpot: building without compiled kernels ({exc})\n")
else:
    sys.argv.remove("--no-ext")

setup(ext_modules=ext_modules)
