import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("PICARDLAB_PURE_PYTHON"):
    try:
        from Cython.Build import cythonize
    except ImportError:  # fall back to the numpy kernels
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "picardlab._core._tracking",
                    ["src/picardlab/_core/_tracking.pyx"],
                    include_dirs=[np.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
