from setuptools import setup

import numpy as np

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/strictperf/_fastkernels.pyx"],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # Pure-Python fallback is selected at import time; the extension is
    # an optimization, not a requirement.
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
