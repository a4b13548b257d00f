import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# -ffp-contract=off: the pure-Python fallback must produce bit-identical
# results, so fused multiply-add contraction has to stay disabled.
ext = Extension(
    "cecluster._kernel",
    ["src/cecluster/_kernel.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O2", "-ffp-contract=off"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3) if cythonize else [])
