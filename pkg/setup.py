import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# The compiled kernel is optional: castsel.kernels falls back to a numpy
# implementation when the extension is missing or CASTSEL_PURE_PY=1.
extensions = [
    Extension(
        "castsel._kernels",
        ["src/castsel/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
]

setup(ext_modules=cythonize(extensions, language_level=3))
