import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

if cythonize is not None:
    ext_modules = cythonize(
        [
            Extension(
                "ferrogamma._kernels_cy",
                ["src/ferrogamma/_kernels_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3", "-march=native", "-ffast-math",
                                    "-fopenmp"],
                extra_link_args=["-fopenmp", "-lmvec", "-lm"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
else:
    # Pure-python fallback is selected at import; the package works without
    # the compiled core, just slower.
    ext_modules = []

setup(ext_modules=ext_modules)
