import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

extensions = [
    Extension(
        "cherenkov_causality._rk4",
        ["src/cherenkov_causality/_rk4.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-fcx-limited-range"],  # inline complex multiply (no __muldc3 calls)
    )
]

setup(ext_modules=cythonize(extensions, compiler_directives={"language_level": "3"}))
