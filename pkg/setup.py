import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "freudcaps._ksandwich",
                ["src/freudcaps/_ksandwich.pyx"],
                extra_compile_args=["-O3", "-frounding-math"],
                language="c",
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
)
