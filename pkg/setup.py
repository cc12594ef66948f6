from Cython.Build import cythonize
from setuptools import Extension, setup

setup(
    ext_modules=cythonize(
        [Extension("trevl._speedups", ["src/trevl/_speedups.pyx"])],
        language_level=3,
    )
)
