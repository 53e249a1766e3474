import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

ext = Extension(
    "aclab.nn._convkernels",
    ["src/aclab/nn/_convkernels.pyx"],
    include_dirs=[np.get_include()],
)

setup(ext_modules=cythonize([ext], language_level="3"))
