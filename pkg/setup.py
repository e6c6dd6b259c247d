import numpy as np
from Cython.Build import cythonize
from setuptools import Extension, setup

# -O3 but no -ffast-math: kernel arithmetic must stay strictly IEEE so that
# cross-scheme comparisons within one build are reproducible.
extensions = [
    Extension(
        "wenods._kernels._fast",
        ["src/wenods/_kernels/_fast.pyx"],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3", "-fopenmp"],
        extra_link_args=["-fopenmp"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
