from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # the package falls back to NumPy kernels at import time
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("aerokin._core", ["src/aerokin/_core.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
