from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

# The compiled kernels are optional: adcg.kernels falls back to the numpy
# implementation when the extension is missing.
extensions = []
if cythonize is not None:
    extensions = cythonize(
        [Extension("adcg._ltikern", ["src/adcg/_ltikern.pyx"])],
        language_level="3",
    )

setup(ext_modules=extensions)
