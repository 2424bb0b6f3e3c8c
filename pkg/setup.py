"""Build shim for the compiled evolution kernel."""
from setuptools import Extension, setup
from Cython.Build import cythonize

ext = Extension(
    "kponet._kernel",
    sources=["src/kponet/_kernel.pyx", "src/kponet/kpo_kernel.c"],
    extra_compile_args=["-O3", "-march=native", "-ffast-math", "-funroll-loops"],
)

setup(ext_modules=cythonize([ext], language_level=3))
