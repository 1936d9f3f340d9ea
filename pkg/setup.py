import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup; the package falls back to
# pure Python when they are absent. TWEETVAULT_NO_EXT=1 skips the build.
ext_modules = []
if os.environ.get("TWEETVAULT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "tweetvault._kernels._speedups",
                    ["src/tweetvault/_kernels/_speedups.pyx"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
