import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("MESHBOOL_PURE") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "meshbool._native",
                    ["src/meshbool/_native.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            language_level="3",
        )
    except Exception as exc:  # pragma: no cover - build-env dependent
        print(f"warning: compiled kernel skipped ({exc}); pure-python backend will be used")
        ext_modules = []

setup(ext_modules=ext_modules)
