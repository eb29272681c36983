import os
from glob import glob

from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

include_dirs = ["include", "vendor"]
if os.path.isdir("/opt/vendor"):
    include_dirs.append("/opt/vendor")

setup(
    ext_modules=[
        Pybind11Extension(
            "verirag._core",
            sorted(glob("src/*.cpp")) + ["bindings/py_module.cpp"],
            include_dirs=include_dirs,
            cxx_std=20,
        )
    ],
    cmdclass={"build_ext": build_ext},
)
