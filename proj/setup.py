"""CMake-driven build of the _aisllm extension for pip installs.

Use `pip install -e . --no-build-isolation`; the CMake project does the
actual compilation and the built module lands inside the aisllm package.
"""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name: str) -> None:
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext: CMakeExtension) -> None:
        source_dir = Path(__file__).parent.resolve()
        out_dir = Path(self.get_ext_fullpath(ext.name)).parent.resolve() / "aisllm"
        build_dir = Path(self.build_temp).resolve()
        build_dir.mkdir(parents=True, exist_ok=True)

        cmake_args = [
            f"-DCMAKE_BUILD_TYPE={os.environ.get('AISLLM_BUILD_TYPE', 'Release')}",
            f"-DPython3_EXECUTABLE={sys.executable}",
            "-DAISLLM_BUILD_PYTHON=ON",
        ]
        subprocess.run(["cmake", str(source_dir), *cmake_args], cwd=build_dir, check=True)
        subprocess.run(
            ["cmake", "--build", ".", "--target", "_aisllm", "-j"], cwd=build_dir, check=True
        )

        out_dir.mkdir(parents=True, exist_ok=True)
        built = list((build_dir / "python").glob("_aisllm*.so"))
        if not built:
            raise RuntimeError("cmake did not produce the _aisllm module")
        self.copy_file(str(built[0]), str(out_dir / built[0].name))


setup(
    packages=["aisllm"],
    package_dir={"aisllm": "python/aisllm"},
    ext_modules=[CMakeExtension("aisllm._aisllm")],
    cmdclass={"build_ext": CMakeBuild},
    zip_safe=False,
)
