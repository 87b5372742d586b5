# Builds the optional compiled kernel. If the toolchain is unavailable the
# install still succeeds and the package falls back to the numpy kernels.
from setuptools import setup, Extension
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: compiled kernel skipped ({exc}); using numpy fallback")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: {ext.name} skipped ({exc}); using numpy fallback")


def extensions():
    try:
        from Cython.Build import cythonize
        import numpy as np
    except ImportError:  # pragma: no cover
        return []
    ext = Extension(
        "mctd._dp_core",
        sources=["src/mctd/_dp_core.pyx"],
        include_dirs=[np.get_include()],
    )
    return cythonize([ext], compiler_directives={"language_level": 3})


setup(ext_modules=extensions(), cmdclass={"build_ext": optional_build_ext})
