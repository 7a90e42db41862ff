"""Build hook for the optional compiled integrator kernel."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("LAPLACE_TODA_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("laplace_toda._kernels", ["src/laplace_toda/_kernels.pyx"],
                       include_dirs=[np.get_include()], extra_compile_args=["-O3"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
