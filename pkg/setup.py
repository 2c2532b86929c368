"""Build script: compiles the optional SMO extension, falling back to pure python.

The package works without the extension (gsremotion._core picks the numpy
implementation at import time), so any compile failure downgrades to a
warning instead of aborting the install.
"""

import sys

from setuptools import setup

try:
    import numpy
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    # -ffp-contract=off keeps the compiled kernel from fusing multiply-adds,
    # so its float ops match the numpy backend bit for bit.
    ext_modules = cythonize(
        [
            Extension(
                "gsremotion._core._smo_cy",
                ["src/gsremotion/_core/_smo_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O2", "-ffp-contract=off"],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - exercised only on broken toolchains
    print(f"warning: building without compiled SMO core ({exc})", file=sys.stderr)
    ext_modules = []

setup(ext_modules=ext_modules)
