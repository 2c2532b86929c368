"""Solver backend selection: compiled extension if built, numpy otherwise.

Set GSREMOTION_PURE_PYTHON=1 to force the fallback even when the extension
is available (used by the parity tests and the benchmark).
"""

import os

from . import _smo_py

try:
    from . import _smo_cy
except ImportError:  # extension not built on this platform
    _smo_cy = None

_FORCE_PURE = os.environ.get("GSREMOTION_PURE_PYTHON", "") == "1"


def available_backends() -> tuple:
    """Names of importable solver backends."""
    return ("python",) if _smo_cy is None else ("compiled", "python")


def active_backend() -> str:
    """Backend train_binary will use by default."""
    if _smo_cy is None or _FORCE_PURE:
        return "python"
    return "compiled"


def get_solver(backend: str | None = None):
    """Return the smo_solve callable for a backend name (default: active)."""
    name = backend or active_backend()
    if name == "python":
        return _smo_py.smo_solve
    if name == "compiled":
        if _smo_cy is None:
            raise ValueError("compiled backend requested but the extension is not built")
        return _smo_cy.smo_solve
    raise ValueError(f"unknown backend {name!r} (expected 'compiled' or 'python')")
