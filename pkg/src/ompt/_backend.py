"""Solver-kernel backend selection.

The compiled extension (``ompt._core``, Cython) is preferred when it
imported successfully; otherwise the pure-Python kernels are used.  The
choice can be forced with the ``OMPT_BACKEND`` environment variable
(``auto`` / ``cython`` / ``python``) or programmatically, which the tests
and the backend benchmark use to exercise both implementations.
"""

import os
from contextlib import contextmanager

from . import _kernels_py
from .errors import BackendUnavailableError

try:
    from . import _core as _compiled
except ImportError:  # extension not built; pure-Python fallback
    _compiled = None

_forced: str | None = None


def _resolve(choice: str):
    if choice == "python":
        return _kernels_py
    if choice == "cython":
        if _compiled is None:
            raise BackendUnavailableError(
                "compiled backend requested but ompt._core is not built"
            )
        return _compiled
    if choice == "auto":
        return _compiled if _compiled is not None else _kernels_py
    raise BackendUnavailableError(f"unknown backend {choice!r}")


def get_kernels():
    """The active kernel module (honors forcing and OMPT_BACKEND)."""
    choice = _forced or os.environ.get("OMPT_BACKEND", "auto").lower()
    return _resolve(choice)


def active_backend() -> str:
    """Name of the backend solver calls will use: 'cython' or 'python'."""
    return get_kernels().BACKEND_NAME


def available_backends() -> tuple[str, ...]:
    return ("cython", "python") if _compiled is not None else ("python",)


@contextmanager
def use_backend(name: str):
    """Temporarily force a backend (validates availability up front)."""
    global _forced
    _resolve(name if name != "auto" else "auto")
    previous = _forced
    _forced = name
    try:
        yield
    finally:
        _forced = previous
