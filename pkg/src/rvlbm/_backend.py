"""Picks the compiled kernels when available, the numpy ones otherwise.

Set ``RVLBM_BACKEND=python`` to force the fallback (``compiled`` to require
the extension).
"""

from __future__ import annotations

import os

from . import _fallback

BACKEND_ENV = "RVLBM_BACKEND"


def _load(choice: str):
    if choice == "python":
        return _fallback, "python"
    try:
        from . import _kernels
    except ImportError:
        if choice == "compiled":
            raise
        return _fallback, "python"
    return _kernels, "compiled"


kernels, name = _load(os.environ.get(BACKEND_ENV, "auto").strip().lower())


def get(choice: str):
    """Kernel module for an explicit choice (``python`` or ``compiled``)."""
    return _load(choice)[0]
