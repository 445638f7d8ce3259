"""Select the compiled kernels when available.

Set ``THERMALDRAG_PURE_PYTHON=1`` to force the numpy fallback.
"""
from __future__ import annotations

import os

from . import _fallback

kernels = _fallback
NAME = "python"

if os.environ.get("THERMALDRAG_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _kernels as kernels  # noqa: F811
        NAME = "compiled"
    except ImportError:
        pass


def get(name: str | None = None):
    """Kernel module by name (``"compiled"``, ``"python"``) or the active one."""
    if name is None:
        return kernels
    if name == "python":
        return _fallback
    if name == "compiled":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown backend {name!r}")
