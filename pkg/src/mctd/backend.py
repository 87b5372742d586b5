"""Kernel backend selection: compiled extension when available, numpy otherwise.

The compiled kernel covers d = 1 (the simulation-study setting); other
dimensions always use the numpy kernels. MCTD_BACKEND=python|compiled forces
a choice; "auto" (default) prefers the compiled kernel.
"""
from __future__ import annotations

import os

from . import _dp_numpy
from .errors import ValidationError

try:
    from . import _dp_core
except ImportError:  # pragma: no cover - build dependent
    _dp_core = None

HAS_COMPILED = _dp_core is not None


def available_backends() -> tuple[str, ...]:
    return ("python", "compiled") if HAS_COMPILED else ("python",)


def get_sup_kernel(name: str | None = None, dim: int = 2):
    """Returns (kernel, resolved_name); kernel signature matches _dp_numpy.sup_all."""
    name = name or os.environ.get("MCTD_BACKEND", "auto")
    if name not in ("auto", "python", "compiled"):
        raise ValidationError(f"unknown backend {name!r}; use auto, python or compiled")
    if name == "compiled" and not HAS_COMPILED:
        raise ValidationError("compiled backend requested but the extension is not built")
    if name == "compiled" and dim != 2:
        raise ValidationError("compiled backend supports d = 1 only")
    if name == "auto":
        name = "compiled" if (HAS_COMPILED and dim == 2) else "python"
    if name == "compiled":
        return _dp_core.sup_all, "compiled"
    return _dp_numpy.sup_all, "python"
