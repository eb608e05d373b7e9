"""Backend selection for the sampling kernels.

The compiled extension is used when it imported; otherwise the numpy
fallback.  Both produce identical streams.
"""
from __future__ import annotations

from types import ModuleType

from . import _fallback

try:
    from . import _native
except ImportError:  # extension not built
    _native = None

BACKENDS: dict[str, ModuleType] = {"python": _fallback}
if _native is not None:
    BACKENDS["native"] = _native

DEFAULT_BACKEND = "native" if _native is not None else "python"


def get_backend(name: str | None = None) -> ModuleType:
    name = name or DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {sorted(BACKENDS)}") from None
