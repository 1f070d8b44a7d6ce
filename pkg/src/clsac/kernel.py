"""Backend selection for the closed-loop integrator.

The compiled core is used when it imports; otherwise the pure-Python
fallback. ``CLSAC_BACKEND=python`` forces the fallback.
"""

import os

from . import _fallback

try:
    from . import _core
except ImportError:  # extension not built
    _core = None

_BACKENDS = {"python": _fallback.simulate}
if _core is not None:
    _BACKENDS["compiled"] = _core.simulate

if os.environ.get("CLSAC_BACKEND", "").lower() == "python" or _core is None:
    DEFAULT_BACKEND = "python"
else:
    DEFAULT_BACKEND = "compiled"


def available_backends() -> list[str]:
    return sorted(_BACKENDS)


def get_kernel(name: str | None = None):
    name = name or DEFAULT_BACKEND
    try:
        return _BACKENDS[name]
    except KeyError:
        raise ValueError(f"unknown or unavailable backend {name!r}; have {available_backends()}") from None
