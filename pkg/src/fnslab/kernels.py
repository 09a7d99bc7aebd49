"""Backend selection for the hot pointwise kernel.

The compiled extension is used when importable; setting the environment
variable ``FNSLAB_PURE_PYTHON=1`` forces the numpy fallback.
"""

import os

from . import _kernels_py

try:
    if os.environ.get("FNSLAB_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("pure-Python backend requested")
    from . import _kernels as _compiled
except ImportError:
    _compiled = None

BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    BACKENDS["compiled"] = _compiled

DEFAULT_BACKEND = "compiled" if _compiled is not None else "python"


def get_backend(name: str = "auto"):
    if name == "auto":
        name = DEFAULT_BACKEND
    try:
        return BACKENDS[name]
    except KeyError:
        raise ValueError(f"kernel backend {name!r} is not available; have {sorted(BACKENDS)}") from None
