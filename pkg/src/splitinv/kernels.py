"""Backend selection for the hot scan kernels.

The compiled extension is used when it imports; otherwise (or when the
``SPLITINV_PURE`` environment variable is set to ``1``) the numpy versions are
used.  Both expose the same three functions with identical results.
"""
import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels

if os.environ.get("SPLITINV_PURE") != "1":
    try:
        from . import _kernels as _compiled
    except ImportError:
        _compiled = None
    if _compiled is not None:
        _impl = _compiled
        BACKEND = "cython"


def available_backends():
    """Return ``{name: module}`` for every importable backend."""
    out = {"python": _pykernels}
    try:
        from . import _kernels as compiled
    except ImportError:
        return out
    out["cython"] = compiled
    return out


weighted_pair_max = _impl.weighted_pair_max
window_max = _impl.window_max
garch_sigma2 = _impl.garch_sigma2
