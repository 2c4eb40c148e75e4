"""Backend selection for the numerical kernels.

The compiled extension is used when it imports; otherwise the numpy fallback.
Set ``ITESPEC_BACKEND=python`` to force the fallback.
"""
import os

from itespec import _pykernels

_forced = os.environ.get("ITESPEC_BACKEND", "").lower()

if _forced == "python":
    _impl = _pykernels
    BACKEND = "python"
else:
    try:
        from itespec import _ckernels as _impl
        BACKEND = "compiled"
    except ImportError:
        if _forced == "compiled":
            raise
        _impl = _pykernels
        BACKEND = "python"

jhat = _impl.jhat
shoot = _impl.shoot
band_lu = _impl.band_lu
band_solve = _impl.band_solve

select_method = _pykernels.select_method
METHOD_NAMES = {
    _pykernels.METHOD_SERIES: "series",
    _pykernels.METHOD_RECURRENCE: "recurrence",
    _pykernels.METHOD_ASYMPTOTIC: "asymptotic",
}


def backends():
    """Available kernel modules keyed by name (for tests and benchmarks)."""
    out = {"python": _pykernels}
    try:
        from itespec import _ckernels
        out["compiled"] = _ckernels
    except ImportError:
        pass
    return out
