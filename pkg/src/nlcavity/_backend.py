"""Propagation backend selection.

The compiled extension is preferred when importable; the pure-numpy
fallback implements the identical algorithms.  Set NLCAVITY_PURE_PYTHON=1
to force the fallback (used by the backend-parity tests and the
benchmark script).
"""

import os

from . import _purepy

if os.environ.get("NLCAVITY_PURE_PYTHON", "") == "1":
    _impl = _purepy
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _purepy

propagate_rk45 = _impl.propagate_rk45
propagate_rk4 = _impl.propagate_rk4


def backend_name() -> str:
    return _impl.BACKEND_NAME


def available_backends():
    """Mapping of backend name -> module, for benchmarks and parity tests."""
    out = {"python": _purepy}
    try:
        from . import _core

        out["compiled"] = _core
    except ImportError:
        pass
    return out
