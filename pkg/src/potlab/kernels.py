"""Kernel backend selection.

The compiled extension is used when it imports and ``POTLAB_PURE_PYTHON``
is unset; otherwise the pure-Python reference implementation is used.
Both expose the same functions.
"""

import os

from . import _pykernels

BACKEND = "python"
_impl = _pykernels
if not os.environ.get("POTLAB_PURE_PYTHON"):
    try:
        from . import _ckernels as _impl  # noqa: F811
        BACKEND = "cython"
    except ImportError:
        _impl = _pykernels

TRACK_OK = 0
TRACK_UNDERFLOW = 1

eval_coeffs = _impl.eval_coeffs
aberth = _impl.aberth
match = _impl.match
track = _impl.track
track_many = _impl.track_many
aberth_batch = _impl.aberth_batch
match_batch = _impl.match_batch
circle_deficits = _impl.circle_deficits


def backends():
    """Available kernel modules keyed by name (the benchmark compares them)."""
    out = {"python": _pykernels}
    try:
        from . import _ckernels
        out["cython"] = _ckernels
    except ImportError:
        pass
    return out
