"""Hot-kernel backend selection.

The compiled Cython extension is preferred when present; the NumPy
fallback is behaviorally identical. Set KCGEN_PURE_PYTHON=1 to force
the fallback (used by the benchmark and CI sanity runs).
"""

import os

if os.environ.get("KCGEN_PURE_PYTHON"):
    from . import _py as _impl
else:
    try:
        from . import _ckern as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _py as _impl

BACKEND = _impl.BACKEND
assign_nearest = _impl.assign_nearest
signrank_count_leq = _impl.signrank_count_leq

__all__ = ["BACKEND", "assign_nearest", "signrank_count_leq"]
