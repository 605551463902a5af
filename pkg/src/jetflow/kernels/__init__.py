"""Hierarchy kernels: compiled core when available, numpy fallback otherwise.

Set JETFLOW_PURE=1 to force the pure backend (used by the parity tests and
the benchmark).
"""

import os

from . import _pure
from .tables import CLOSURE_HEADROOM, BoundTables, HierarchyTables, bind_tables, build_tables  # noqa: F401

if os.environ.get("JETFLOW_PURE") == "1":
    _impl = _pure
else:
    try:
        from . import _core as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _pure

BACKEND: str = _impl.BACKEND
hierarchy_rhs = _impl.hierarchy_rhs
# batching has no compiled variant; the per-state kernel is the hot path
hierarchy_rhs_batch = _pure.hierarchy_rhs_batch


def get_backends():
    """All importable backends as (name, rhs callable) pairs."""
    out = [(_pure.BACKEND, _pure.hierarchy_rhs)]
    try:
        from . import _core  # type: ignore[attr-defined]

        out.append((_core.BACKEND, _core.hierarchy_rhs))
    except ImportError:
        pass
    return out
