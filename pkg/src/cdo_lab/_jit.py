"""Numba switch.

Set ``CDO_LAB_DISABLE_JIT=1`` to force the pure-numpy kernels, e.g. for
debugging or for the benchmark's reference run.
"""

from __future__ import annotations

import os

JIT_DISABLED = os.environ.get("CDO_LAB_DISABLE_JIT", "").strip().lower() in {"1", "true", "yes", "on"}

try:
    import numba
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda func: func


JIT_ENABLED = HAS_NUMBA and not JIT_DISABLED


def thread_cap() -> int | None:
    """Value of ``CDO_LAB_THREADS`` or None when unset/invalid."""
    raw = os.environ.get("CDO_LAB_THREADS", "").strip()
    if not raw:
        return None
    try:
        n = int(raw)
    except ValueError:
        return None
    return n if n > 0 else None

