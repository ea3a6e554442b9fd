"""Kernel selection: compiled extension if available, pure Python otherwise.

Set ``STRICTPERF_PURE=1`` to force the pure fallback (used by the benchmark
and to reproduce results without a compiler).
"""

import os

if os.environ.get("STRICTPERF_PURE"):
    from . import _purekernels as _impl
else:
    try:
        from . import _fastkernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _purekernels as _impl

IMPL = _impl.IMPL
howell_mod = _impl.howell_mod
reduce_against = _impl.reduce_against
