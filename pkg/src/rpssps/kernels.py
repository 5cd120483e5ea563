"""Kernel dispatch: compiled extension when built, pure Python otherwise.

Set ``RPSSPS_PURE_PYTHON=1`` to force the fallback. Calls whose integers
would not fit comfortably in int64 are routed to the Python kernels
regardless of the active backend.
"""
from __future__ import annotations

import os

from . import _kernels_py

SERVED = _kernels_py.SERVED
DROPPED = _kernels_py.DROPPED
UNSERVED = _kernels_py.UNSERVED

_impl = _kernels_py
BACKEND = "python"
if not os.environ.get("RPSSPS_PURE_PYTHON"):
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]

        BACKEND = "cython"
    except ImportError:
        pass

_SAFE = 1 << 60


def _fits(*bounds: int) -> bool:
    return all(-_SAFE < b < _SAFE for b in bounds)


def closed_form_slots(m_first, m_last, periods, directions, positions):
    worst = (m_last + 1) * max(periods) + max(abs(t) for t in positions) + m_last
    impl = _impl if _fits(worst) else _kernels_py
    return impl.closed_form_slots(m_first, m_last, periods, directions, positions)


def greedy_slots(m_last, offset, period, width):
    impl = _impl if _fits(offset + m_last * period) else _kernels_py
    return impl.greedy_slots(m_last, offset, period, width)


def match(slot_starts, arrivals, period):
    hi = max((abs(x) for x in (*slot_starts[-1:], *arrivals[-1:], *slot_starts[:1], *arrivals[:1])), default=0)
    impl = _impl if _fits(hi, period) else _kernels_py
    return impl.match(slot_starts, arrivals, period)


def use_backend(name: str):
    """Return the kernel module for ``name`` ('python' or 'cython')."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels

        return _kernels
    raise ValueError(f"unknown backend {name!r}")
