"""Reference schedulers: classical fixed-period SPS and fixed-cadence periodic shifting.

PS-SPS is modelled as RPS truncated after its first alignment level: the
root period is shifted by one slot every ``p_1`` packets and the residual
gradient ``delta_2`` is never corrected.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import DomainError
from .rps import derive_factors, derive_root, derive_t0
from .timebase import SlotGrid, TrafficSpec


@dataclass(frozen=True)
class AssignmentStream:
    slots: tuple
    scheme: str

    def __post_init__(self):
        if self.slots and self.slots[0] < 1:
            raise DomainError(f"first slot must be >= 1, got {self.slots[0]}")
        for a, b in zip(self.slots, self.slots[1:]):
            if b <= a:
                raise DomainError(f"{self.scheme} stream not strictly increasing at {a}, {b}")

    def __len__(self):
        return len(self.slots)


def fixed_period(traffic: TrafficSpec, grid: SlotGrid, rounding: str = "nearest") -> int:
    """C-SPS period in slots.

    ``nearest`` matches the RPS root period; ``floor`` forces the
    over-scheduled state and ``ceil`` the under-scheduled one.
    """
    if rounding == "nearest":
        return derive_root(traffic.p_trff, grid)[0]
    lo, rem = divmod(traffic.p_trff, grid.wsch)
    if rounding == "floor":
        return lo
    if rounding == "ceil":
        return lo + (rem > 0)
    raise DomainError(f"unknown rounding {rounding!r}")


def csps_schedule(traffic: TrafficSpec, grid: SlotGrid, count: int,
                  rounding: str = "nearest") -> AssignmentStream:
    traffic.check_on(grid)
    p_fix = fixed_period(traffic, grid, rounding)
    t0 = derive_t0(traffic, grid)
    return AssignmentStream(tuple(t0 + k * p_fix for k in range(count)), "csps")


def psps_slot(m: int, p0: int, q0: int, t0: int, p1: int | None, t1: int | None) -> int:
    if p1 is None:
        return t0 + (m - 1) * p0
    return t0 + (m - 1) * p0 + q0 * ((p1 - t1 + m) // p1)


def psps_schedule(traffic: TrafficSpec, grid: SlotGrid, count: int) -> AssignmentStream:
    factors = derive_factors(traffic, grid)
    root = factors.levels[0]
    first = factors.levels[1] if factors.n_levels else None
    p1 = first.p if first else None
    t1 = first.t if first else None
    slots = tuple(psps_slot(m, root.p, root.q, root.t, p1, t1) for m in range(1, count + 1))
    return AssignmentStream(slots, "psps")
