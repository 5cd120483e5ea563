"""Packet/slot matching with queueing, slot waste and the period-length drop rule."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from . import kernels
from .baselines import AssignmentStream, csps_schedule, fixed_period, psps_slot
from .errors import DomainError
from .rps import derive_factors, derive_t0, slot_indices
from .timebase import SlotGrid, TrafficSpec, ceil_div, slot_start

SCHEMES = ("rps", "psps", "csps")
_STATUS = {kernels.SERVED: "served", kernels.DROPPED: "dropped", kernels.UNSERVED: "unserved"}


@dataclass(frozen=True)
class PacketRecord:
    m: int
    arrival: int
    serving_slot: Optional[int] = None
    delay: Optional[int] = None
    status: str = "unserved"


@dataclass(frozen=True)
class SimTrace:
    packets: tuple
    wasted_slots: tuple
    scheme: str
    grid: SlotGrid
    traffic: TrafficSpec
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class SimStats:
    mean_delay: Optional[Fraction]
    max_delay: Optional[int]
    drop_count: int
    wasted_count: int
    served_count: int
    unserved_count: int


def run(assignments: AssignmentStream, traffic: TrafficSpec, grid: SlotGrid) -> SimTrace:
    """Serve packets in arrival order from the given assignments.

    At each assignment, queued packets whose wait would exceed the traffic
    period are dropped first; the oldest remaining arrived packet is then
    served at the slot start. An assignment with nothing to serve is wasted.
    """
    slots = list(assignments.slots)
    for a, b in zip(slots, slots[1:]):
        if b <= a:
            raise DomainError(f"assignment stream not strictly increasing at {a}, {b}")
    starts = [slot_start(i, grid) for i in slots]
    arrivals = [traffic.tau_trff + k * traffic.p_trff for k in range(traffic.m_total)]
    serving, status, wasted = kernels.match(starts, arrivals, traffic.p_trff)
    packets = []
    for k, (a, idx, st) in enumerate(zip(arrivals, serving, status)):
        if st == kernels.SERVED:
            packets.append(PacketRecord(k + 1, a, slots[idx], starts[idx] - a, "served"))
        else:
            packets.append(PacketRecord(k + 1, a, status=_STATUS[st]))
    return SimTrace(tuple(packets), tuple(slots[k] for k in wasted), assignments.scheme,
                    grid, traffic)


def summarize(trace: SimTrace) -> SimStats:
    delays = [p.delay for p in trace.packets if p.status == "served"]
    drops = sum(p.status == "dropped" for p in trace.packets)
    unserved = sum(p.status == "unserved" for p in trace.packets)
    mean = Fraction(sum(delays), len(delays)) if delays else None
    return SimStats(mean, max(delays) if delays else None, drops, len(trace.wasted_slots),
                    len(delays), unserved)


def schedule_for(scheme: str, traffic: TrafficSpec, grid: SlotGrid, gamma: int = 3,
                 method: str = "exact") -> AssignmentStream:
    """Assignment stream covering the traffic for one scheme.

    Assignments are generated up to and including the first one starting at
    or after the last arrival, so no scheme gets trailing slots that could
    only be wasted.
    """
    if scheme not in SCHEMES:
        raise DomainError(f"unknown scheme {scheme!r}")
    traffic.check_on(grid)
    if traffic.m_total == 0:
        return AssignmentStream((), scheme)
    if scheme == "rps":
        factors = derive_factors(traffic, grid, gamma, method)
        return AssignmentStream(tuple(slot_indices(factors, traffic.m_total)), "rps")
    last = traffic.tau_trff + (traffic.m_total - 1) * traffic.p_trff
    if scheme == "csps":
        p_fix = fixed_period(traffic, grid)
        span = last - slot_start(derive_t0(traffic, grid), grid)
        return csps_schedule(traffic, grid, max(0, ceil_div(span, p_fix * grid.wsch)) + 1)
    factors = derive_factors(traffic, grid)
    root = factors.levels[0]
    p1 = factors.levels[1].p if factors.n_levels else None
    t1 = factors.levels[1].t if factors.n_levels else None
    slots = []
    m = 1
    while True:
        s = psps_slot(m, root.p, root.q, root.t, p1, t1)
        slots.append(s)
        if slot_start(s, grid) >= last:
            break
        m += 1
    return AssignmentStream(tuple(slots), "psps")


def simulate(scheme: str, traffic: TrafficSpec, grid: SlotGrid, gamma: int = 3,
             method: str = "exact") -> SimTrace:
    trace = run(schedule_for(scheme, traffic, grid, gamma, method), traffic, grid)
    return SimTrace(trace.packets, trace.wasted_slots, scheme, grid, traffic,
                    {"gamma": gamma, "method": method})
