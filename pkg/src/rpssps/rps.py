"""Recursive periodicity shifting: scheduling factors and slot indices.

A factor tuple holds a root level ``(p0, q0, t0)`` and ``N`` alignment
levels ``(p_n, q_n, t_n)``. The slot serving packet ``m`` is

    t0 + (m-1)*p0 + q0 * c_1(m)

where the per-level correction counts are evaluated top-down:

    c_N(m) = floor((p_N - t_N + m) / p_N)
    c_n(m) = floor((p_n - t_n + m - q_n * c_{n+1}(m)) / p_n)

Level periods ``p_n`` and initial positions ``t_n`` (n >= 1) are measured
in packets. Correctness is defined by the greedy reference schedule
(:func:`expand_reference_schedule`); every derived tuple must reproduce it.
"""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Sequence

from . import kernels
from .errors import DerivationFailure, DomainError, IncompleteFactors, StabilityViolation
from .timebase import (
    SlotGrid,
    TimeQuantum,
    TrafficSpec,
    arrival_time,
    ceil_div,
    first_slot_at_or_after,
)

DEFAULT_GAMMA = 3


@dataclass(frozen=True)
class FactorVector:
    p: int
    q: int
    t: Optional[int] = None

    def __post_init__(self):
        if self.p < 1:
            raise DomainError(f"period must be >= 1, got {self.p}")
        if self.q not in (-1, 1):
            raise DomainError(f"direction must be +1 or -1, got {self.q}")


@dataclass(frozen=True)
class FactorTuple:
    levels: tuple  # FactorVector for level 0..N
    deltas: tuple  # delay gradients delta_1..delta_{N+1}
    grid: SlotGrid
    p_trff: TimeQuantum

    @property
    def n_levels(self) -> int:
        return len(self.levels) - 1

    @property
    def complete(self) -> bool:
        return all(v.t is not None for v in self.levels)

    @property
    def periods(self) -> list:
        return [v.p for v in self.levels]

    @property
    def directions(self) -> list:
        return [v.q for v in self.levels]

    @property
    def positions(self) -> list:
        return [v.t for v in self.levels]

    def truncated(self, k: int) -> "FactorTuple":
        """Sub-tuple made of levels 0..k; higher levels contribute nothing."""
        return replace(self, levels=self.levels[: k + 1])


class AlignmentChain(NamedTuple):
    periods: list
    directions: list
    deltas: list
    n_levels: int


# ---------------------------------------------------------------------------
# periods and directions


def derive_root(p_trff: TimeQuantum, grid: SlotGrid) -> tuple:
    """Root period, root direction and first delay gradient.

    ``p0`` is the whole number of slots nearest to the traffic period; on
    an exact tie the shorter period wins with direction +1.
    """
    w = grid.wsch
    if p_trff < w:
        raise StabilityViolation(f"traffic period {p_trff} is shorter than slot width {w}")
    lo, rem = divmod(p_trff, w)
    if rem == 0:
        return lo, 1, 0
    if rem <= w // 2:
        return lo, 1, rem
    return lo + 1, -1, w - rem


def _level_step(delta: int, wsch: int) -> tuple:
    rem = wsch % delta
    if rem == 0:
        return wsch // delta, 1
    if rem <= delta // 2:
        return wsch // delta, 1
    return wsch // delta + 1, -1


def derive_alignment_chain(delta1: TimeQuantum, wsch: TimeQuantum) -> AlignmentChain:
    """Alignment periods, directions and gradients for levels 1..N.

    Each level picks the whole number of packets ``p_n`` closest to
    ``wsch / delta_n``; the residual gradient ``|p_n*delta_n - wsch|`` feeds
    the next level until it reaches zero.
    """
    if not 0 <= delta1 <= wsch // 2:
        raise DomainError(f"delta1={delta1} outside [0, {wsch // 2}]")
    periods, directions, deltas = [], [], []
    delta = delta1
    while delta:
        p, q = _level_step(delta, wsch)
        delta = abs(p * delta - wsch)
        periods.append(p)
        directions.append(q)
        deltas.append(delta)
    return AlignmentChain(periods, directions, deltas, len(periods))


def derive_t0(traffic: TrafficSpec, grid: SlotGrid) -> int:
    """Index of the first slot starting at or after the first arrival."""
    if traffic.tau_trff < grid.tau0:
        raise DomainError(f"traffic starts at {traffic.tau_trff}, before grid origin {grid.tau0}")
    return ceil_div(traffic.tau_trff - grid.tau0, grid.wsch) + 1


# ---------------------------------------------------------------------------
# closed-form evaluation

#: Candidate readings of the per-level correction recursion. Each maps a
#: level n (1 <= n < N) to (denominator level, direction level). Only
#: "level" reproduces the reference schedule on every input; the others are
#: kept so that claim stays checkable.
VARIANTS = {
    "level": lambda n: (n, n),
    "printed": lambda n: (1, n),
    "next": lambda n: (n, n + 1),
}
SELECTED_VARIANT = "level"


def correction_count(m: int, factors: FactorTuple, variant: str = SELECTED_VARIANT) -> int:
    """Net number of one-slot shifts applied to the root schedule up to packet m."""
    levels = factors.levels
    top = len(levels) - 1
    if top == 0:
        return 0
    pick = VARIANTS[variant]
    c = (levels[top].p - levels[top].t + m) // levels[top].p
    for n in range(top - 1, 0, -1):
        d, s = pick(n)
        c = (levels[n].p - levels[n].t + m - levels[s].q * c) // levels[d].p
    return c


def _require_complete(factors: FactorTuple) -> None:
    if not factors.complete:
        missing = [n for n, v in enumerate(factors.levels) if v.t is None]
        raise IncompleteFactors(f"initial position unset for levels {missing}")


def slot_index(m: int, factors: FactorTuple, upto: Optional[int] = None,
               variant: str = SELECTED_VARIANT) -> int:
    """Slot serving packet ``m``; ``upto`` restricts evaluation to levels 0..upto."""
    if m < 1:
        raise DomainError(f"packet index must be >= 1, got {m}")
    if upto is not None:
        factors = factors.truncated(upto)
    _require_complete(factors)
    root = factors.levels[0]
    return root.t + (m - 1) * root.p + root.q * correction_count(m, factors, variant)


def slot_indices(factors: FactorTuple, m_last: int, m_first: int = 1) -> list:
    """Batch form of :func:`slot_index` for ``m_first..m_last`` (compiled when available)."""
    _require_complete(factors)
    if m_last < m_first:
        return []
    if m_first < 1:
        raise DomainError(f"packet index must be >= 1, got {m_first}")
    return kernels.closed_form_slots(
        m_first, m_last, factors.periods, factors.directions, factors.positions
    )


def theta(m: int, factors: FactorTuple, traffic: TrafficSpec, upto: Optional[int] = None,
          variant: str = SELECTED_VARIANT) -> TimeQuantum:
    """Signed gap between the start of packet m's slot and its arrival."""
    grid = factors.grid
    phi = slot_index(m, factors, upto, variant)
    return (phi - 1) * grid.wsch - (traffic.tau_trff - grid.tau0) - (m - 1) * traffic.p_trff


# ---------------------------------------------------------------------------
# initial positions


def exact_initial_positions(traffic: TrafficSpec, grid: SlotGrid, chain: AlignmentChain) -> list:
    """Initial positions t_1..t_N computed directly, without search.

    The correction count at level n is ``floor(B_n + (m-1)*delta_n/W)`` for
    an offset ``B_n`` in [0, 1). Since ``p_n*delta_n = W - q_n*delta_{n+1}``,
    that floor splits into an integer part ``k`` (giving ``t_n = p_n + 1 - k``)
    and a residual offset for level n+1. Offsets are tracked as ``b/W - e*eps``
    with an infinitesimal ``eps`` so that ceilings become floors without
    depending on the absolute time unit; this keeps the result invariant
    under scaling of all time inputs.
    """
    if chain.n_levels == 0:
        return []
    w = grid.wsch
    offset = traffic.tau_trff - grid.tau0
    p0, q0, _ = derive_root(traffic.p_trff, grid)
    if q0 == 1:
        b, e = (offset % w) or w, 1
    else:
        b, e = (-offset) % w, 0
    positions = []
    for p, q in zip(chain.periods, chain.directions):
        x = p * b
        k = x // w if e == 0 else ceil_div(x, w) - 1
        positions.append(p + 1 - k)
        frac = x - k * w
        if q == 1:
            b, e = w - frac, 1 - e
        else:
            b = frac
    return positions


def _scan_cap(p0: int, periods: Sequence[int]) -> int:
    return 10 * (p0 + 1) * max(list(periods) + [1])


def jdv_initial_positions(traffic: TrafficSpec, grid: SlotGrid, chain: AlignmentChain,
                          gamma: int = DEFAULT_GAMMA, variant: str = SELECTED_VARIANT) -> tuple:
    """Joint derivation and verification search for initial positions.

    For each level: scan forward from the previous level's position until
    the truncated tuple first misses its packet, then walk the estimate
    back until every packet in ``[t, t + gamma*p_n + 1]`` lands inside its
    slot. The previous level's position is clamped down to the estimate
    whenever it exceeds it. Returns ``(t0, [t_1..t_N])`` since the clamp may
    move ``t0``.

    Raises DerivationFailure if the estimate drops below 1 or the forward
    scan runs away. With truncated tuples drifting between levels, this
    happens for most inputs whose chain is longer than a single level;
    :func:`exact_initial_positions` has no such failure mode.
    """
    if gamma < 1:
        raise DomainError(f"gamma must be >= 1, got {gamma}")
    p0, q0, d1 = derive_root(traffic.p_trff, grid)
    deltas = [d1] + list(chain.deltas)
    n_total = chain.n_levels
    levels = [FactorVector(p0, q0, derive_t0(traffic, grid))]
    levels += [FactorVector(p, q) for p, q in zip(chain.periods, chain.directions)]
    w = grid.wsch
    cap = _scan_cap(p0, chain.periods)

    def gap(m, k):
        ft = FactorTuple(tuple(levels[: k + 1]), tuple(deltas), grid, traffic.p_trff)
        return theta(m, ft, traffic, variant=variant)

    for n in range(1, n_total + 1):
        i = 2 if n == 1 else levels[n - 1].t
        steps = 0
        while True:
            g = gap(i, n - 1)
            if g < 0 or g >= w:
                break
            i += 1
            steps += 1
            if steps > cap:
                raise DerivationFailure(f"forward scan at level {n} exceeded {cap} steps")
        est = i
        while True:
            if est < 1:
                raise DerivationFailure(f"backward validation at level {n} fell below 1")
            if levels[n - 1].t > est:
                levels[n - 1] = replace(levels[n - 1], t=est)
            levels[n] = replace(levels[n], t=est)
            if all(0 <= gap(j, n) < w for j in range(est, est + gamma * levels[n].p + 2)):
                break
            est -= 1
    return levels[0].t, [v.t for v in levels[1:]]


# ---------------------------------------------------------------------------
# composition and the reference schedule


def derive_factors(traffic: TrafficSpec, grid: SlotGrid, gamma: int = DEFAULT_GAMMA,
                   method: str = "exact") -> FactorTuple:
    """Complete factor tuple for ``traffic`` on ``grid``.

    ``method="exact"`` (default) computes initial positions in closed form;
    ``method="jdv"`` runs the search in :func:`jdv_initial_positions` with
    validation horizon ``gamma``.
    """
    traffic.check_on(grid)
    p0, q0, d1 = derive_root(traffic.p_trff, grid)
    chain = derive_alignment_chain(d1, grid.wsch)
    t0 = derive_t0(traffic, grid)
    if method == "exact":
        positions = exact_initial_positions(traffic, grid, chain)
    elif method == "jdv":
        t0, positions = jdv_initial_positions(traffic, grid, chain, gamma)
    else:
        raise DomainError(f"unknown derivation method {method!r}")
    levels = [FactorVector(p0, q0, t0)]
    levels += [FactorVector(p, q, t) for p, q, t in zip(chain.periods, chain.directions, positions)]
    deltas = [d1] + chain.deltas
    return FactorTuple(tuple(levels), tuple(deltas), grid, traffic.p_trff)


def expand_reference_schedule(traffic: TrafficSpec, grid: SlotGrid) -> list:
    """Greedy schedule: each packet takes the first slot at or after its arrival."""
    return [first_slot_at_or_after(arrival_time(m, traffic), grid)
            for m in range(1, traffic.m_total + 1)]
