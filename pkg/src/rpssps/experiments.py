"""Experiment drivers behind the CLI: traces, period sweeps and fuzz verification.

Everything here returns plain rows or reports; formatting and exit codes
live in :mod:`rpssps.cli`.
"""
from __future__ import annotations

import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Optional

from .errors import DerivationFailure, RpsError
from .rps import derive_factors, expand_reference_schedule, slot_indices
from .simulator import SCHEMES, simulate, summarize
from .timebase import UNITS, SlotGrid, TrafficSpec, format_us, slot_start

TRACE_HEADER = ("m", "arrival_us", "slot_index", "slot_start_us", "delay_us", "status")
SWEEP_HEADER = ("period_us", "scheme", "mean_delay_us", "max_delay_us", "drops", "wasted",
                "N_levels")


@dataclass
class Scenario:
    """Scenario parameters in integer ticks of ``unit``."""

    wsch: int
    period: int
    tau_traffic: int = 0
    tau0: int = 0
    packets: int = 200
    scheme: str = "rps"
    gamma: int = 3
    method: str = "exact"
    unit: str = "us"

    @property
    def grid(self) -> SlotGrid:
        return SlotGrid(self.wsch, self.tau0)

    @property
    def traffic(self) -> TrafficSpec:
        return TrafficSpec(self.period, self.tau_traffic, self.packets)


def format_mean(mean: Optional[Fraction], unit: str = "us") -> str:
    """Exact mean in microseconds, rounded half-even to at most 3 decimals."""
    if mean is None:
        return ""
    us = Decimal(mean.numerator) / Decimal(mean.denominator * UNITS[unit])
    q = us.quantize(Decimal("0.001"), rounding=ROUND_HALF_EVEN)
    s = format(q, "f").rstrip("0").rstrip(".")
    return "0" if s in ("", "-0") else s


# ---------------------------------------------------------------------------
# trace


def trace_rows(sc: Scenario) -> list:
    trace = simulate(sc.scheme, sc.traffic, sc.grid, sc.gamma, sc.method)
    rows = []
    for pk in trace.packets:
        if pk.serving_slot is None:
            rows.append((pk.m, format_us(pk.arrival, sc.unit), "", "", "", pk.status))
        else:
            rows.append((pk.m, format_us(pk.arrival, sc.unit), pk.serving_slot,
                         format_us(slot_start(pk.serving_slot, sc.grid), sc.unit),
                         format_us(pk.delay, sc.unit), pk.status))
    return rows


# ---------------------------------------------------------------------------
# sweep


def _sweep_point(args) -> list:
    sc, schemes = args
    n_levels = derive_factors(sc.traffic, sc.grid).n_levels
    rows = []
    for scheme in schemes:
        stats = summarize(simulate(scheme, sc.traffic, sc.grid, sc.gamma, sc.method))
        rows.append((format_us(sc.period, sc.unit), scheme, format_mean(stats.mean_delay, sc.unit),
                     "" if stats.max_delay is None else format_us(stats.max_delay, sc.unit),
                     stats.drop_count, stats.wasted_count, n_levels))
    return rows


def sweep_rows(base: Scenario, p_from: int, p_to: int, p_step: int, schemes=SCHEMES,
               jobs: int = 1) -> list:
    """One row per (period, scheme), ordered by period then by scheme."""
    ordered = [s for s in SCHEMES if s in schemes]
    points = []
    for period in range(p_from, p_to + 1, p_step):
        sc = Scenario(base.wsch, period, base.tau_traffic, base.tau0, base.packets,
                      gamma=base.gamma, method=base.method, unit=base.unit)
        points.append((sc, ordered))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            chunks = list(pool.map(_sweep_point, points, chunksize=16))
    else:
        chunks = [_sweep_point(p) for p in points]
    return [row for chunk in chunks for row in chunk]


# ---------------------------------------------------------------------------
# verify


@dataclass
class TrialResult:
    wsch: int
    period: int
    tau_traffic: int
    n_levels: Optional[int] = None
    failures: list = field(default_factory=list)


def check_scenario(wsch: int, period: int, tau_traffic: int, packets: int, tau0: int = 0,
                   gamma: int = 3, method: str = "exact", scales=(2, 7)) -> TrialResult:
    """Run every invariant check on one scenario; failures are collected, not raised."""
    res = TrialResult(wsch, period, tau_traffic)
    grid = SlotGrid(wsch, tau0)
    traffic = TrafficSpec(period, tau0 + tau_traffic, packets)
    try:
        f = derive_factors(traffic, grid, gamma, method)
    except DerivationFailure as exc:
        res.failures.append(f"derivation failed: {exc}")
        return res
    res.n_levels = f.n_levels

    got = slot_indices(f, packets)
    want = expand_reference_schedule(traffic, grid)
    for m, (a, b) in enumerate(zip(got, want), 1):
        if a != b:
            res.failures.append(f"packet {m}: closed form slot {a}, reference slot {b}")
            break

    d = f.deltas
    if d[-1] != 0:
        res.failures.append(f"final gradient {d[-1]} != 0")
    for k in range(len(d) - 1):
        if 2 * d[k + 1] > d[k]:
            res.failures.append(f"gradient not halved: {d[k]} -> {d[k + 1]}")
    if f.n_levels > wsch.bit_length():
        res.failures.append(f"N={f.n_levels} exceeds floor(log2(W))+1={wsch.bit_length()}")

    for c in scales:
        try:
            g = derive_factors(TrafficSpec(c * period, c * (tau0 + tau_traffic), packets),
                               SlotGrid(c * wsch, c * tau0), gamma, method)
        except RpsError as exc:
            res.failures.append(f"scaled by {c}: {exc}")
            continue
        if g.levels != f.levels or list(g.deltas) != [c * x for x in d]:
            res.failures.append(f"scaled by {c}: factors changed")
    return res


def _trial(args) -> TrialResult:
    return check_scenario(*args)


def draw_trials(trials: int, seed: int, w_min: int, w_max: int, p_max_factor: int,
                wsch: Optional[int] = None, period: Optional[int] = None,
                tau_traffic: Optional[int] = None) -> list:
    """Seeded scenario draws; any fixed argument overrides the draw for every trial."""
    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        w = rng.randint(w_min, w_max)
        p = rng.randint(w, p_max_factor * w)
        t = rng.randrange(p)
        w = wsch if wsch is not None else w
        p = period if period is not None else max(p, w)
        if tau_traffic is not None:
            t = tau_traffic
        elif t >= p:
            t = rng.randrange(p)
        out.append((w, p, t))
    return out


def verify(draws: list, packets: int, tau0: int = 0, gamma: int = 3, method: str = "exact",
           jobs: int = 1) -> list:
    args = [(w, p, t, packets, tau0, gamma, method) for w, p, t in draws]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            return list(pool.map(_trial, args, chunksize=8))
    return [_trial(a) for a in args]
