import json
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import corpus
from oracles import brute_chain, brute_nearest_multiple, brute_schedule
from rpssps import kernels
from rpssps.errors import DerivationFailure, DomainError, IncompleteFactors, StabilityViolation
from rpssps.rps import (
    VARIANTS,
    FactorTuple,
    FactorVector,
    derive_alignment_chain,
    derive_factors,
    derive_root,
    derive_t0,
    exact_initial_positions,
    expand_reference_schedule,
    jdv_initial_positions,
    slot_index,
    slot_indices,
    theta,
)
from rpssps.timebase import SlotGrid, TrafficSpec

GOLDEN = Path(__file__).parent / "golden"


def factors_for(wsch, period, tau=0, m_total=200, tau0=0, **kw):
    traffic = TrafficSpec(period, tau0 + tau, m_total)
    return traffic, derive_factors(traffic, SlotGrid(wsch, tau0), **kw)


# -- root and chain ---------------------------------------------------------


@pytest.mark.parametrize("period, wsch, expected", [
    (2800, 71, (39, 1, 31)),
    (710, 71, (10, 1, 0)),
    (25, 10, (2, 1, 5)),
    (2830, 71, (40, -1, 10)),
])
def test_derive_root_examples(period, wsch, expected):
    assert derive_root(period, SlotGrid(wsch)) == expected


def test_derive_root_rejects_fast_traffic():
    with pytest.raises(StabilityViolation):
        derive_root(70, SlotGrid(71))


@given(st.integers(1, 2000), st.integers(1, 200))
def test_derive_root_matches_brute_force(wsch, k):
    period = wsch + (k * 7919) % (99 * wsch + 1)
    p0, q0, d1 = derive_root(period, SlotGrid(wsch))
    assert (p0, d1) == brute_nearest_multiple(period, wsch)
    rem = period % wsch
    assert q0 == (1 if rem <= wsch // 2 else -1)
    assert 0 <= d1 <= wsch // 2


@pytest.mark.parametrize("delta1, wsch, periods, directions, deltas", [
    (31, 71, [2, 8, 71], [1, -1, 1], [9, 1, 0]),
    (0, 71, [], [], []),
    (5, 10, [2], [1], [0]),
])
def test_chain_examples(delta1, wsch, periods, directions, deltas):
    chain = derive_alignment_chain(delta1, wsch)
    assert (chain.periods, chain.directions, chain.deltas) == (periods, directions, deltas)
    assert chain.n_levels == len(periods)


def test_chain_rejects_large_gradient():
    with pytest.raises(DomainError):
        derive_alignment_chain(36, 71)


@given(st.integers(2, 10**6), st.data())
def test_chain_properties(wsch, data):
    delta1 = data.draw(st.integers(1, wsch // 2))
    chain = derive_alignment_chain(delta1, wsch)
    assert (chain.periods, chain.deltas) == brute_chain(delta1, wsch)
    ds = [delta1] + chain.deltas
    assert ds[-1] == 0
    for a, b in zip(ds, ds[1:]):
        assert 2 * b <= a
    assert chain.n_levels <= delta1.bit_length() <= wsch.bit_length()
    for p, q, d in zip(chain.periods, chain.directions, ds):
        assert p >= 2
        assert p in (wsch // d, -(-wsch // d))
        if wsch % d:
            assert (q == 1) == (p == wsch // d)
        else:
            assert q == 1


def test_chain_tie_takes_floor():
    # 10 mod 4 = 2 = floor(4/2): floor branch, direction +1
    chain = derive_alignment_chain(4, 10)
    assert chain.periods[0] == 2 and chain.directions[0] == 1


@pytest.mark.parametrize("tau, expected", [(0, 1), (95, 3), (71, 2)])
def test_derive_t0(tau, expected):
    assert derive_t0(TrafficSpec(2800, tau), SlotGrid(71)) == expected


# -- evaluation -------------------------------------------------------------


def test_slot_index_small_example():
    _, f = factors_for(10, 25)
    assert [slot_index(m, f) for m in range(1, 6)] == [1, 4, 6, 9, 11]
    assert f.positions == [1, 2]


def test_slot_index_fig3_second_packet():
    _, f = factors_for(71, 2800)
    assert slot_index(2, f) == 41


def test_slot_index_aligned():
    _, f = factors_for(710, 7 * 710)
    assert f.n_levels == 0
    assert slot_index(7, f) == f.levels[0].t + 6 * 7


def test_slot_index_requires_complete_tuple():
    f = FactorTuple((FactorVector(2, 1, 1), FactorVector(2, 1)), (5, 0), SlotGrid(10), 25)
    with pytest.raises(IncompleteFactors):
        slot_index(1, f)
    with pytest.raises(IncompleteFactors):
        slot_indices(f, 5)
    assert slot_index(3, f, upto=0) == 5


def test_slot_index_rejects_bad_m():
    _, f = factors_for(10, 25)
    with pytest.raises(DomainError):
        slot_index(0, f)


def test_theta_examples():
    traffic, f = factors_for(10, 25)
    assert theta(1, f, traffic) == 0
    assert theta(2, f, traffic, upto=0) == -5
    assert theta(2, f, traffic) == 5


def test_factor_vector_validation():
    with pytest.raises(DomainError):
        FactorVector(0, 1)
    with pytest.raises(DomainError):
        FactorVector(2, 0)


# -- derivation -------------------------------------------------------------


def test_derive_factors_fig3():
    _, f = factors_for(71, 2800)
    assert f.n_levels == 3
    assert f.periods == [39, 2, 8, 71]
    assert f.directions == [1, 1, -1, 1]
    assert list(f.deltas) == [31, 9, 1, 0]


def test_derive_factors_aligned():
    _, f = factors_for(71, 710)
    assert (f.n_levels, f.periods, f.positions) == (0, [10], [1])
    assert list(f.deltas) == [0]


def test_derive_factors_small():
    _, f = factors_for(10, 25)
    assert (f.n_levels, f.periods, f.directions, f.positions) == (1, [2, 2], [1, 1], [1, 2])


def test_derive_factors_unknown_method():
    with pytest.raises(DomainError):
        factors_for(10, 25, method="guess")


@pytest.mark.parametrize("wsch, period, tau, count, expected", [
    (10, 25, 0, 5, [1, 4, 6, 9, 11]),
    (71, 2800, 0, 3, [1, 41, 80]),
    (71, 71, 0, 3, [1, 2, 3]),
])
def test_reference_schedule(wsch, period, tau, count, expected):
    traffic = TrafficSpec(period, tau, count)
    assert expand_reference_schedule(traffic, SlotGrid(wsch)) == expected
    assert brute_schedule(wsch, period, tau, count) == expected


scenarios = st.integers(2, 1000).flatmap(
    lambda w: st.tuples(st.just(w), st.integers(w, 100 * w)).flatmap(
        lambda wp: st.tuples(st.just(wp[0]), st.just(wp[1]), st.integers(0, wp[1] - 1),
                             st.integers(0, 5000))))


@settings(max_examples=300, deadline=None)
@given(scenarios)
def test_closed_form_matches_brute_schedule(sc):
    wsch, period, tau, tau0 = sc
    traffic, f = factors_for(wsch, period, tau, 300, tau0)
    got = slot_indices(f, 300)
    assert got == brute_schedule(wsch, period, tau0 + tau, 300, tau0)
    assert all(0 <= theta(m, f, traffic) < wsch for m in (1, 2, 150, 300))
    p0 = f.periods[0]
    assert all(b - a in (p0 - 1, p0, p0 + 1) for a, b in zip(got, got[1:]))
    assert all(b > a for a, b in zip(got, got[1:]))
    assert all(2 <= t <= p + 1 for p, t in zip(f.periods[1:], f.positions[1:]))


@settings(max_examples=200, deadline=None)
@given(scenarios, st.integers(2, 1000))
def test_scale_invariance(sc, c):
    wsch, period, tau, tau0 = sc
    _, f = factors_for(wsch, period, tau, 10, tau0)
    _, g = factors_for(c * wsch, c * period, c * tau, 10, c * tau0)
    assert g.levels == f.levels
    assert list(g.deltas) == [c * d for d in f.deltas]


def test_exhaustive_small_grids():
    """Every (W, P, tau) with W <= 16, P <= 4W against the reference over 2 full cycles."""
    for wsch in range(1, 17):
        grid = SlotGrid(wsch)
        for period in range(wsch, 4 * wsch + 1):
            for tau in range(period):
                traffic = TrafficSpec(period, tau, 2 * wsch * max(1, wsch) + 5)
                f = derive_factors(traffic, grid)
                want = kernels.greedy_slots(traffic.m_total, tau, period, wsch)
                assert slot_indices(f, traffic.m_total) == want, (wsch, period, tau)


def test_batch_and_scalar_agree():
    _, f = factors_for(997, 31337, 4242)
    assert slot_indices(f, 400, 200) == [slot_index(m, f) for m in range(200, 401)]
    assert slot_indices(f, 3, 5) == []


# -- recursion variants -------------------------------------------------------


def test_selected_variant_is_the_only_exact_one():
    traffic, f = factors_for(71, 2800, m_total=1000)
    ref = expand_reference_schedule(traffic, f.grid)
    misses = {name: sum(slot_index(m, f, variant=name) != ref[m - 1] for m in range(1, 1001))
              for name in VARIANTS}
    assert misses["level"] == 0
    assert misses["printed"] > 0
    assert misses["next"] > 0


@pytest.mark.parametrize("variant, wsch, period", [("printed", 13, 18), ("next", 8, 11)])
def test_rejected_variants_small_counterexamples(variant, wsch, period):
    traffic, f = factors_for(wsch, period, m_total=50)
    ref = expand_reference_schedule(traffic, f.grid)
    assert any(slot_index(m, f, variant=variant) != ref[m - 1] for m in range(1, 51))
    assert all(slot_index(m, f) == ref[m - 1] for m in range(1, 51))


def test_variants_coincide_up_to_two_levels():
    _, f = factors_for(10, 25)
    assert {slot_index(9, f, variant=v) for v in VARIANTS} == {slot_index(9, f)}


# -- joint derivation and verification ---------------------------------------


def test_jdv_small_example():
    traffic = TrafficSpec(25, 0, 10)
    chain = derive_alignment_chain(5, 10)
    assert jdv_initial_positions(traffic, SlotGrid(10), chain) == (1, [2])


def test_jdv_aligned_is_empty():
    traffic = TrafficSpec(710, 0, 10)
    assert jdv_initial_positions(traffic, SlotGrid(71), derive_alignment_chain(0, 71)) == (1, [])


def test_jdv_fig3_golden():
    golden = json.loads((GOLDEN / "jdv_fig3.json").read_text())
    traffic, f = factors_for(golden["wsch_us"], golden["period_us"], golden["tau_traffic_us"],
                             method="jdv", gamma=golden["gamma"])
    assert f.periods == golden["periods"]
    assert f.positions == [golden["t0"]] + golden["positions"]
    assert all(0 <= theta(m, f, traffic) < 71 for m in range(1, 201))


def test_jdv_gives_up_when_truncated_levels_drift():
    # level 1 alone gains 16 us per alignment; no start survives a 3*p1+1 window
    traffic = TrafficSpec(7952, 204, 100)
    with pytest.raises(DerivationFailure):
        derive_factors(traffic, SlotGrid(656), method="jdv")
    f = derive_factors(traffic, SlotGrid(656))
    assert slot_indices(f, 100) == expand_reference_schedule(traffic, f.grid)


def test_jdv_rejects_bad_gamma():
    with pytest.raises(DomainError):
        jdv_initial_positions(TrafficSpec(25), SlotGrid(10), derive_alignment_chain(5, 10), 0)


def test_jdv_success_implies_exact():
    succeeded = 0
    for wsch, period, tau in corpus(150, seed=11):
        traffic = TrafficSpec(period, tau, 400)
        try:
            f = derive_factors(traffic, SlotGrid(wsch), method="jdv")
        except DerivationFailure:
            continue
        succeeded += 1
        assert slot_indices(f, 400) == expand_reference_schedule(traffic, f.grid)
    assert succeeded > 0


def test_exact_positions_empty_for_aligned():
    assert exact_initial_positions(TrafficSpec(142), SlotGrid(71), derive_alignment_chain(0, 71)) == []
