"""Recursive periodicity shifting for semi-persistent scheduling."""
from .baselines import AssignmentStream, csps_schedule, psps_schedule
from .errors import (
    DerivationFailure,
    DomainError,
    IncompleteFactors,
    RpsError,
    StabilityViolation,
)
from .kernels import BACKEND
from .rps import (
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
from .simulator import SimStats, SimTrace, run, simulate, summarize
from .timebase import SlotGrid, TrafficSpec, arrival_time, first_slot_at_or_after, slot_start

__version__ = "0.1.0"
