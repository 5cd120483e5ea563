"""Integer time arithmetic for the slot grid and periodic traffic.

Every time value is a plain ``int`` counting ticks of one base unit
(1 µs by default, 1 ns when finer grids are needed). Nothing in the
package converts a time to float.
"""
from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, InvalidOperation

from .errors import DomainError, StabilityViolation

TimeQuantum = int

#: ticks per microsecond for each supported base unit
UNITS = {"us": 1, "ns": 1000}


def to_ticks(value_us, unit: str = "us") -> TimeQuantum:
    """Convert a microsecond quantity (int, str or Decimal) to integer ticks.

    Raises DomainError when the value is not representable exactly.
    """
    try:
        scale = UNITS[unit]
    except KeyError:
        raise DomainError(f"unknown time unit {unit!r}") from None
    try:
        ticks = Decimal(str(value_us)) * scale
    except InvalidOperation:
        raise DomainError(f"not a number: {value_us!r}") from None
    if ticks != ticks.to_integral_value():
        raise DomainError(f"{value_us} us is not a whole number of {unit}")
    return int(ticks)


def format_us(ticks: int, unit: str = "us") -> str:
    """Render ticks as an exact decimal microsecond string."""
    scale = UNITS[unit]
    if scale == 1:
        return str(ticks)
    return _plain(Decimal(ticks) / scale)


def _plain(d: Decimal) -> str:
    s = format(d, "f")
    if "." in s:
        s = s.rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


@dataclass(frozen=True)
class SlotGrid:
    """Slot ``i`` (1-based) covers ``[tau0 + (i-1)*wsch, tau0 + i*wsch)``."""

    wsch: TimeQuantum
    tau0: TimeQuantum = 0

    def __post_init__(self):
        if self.wsch <= 0:
            raise DomainError(f"slot width must be positive, got {self.wsch}")


@dataclass(frozen=True)
class TrafficSpec:
    """Periodic traffic: packet ``m`` arrives at ``tau_trff + (m-1)*p_trff``."""

    p_trff: TimeQuantum
    tau_trff: TimeQuantum = 0
    m_total: int = 200

    def __post_init__(self):
        if self.p_trff <= 0:
            raise DomainError(f"traffic period must be positive, got {self.p_trff}")
        if self.m_total < 0:
            raise DomainError(f"packet count must be non-negative, got {self.m_total}")

    def check_on(self, grid: SlotGrid) -> None:
        """Raise unless this traffic can be scheduled on ``grid``."""
        if self.p_trff < grid.wsch:
            raise StabilityViolation(
                f"traffic period {self.p_trff} is shorter than slot width {grid.wsch}"
            )
        if self.tau_trff < grid.tau0:
            raise DomainError(
                f"traffic starts at {self.tau_trff}, before grid origin {grid.tau0}"
            )


def slot_start(i: int, grid: SlotGrid) -> TimeQuantum:
    if i < 1:
        raise DomainError(f"slot index must be >= 1, got {i}")
    return grid.tau0 + (i - 1) * grid.wsch


def arrival_time(m: int, traffic: TrafficSpec) -> TimeQuantum:
    if not 1 <= m <= traffic.m_total:
        raise DomainError(f"packet index {m} outside 1..{traffic.m_total}")
    return traffic.tau_trff + (m - 1) * traffic.p_trff


def first_slot_at_or_after(t: TimeQuantum, grid: SlotGrid) -> int:
    """Index of the earliest slot whose start is not before ``t``.

    This is the ideal (greedy) scheduler: a packet arriving at ``t`` is
    served at the very next slot boundary, or at ``t`` itself when the
    arrival lands exactly on one.
    """
    if t < grid.tau0:
        raise DomainError(f"time {t} precedes grid origin {grid.tau0}")
    return ceil_div(t - grid.tau0, grid.wsch) + 1
