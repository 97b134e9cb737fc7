"""Uniformly sampled time series, windows, and bias units."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    EmptySeries,
    NonFiniteValue,
    NonPositivePeriod,
    OutOfBounds,
    PartialHour,
    PeriodMismatch,
    ShapeMismatch,
    UnitMismatch,
    UnsupportedUnit,
)

MINUTE_S = 60.0
HOUR_S = 3600.0
MINUTES_PER_HOUR = 60
MINUTES_PER_DAY = 1440


class Unit(str, enum.Enum):
    MW = "MW"
    HZ = "Hz"
    MW_PER_HZ = "MW_per_Hz"
    MW_PER_0P1HZ = "MW_per_0p1Hz"
    MWH = "MWh"
    DIMENSIONLESS = "dimensionless"


BIAS_UNITS = (Unit.MW_PER_HZ, Unit.MW_PER_0P1HZ)

# beta [MW/Hz] = 10 * b [MW/0.1Hz]
BIAS_UNIT_FACTOR = 10.0


def utc(ts: datetime) -> datetime:
    """Return ``ts`` as an aware UTC datetime (naive input is taken as UTC)."""
    if ts.tzinfo is None:
        return ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


@dataclass(frozen=True)
class TimeSeries:
    """Immutable, uniformly sampled series of finite values with a unit tag.

    ``values`` is stored as a read-only float64 array.
    """

    start_time: datetime
    period_s: float
    values: np.ndarray = field(repr=False)
    unit: Unit

    def __post_init__(self) -> None:
        if not (self.period_s > 0) or not math.isfinite(self.period_s):
            raise NonPositivePeriod(f"period_s must be positive, got {self.period_s!r}")
        v = np.array(self.values, dtype=np.float64, copy=True).reshape(-1)
        if v.size == 0:
            raise EmptySeries()
        bad = np.flatnonzero(~np.isfinite(v))
        if bad.size:
            raise NonFiniteValue(int(bad[0]))
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "period_s", float(self.period_s))
        object.__setattr__(self, "start_time", utc(self.start_time))
        object.__setattr__(self, "unit", Unit(self.unit))

    def __len__(self) -> int:
        return int(self.values.size)

    @property
    def duration_s(self) -> float:
        return len(self) * self.period_s

    def time_at(self, index: int) -> datetime:
        return self.start_time + timedelta(seconds=index * self.period_s)

    def timestamps(self) -> list[datetime]:
        return [self.time_at(i) for i in range(len(self))]

    def with_values(self, values: Iterable[float], unit: Unit | None = None) -> "TimeSeries":
        """Same time base, new values (and optionally a new unit)."""
        return TimeSeries(self.start_time, self.period_s, np.asarray(values), unit or self.unit)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TimeSeries):
            return NotImplemented
        return (
            self.start_time == other.start_time
            and self.period_s == other.period_s
            and self.unit == other.unit
            and self.values.shape == other.values.shape
            and bool(np.array_equal(self.values, other.values))
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(frozen=True)
class Window:
    start_index: int
    length: int

    def __post_init__(self) -> None:
        if self.start_index < 0:
            raise OutOfBounds(f"start_index must be >= 0, got {self.start_index}")
        if self.length < 1:
            raise OutOfBounds(f"window length must be >= 1, got {self.length}")

    @property
    def stop(self) -> int:
        return self.start_index + self.length

    def check(self, n: int) -> None:
        if self.stop > n:
            raise OutOfBounds(
                f"window [{self.start_index}, {self.stop}) exceeds series length {n}"
            )


@dataclass(frozen=True)
class BiasValue:
    """Frequency bias magnitude in MW/Hz or MW/0.1Hz."""

    magnitude: float
    unit: Unit = Unit.MW_PER_HZ

    def __post_init__(self) -> None:
        unit = Unit(self.unit)
        if unit not in BIAS_UNITS:
            raise UnsupportedUnit(f"bias unit must be one of {[u.value for u in BIAS_UNITS]}, got {unit.value}")
        object.__setattr__(self, "unit", unit)
        object.__setattr__(self, "magnitude", float(self.magnitude))

    @property
    def mw_per_hz(self) -> float:
        return convert_bias(self, Unit.MW_PER_HZ).magnitude

    @property
    def mw_per_0p1hz(self) -> float:
        return convert_bias(self, Unit.MW_PER_0P1HZ).magnitude


def make_series(
    start: datetime, period_s: float, values: Sequence[float] | np.ndarray, unit: Unit | str
) -> TimeSeries:
    """Build a validated :class:`TimeSeries`.

    Raises NonFiniteValue, EmptySeries or NonPositivePeriod.
    """
    return TimeSeries(start, period_s, np.asarray(values, dtype=np.float64), Unit(unit))


def _check_aligned(a: TimeSeries, b: TimeSeries) -> None:
    if len(a) != len(b):
        raise ShapeMismatch(f"length {len(a)} != {len(b)}")
    if a.period_s != b.period_s:
        raise ShapeMismatch(f"period {a.period_s} != {b.period_s}")
    if a.start_time != b.start_time:
        raise ShapeMismatch(f"start {a.start_time.isoformat()} != {b.start_time.isoformat()}")


def check_aligned(*series: TimeSeries) -> None:
    """Raise ShapeMismatch unless all series share start, period and length."""
    for s in series[1:]:
        _check_aligned(series[0], s)


def subtract(a: TimeSeries, b: TimeSeries) -> TimeSeries:
    """Elementwise ``a - b``; series must be aligned and share a unit."""
    _check_aligned(a, b)
    if a.unit != b.unit:
        raise UnitMismatch(f"{a.unit.value} vs {b.unit.value}")
    return a.with_values(a.values - b.values)


def hourly_sum_mwh(s: TimeSeries) -> TimeSeries:
    """Integrate a minute MW series to hourly energy in MWh."""
    if s.period_s != MINUTE_S:
        raise PeriodMismatch(f"expected 60 s sampling, got {s.period_s} s")
    if s.unit != Unit.MW:
        raise UnitMismatch(f"expected MW, got {s.unit.value}")
    if len(s) % MINUTES_PER_HOUR:
        raise PartialHour(f"length {len(s)} is not a whole number of hours")
    rows = s.values.reshape(-1, MINUTES_PER_HOUR)
    # summing offsets from each hour's first sample keeps a constant hour exact
    base = rows[:, 0]
    hourly = base + (rows - base[:, None]).sum(axis=1) / MINUTES_PER_HOUR
    return TimeSeries(s.start_time, HOUR_S, hourly, Unit.MWH)


def slice_series(s: TimeSeries, w: Window) -> TimeSeries:
    """Contiguous sub-series covered by ``w``; start time shifts accordingly."""
    w.check(len(s))
    return TimeSeries(s.time_at(w.start_index), s.period_s, s.values[w.start_index : w.stop], s.unit)


def zero_order_hold(s: TimeSeries, period_s: float) -> TimeSeries:
    """Resample a coarse series to a finer period by holding each value."""
    ratio = s.period_s / period_s
    reps = int(round(ratio))
    if reps < 1 or abs(ratio - reps) > 1e-9:
        raise PeriodMismatch(f"{s.period_s} s is not a whole multiple of {period_s} s")
    return TimeSeries(s.start_time, period_s, np.repeat(s.values, reps), s.unit)


def convert_bias(v: BiasValue, target_unit: Unit | str) -> BiasValue:
    """Convert a bias between MW/Hz and MW/0.1Hz (factor exactly 10)."""
    try:
        target = Unit(target_unit)
    except ValueError as exc:
        raise UnsupportedUnit(str(exc)) from None
    if target not in BIAS_UNITS:
        raise UnsupportedUnit(f"cannot express a bias in {target.value}")
    if target == v.unit:
        return v
    if target == Unit.MW_PER_HZ:
        return BiasValue(v.magnitude * BIAS_UNIT_FACTOR, target)
    return BiasValue(v.magnitude / BIAS_UNIT_FACTOR, target)


def bias_to_mw_per_hz(values: np.ndarray | Sequence[float], unit: Unit | str) -> np.ndarray:
    """Vectorised bias conversion to MW/Hz."""
    unit = Unit(unit)
    arr = np.asarray(values, dtype=np.float64)
    if unit == Unit.MW_PER_HZ:
        return arr
    if unit == Unit.MW_PER_0P1HZ:
        return arr * BIAS_UNIT_FACTOR
    raise UnitMismatch(f"expected a bias unit, got {unit.value}")
