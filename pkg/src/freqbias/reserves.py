"""Hourly regulation-reserve envelopes, their tightening, costs and band compliance."""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass
from datetime import datetime, timedelta
from decimal import ROUND_HALF_EVEN, Decimal

import numpy as np

from .errors import BadQuantile, NegativeInput, PartialHour, PeriodMismatch, UnitMismatch
from .timeseries import MINUTE_S, MINUTES_PER_HOUR, TimeSeries, Unit, check_aligned

CENT = Decimal("0.01")


@dataclass(frozen=True)
class ReserveEnvelope:
    hour_index: int
    reg_up_mw: float
    reg_down_mw: float
    basis: str
    quantile: float


@dataclass(frozen=True)
class CostModel:
    price_up: float = 10.0
    price_down: float = 10.0
    hours: float = 720.0

    def __post_init__(self) -> None:
        if min(self.price_up, self.price_down, self.hours) < 0:
            raise NegativeInput("prices and hours must be nonnegative")


@dataclass(frozen=True)
class BandSpec:
    nominal_hz: float = 60.0
    half_width_hz: float = 0.036

    def __post_init__(self) -> None:
        if not self.half_width_hz > 0:
            raise ValueError("half_width_hz must be positive")


@dataclass(frozen=True)
class Tightening:
    per_hour_mw: tuple[float, ...]
    average_mw: float


def _hours(series: TimeSeries) -> np.ndarray:
    if series.period_s != MINUTE_S:
        raise PeriodMismatch(f"expected minute samples, got {series.period_s} s")
    if series.unit != Unit.MW:
        raise UnitMismatch(f"expected MW, got {series.unit.value}")
    if len(series) % MINUTES_PER_HOUR:
        raise PartialHour(f"{len(series)} samples is not a whole number of hours")
    return series.values.reshape(-1, MINUTES_PER_HOUR)


def _side(values: np.ndarray, q: float) -> float:
    # 'higher' picks an observed sample, so the bound is never interpolated below data
    if values.size == 0:
        return 0.0
    return max(0.0, float(np.quantile(values, q, method="higher")))


def reserve_envelope(series: TimeSeries, quantile: float = 1.0, basis: str = "dp_l") -> list[ReserveEnvelope]:
    """Per-hour regulation-up/down bounds at ``quantile``.

    Up is the quantile of the hour's positive samples, down that of the
    magnitudes of its negative samples; quantile 1.0 gives the hourly
    extremes.
    """
    if not (0.5 < quantile <= 1.0):
        raise BadQuantile(f"quantile must lie in (0.5, 1.0], got {quantile!r}")
    out = []
    for h, row in enumerate(_hours(series)):
        up = _side(row[row > 0], quantile)
        down = _side(-row[row < 0], quantile)
        out.append(ReserveEnvelope(h, up, down, basis, quantile))
    return out


def envelope_tightening(with_interchange: TimeSeries, without_interchange: TimeSeries, quantile: float = 1.0) -> Tightening:
    """Reduction of hourly (up + down) reserve when interchange spill is removed."""
    check_aligned(with_interchange, without_interchange)
    wide = reserve_envelope(with_interchange, quantile, basis="ace")
    tight = reserve_envelope(without_interchange, quantile, basis="ace")
    deltas = tuple(
        (a.reg_up_mw + a.reg_down_mw) - (b.reg_up_mw + b.reg_down_mw) for a, b in zip(wide, tight)
    )
    return Tightening(deltas, float(np.mean(deltas)))


def cost_savings(avg_mw: float, model: CostModel) -> Decimal:
    """Dollars saved by holding ``avg_mw`` less of both reserve products.

    Computed as ``avg_mw * (price_up + price_down) * hours`` and rounded
    half-even to cents.
    """
    if avg_mw < 0 or not math.isfinite(avg_mw):
        raise NegativeInput(f"avg_mw must be a nonnegative number, got {avg_mw!r}")
    dollars = avg_mw * (model.price_up + model.price_down) * model.hours
    return Decimal(repr(dollars)).quantize(CENT, rounding=ROUND_HALF_EVEN)


def band_compliance(f: TimeSeries, f_ref: TimeSeries, band: BandSpec = BandSpec()) -> float:
    """Fraction of samples with ``|f - f_ref| <= half_width_hz``."""
    check_aligned(f, f_ref)
    dev = np.abs(f.values - f_ref.values)
    return float(np.count_nonzero(dev <= band.half_width_hz)) / len(f)


def envelopes_by_month(envelopes: list[ReserveEnvelope], start_time: datetime) -> dict[str, tuple[float, float]]:
    """Average (reg_up, reg_down) per calendar month, keyed ``YYYY-MM``.

    Hour ``h`` of the envelope list is taken to start ``h`` hours after
    ``start_time``.
    """
    acc: dict[str, list[tuple[float, float]]] = defaultdict(list)
    for e in envelopes:
        t = start_time + timedelta(hours=e.hour_index)
        acc[f"{t.year:04d}-{t.month:02d}"].append((e.reg_up_mw, e.reg_down_mw))
    return {k: (float(np.mean([u for u, _ in v])), float(np.mean([d for _, d in v]))) for k, v in sorted(acc.items())}
