"""Area control error decomposition, load-deviation estimates and inadvertent energy.

Sign convention: bias magnitudes are positive in MW/Hz and the frequency
part of ACE is ``-beta * (f - f_ref)``, so under-frequency calls for
positive regulation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Sequence, Union

import numpy as np

from .errors import ShapeMismatch, UnitMismatch
from .timeseries import (
    BIAS_UNITS,
    BiasValue,
    TimeSeries,
    Unit,
    bias_to_mw_per_hz,
    check_aligned,
    hourly_sum_mwh,
    subtract,
    zero_order_hold,
)

BiasInput = Union[BiasValue, TimeSeries, Sequence[BiasValue], np.ndarray]


@dataclass(frozen=True)
class AceRecord:
    minute_index: int
    ace_f: float
    delta_f_interchange: float
    ace_total: float


@dataclass(frozen=True)
class IeeRecord:
    hour_index: int
    iee_mwh: float
    iee_optimal_mwh: float | None = None


@dataclass(frozen=True)
class LoadDeviationSeries:
    dp_l: TimeSeries
    beta_used: str  # "fixed" or "estimated"


def _bias_array(beta: BiasInput, n: int) -> tuple[np.ndarray, str]:
    """Per-sample bias in MW/Hz plus a fixed/estimated tag."""
    if isinstance(beta, BiasValue):
        return np.full(n, beta.mw_per_hz), "fixed"
    if isinstance(beta, TimeSeries):
        if beta.unit not in BIAS_UNITS:
            raise UnitMismatch(f"bias series must be in MW/Hz or MW/0.1Hz, got {beta.unit.value}")
        arr = bias_to_mw_per_hz(beta.values, beta.unit)
    elif isinstance(beta, np.ndarray):
        arr = np.asarray(beta, dtype=np.float64)
    else:
        arr = np.array([b.mw_per_hz for b in beta], dtype=np.float64)
    if arr.shape != (n,):
        raise ShapeMismatch(f"bias series has {arr.size} samples, expected {n}")
    return arr, "estimated"


def _require(s: TimeSeries, unit: Unit, what: str) -> None:
    if s.unit != unit:
        raise UnitMismatch(f"{what} must be in {unit.value}, got {s.unit.value}")


def interchange_deviation(nai: TimeSeries, nsi: TimeSeries) -> TimeSeries:
    """``NAI - NSI``; an hourly NSI schedule is held across its hour first."""
    _require(nai, Unit.MW, "NAI")
    _require(nsi, Unit.MW, "NSI")
    if nsi.period_s != nai.period_s:
        nsi = zero_order_hold(nsi, nai.period_s)
    check_aligned(nai, nsi)
    return subtract(nai, nsi)


def ace_f_from_bias(beta: BiasInput, delta_f: TimeSeries) -> TimeSeries:
    """Frequency part of ACE in MW from a fixed or per-minute bias."""
    _require(delta_f, Unit.HZ, "delta_f")
    b, _ = _bias_array(beta, len(delta_f))
    return delta_f.with_values(-b * delta_f.values, Unit.MW)


def compose_ace(ace_f: TimeSeries, delta_F: TimeSeries) -> list[AceRecord]:
    _require(ace_f, Unit.MW, "ace_f")
    _require(delta_F, Unit.MW, "delta_F")
    check_aligned(ace_f, delta_F)
    total = ace_f.values + delta_F.values
    return [
        AceRecord(k, float(a), float(d), float(t))
        for k, (a, d, t) in enumerate(zip(ace_f.values, delta_F.values, total))
    ]


def estimate_load_deviation(beta_series: BiasInput, delta_f: TimeSeries) -> LoadDeviationSeries:
    """Load deviation ``-beta * delta_f`` in MW.

    A bias quoted in MW/0.1Hz is converted first, which is where the factor
    of ten in ``-10 beta delta_f`` goes.
    """
    _require(delta_f, Unit.HZ, "delta_f")
    b, tag = _bias_array(beta_series, len(delta_f))
    return LoadDeviationSeries(delta_f.with_values(-b * delta_f.values, Unit.MW), tag)


def iee_hourly(nai: TimeSeries, nsi: TimeSeries) -> list[IeeRecord]:
    """Hourly inadvertent energy (MWh) of ``NAI - NSI``."""
    hourly = hourly_sum_mwh(interchange_deviation(nai, nsi))
    return [IeeRecord(h, float(v)) for h, v in enumerate(hourly.values)]


def _interchange_part(dataset: Any) -> TimeSeries:
    nsi = getattr(dataset, "nsi", None)
    if nsi is not None:
        return interchange_deviation(dataset.nai, nsi)
    return dataset.delta_t


def iee_compare(dataset: Any, fixed_beta: BiasValue, estimated_beta: BiasInput) -> list[IeeRecord]:
    """Hourly IEE as recorded vs. with ACE_f recomputed from ``estimated_beta``.

    The recorded ACE is taken as ``ACE_f(fixed) + dF``. Holding it fixed and
    swapping in the estimated bias moves the difference
    ``ACE_f(fixed) - ACE_f(estimated)`` into the interchange part, which is
    then integrated per hour. ``dataset`` needs ``f``, ``f_ref``, ``nai`` and
    either ``nsi`` or ``delta_t``.
    """
    d_interchange = _interchange_part(dataset)
    delta_f = subtract(dataset.f, dataset.f_ref)
    ace_fixed = ace_f_from_bias(fixed_beta, delta_f)
    ace_est = ace_f_from_bias(estimated_beta, delta_f)
    shifted = d_interchange.with_values(d_interchange.values + (ace_fixed.values - ace_est.values))
    recorded = hourly_sum_mwh(d_interchange)
    optimal = hourly_sum_mwh(shifted)
    return [
        IeeRecord(h, float(a), float(b)) for h, (a, b) in enumerate(zip(recorded.values, optimal.values))
    ]
