"""Synthetic balancing-authority telemetry with known droop ground truth.

Each minute is sampled at the quasi steady state of the area droop

    f = alpha * f_ref - sigma * p_g

where ``f_ref`` is the area governor reference that AGC moves and ``p_g``
carries the constant offset ``-nominal_hz * D_area``. That offset makes the
droop plane pass through the origin in absolute Hz, which is what the
no-intercept calibration assumes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Sequence

import numpy as np

from .errors import InvalidSpec, ScheduleMismatch
from .gtg import AreaDroop, GtgParams, aggregate_area
from .timeseries import (
    MINUTE_S,
    TimeSeries,
    Unit,
    zero_order_hold,
)

DEFAULT_START = datetime(2017, 10, 14, tzinfo=timezone.utc)
AGC_GAIN = 1.0


@dataclass(frozen=True)
class LoadModel:
    """Load deviation process: ``constant`` (zero), ``random_walk`` or ``ar1``."""

    kind: str = "constant"
    step_mw: float = 0.0
    rho: float = 0.0
    noise_mw: float = 0.0

    @classmethod
    def constant(cls) -> "LoadModel":
        return cls("constant")

    @classmethod
    def random_walk(cls, step_mw: float) -> "LoadModel":
        return cls("random_walk", step_mw=step_mw)

    @classmethod
    def ar1(cls, rho: float, noise_mw: float) -> "LoadModel":
        return cls("ar1", rho=rho, noise_mw=noise_mw)

    def validate(self) -> None:
        if self.kind not in ("constant", "random_walk", "ar1"):
            raise InvalidSpec(f"unknown load model {self.kind!r}")
        if not (0.0 <= self.rho < 1.0):
            raise InvalidSpec(f"rho must lie in [0, 1), got {self.rho}")
        if self.step_mw < 0 or self.noise_mw < 0:
            raise InvalidSpec("load model step and noise must be nonnegative")

    def sample(self, rng: np.random.Generator, minutes: int) -> np.ndarray:
        if self.kind == "constant":
            return np.zeros(minutes)
        shocks = rng.standard_normal(minutes)
        if self.kind == "random_walk":
            return np.cumsum(self.step_mw * shocks)
        out = np.empty(minutes)
        prev = 0.0
        for k in range(minutes):
            prev = self.rho * prev + self.noise_mw * shocks[k]
            out[k] = prev
        return out


@dataclass(frozen=True)
class InterchangeModel:
    """Unscheduled interchange NAI - NSI: ``zero`` or an ``exogenous`` MW series."""

    kind: str = "zero"
    series: tuple[float, ...] = field(default=(), repr=False)

    @classmethod
    def zero(cls) -> "InterchangeModel":
        return cls("zero")

    @classmethod
    def exogenous(cls, series: Sequence[float] | np.ndarray) -> "InterchangeModel":
        return cls("exogenous", tuple(float(x) for x in np.asarray(series, dtype=float)))

    def validate(self) -> None:
        if self.kind not in ("zero", "exogenous"):
            raise InvalidSpec(f"unknown interchange model {self.kind!r}")
        if self.kind == "exogenous" and not all(math.isfinite(x) for x in self.series):
            raise InvalidSpec("exogenous interchange must be finite")

    def sample(self, minutes: int) -> np.ndarray:
        if self.kind == "zero":
            return np.zeros(minutes)
        if len(self.series) != minutes:
            raise ScheduleMismatch(f"exogenous interchange has {len(self.series)} samples, expected {minutes}")
        return np.array(self.series, dtype=np.float64)


@dataclass(frozen=True)
class BiasSchedule:
    """True area bias over time, in MW/Hz.

    ``piecewise``: ``steps`` is a sequence of ``(start_minute, beta)``;
    the first step must start at minute 0.
    ``sinusoidal``: ``mean + amplitude * sin(2 pi (k / period_minutes) + phase)``.
    """

    kind: str = "piecewise"
    steps: tuple[tuple[int, float], ...] = ()
    mean: float = 0.0
    amplitude: float = 0.0
    period_minutes: float = 1440.0
    phase: float = 0.0

    @classmethod
    def constant(cls, beta: float) -> "BiasSchedule":
        return cls("piecewise", steps=((0, float(beta)),))

    @classmethod
    def piecewise(cls, steps: Sequence[tuple[int, float]]) -> "BiasSchedule":
        return cls("piecewise", steps=tuple((int(k), float(b)) for k, b in steps))

    @classmethod
    def sinusoidal(cls, mean: float, amplitude: float, period_minutes: float = 1440.0, phase: float = 0.0) -> "BiasSchedule":
        return cls("sinusoidal", mean=mean, amplitude=amplitude, period_minutes=period_minutes, phase=phase)

    def validate(self) -> None:
        if self.kind == "piecewise":
            if not self.steps or self.steps[0][0] != 0:
                raise InvalidSpec("piecewise bias schedule must start at minute 0")
            starts = [k for k, _ in self.steps]
            if any(b <= a for a, b in zip(starts, starts[1:])):
                raise InvalidSpec("piecewise bias breakpoints must be strictly increasing")
            if any(not (b > 0 and math.isfinite(b)) for _, b in self.steps):
                raise InvalidSpec("bias values must be positive and finite")
        elif self.kind == "sinusoidal":
            if not self.period_minutes > 0:
                raise InvalidSpec("sinusoid period must be positive")
            if not self.mean - abs(self.amplitude) > 0:
                raise InvalidSpec("sinusoidal bias must stay positive")
        else:
            raise InvalidSpec(f"unknown bias schedule {self.kind!r}")

    def values(self, minutes: int) -> np.ndarray:
        k = np.arange(minutes)
        if self.kind == "sinusoidal":
            return self.mean + self.amplitude * np.sin(2.0 * np.pi * k / self.period_minutes + self.phase)
        out = np.empty(minutes)
        for i, (start, beta) in enumerate(self.steps):
            stop = self.steps[i + 1][0] if i + 1 < len(self.steps) else minutes
            out[start:stop] = beta
        return out


@dataclass(frozen=True)
class DisturbanceSpec:
    seed: int = 0
    load_model: LoadModel = field(default_factory=LoadModel)
    interchange_model: InterchangeModel = field(default_factory=InterchangeModel)
    bias_schedule: BiasSchedule | None = None
    load_base_mw: float = 30000.0
    nsi_mw: float = 0.0
    start_time: datetime = DEFAULT_START

    def validate(self) -> None:
        self.load_model.validate()
        self.interchange_model.validate()
        if self.bias_schedule is not None:
            self.bias_schedule.validate()
        if not (math.isfinite(self.load_base_mw) and math.isfinite(self.nsi_mw)):
            raise InvalidSpec("load base and NSI must be finite")


@dataclass(frozen=True)
class SyntheticDataset:
    f: TimeSeries
    f_ref: TimeSeries
    p_g: TimeSeries
    nai: TimeSeries
    nsi: TimeSeries
    p_l_true: TimeSeries
    truth_alpha: np.ndarray = field(repr=False)
    truth_sigma: np.ndarray = field(repr=False)
    truth_beta: np.ndarray = field(repr=False)
    load_base_mw: float = 0.0

    def __len__(self) -> int:
        return len(self.f)

    @property
    def start_time(self) -> datetime:
        return self.f.start_time

    @property
    def delta_interchange(self) -> TimeSeries:
        return self.nai.with_values(self.nai.values - self.nsi.values)

    @property
    def load_deviation_true(self) -> np.ndarray:
        return self.p_l_true.values - self.load_base_mw

    def recorded_ace_f(self, beta_mw_per_hz: float | np.ndarray | None = None) -> TimeSeries:
        """Frequency part of ACE, ``-beta * (f - f_ref)``; default bias is the truth."""
        beta = self.truth_beta if beta_mw_per_hz is None else beta_mw_per_hz
        return self.f.with_values(-np.asarray(beta) * (self.f.values - self.f_ref.values), Unit.MW)

    def droop_residual(self) -> np.ndarray:
        return self.f.values - (self.truth_alpha * self.f_ref.values - self.truth_sigma * self.p_g.values)


def _resolve_area(area: AreaDroop | Sequence[GtgParams]) -> AreaDroop:
    if isinstance(area, AreaDroop):
        return area
    return aggregate_area(list(area))


def _minute_schedule(nsi: TimeSeries | float, start: datetime, minutes: int) -> np.ndarray:
    if isinstance(nsi, TimeSeries):
        s = nsi if nsi.period_s == MINUTE_S else zero_order_hold(nsi, MINUTE_S)
        if len(s) != minutes or s.start_time != start:
            raise ScheduleMismatch(
                f"NSI schedule covers {len(s)} minutes from {s.start_time.isoformat()}, "
                f"expected {minutes} from {start.isoformat()}"
            )
        return s.values.copy()
    return np.full(minutes, float(nsi))


def _simulate(
    area: AreaDroop,
    spec: DisturbanceSpec,
    minutes: int,
    agc_enabled: bool,
    nsi: np.ndarray,
    nai: np.ndarray,
    load_dev: np.ndarray,
) -> SyntheticDataset:
    nominal = area.nominal_hz
    damping = area.damping_mw_per_hz
    if spec.bias_schedule is None:
        beta = np.full(minutes, area.beta.mw_per_hz)
    else:
        beta = spec.bias_schedule.values(minutes)
    sigma = 1.0 / beta
    alpha = 1.0 - sigma * damping

    # generation deviation supplies load deviation plus unscheduled export
    d_gen = load_dev + (nai - nsi)
    d_ref = np.zeros(minutes)
    for k in range(minutes - 1):
        d_f = alpha[k] * d_ref[k] - sigma[k] * d_gen[k]
        d_ref[k + 1] = d_ref[k] - AGC_GAIN * d_f / alpha[k] if agc_enabled else 0.0

    f_ref = nominal + d_ref
    p_g = -nominal * damping + d_gen
    f = alpha * f_ref - sigma * p_g

    def ts(values: np.ndarray, unit: Unit) -> TimeSeries:
        return TimeSeries(spec.start_time, MINUTE_S, values, unit)

    frozen = []
    for arr in (alpha, sigma, beta):
        arr = np.array(arr, dtype=np.float64)
        arr.setflags(write=False)
        frozen.append(arr)
    return SyntheticDataset(
        f=ts(f, Unit.HZ),
        f_ref=ts(f_ref, Unit.HZ),
        p_g=ts(p_g, Unit.MW),
        nai=ts(nai, Unit.MW),
        nsi=ts(nsi, Unit.MW),
        p_l_true=ts(spec.load_base_mw + load_dev, Unit.MW),
        truth_alpha=frozen[0],
        truth_sigma=frozen[1],
        truth_beta=frozen[2],
        load_base_mw=spec.load_base_mw,
    )


def simulate_ba(
    area: AreaDroop | Sequence[GtgParams],
    spec: DisturbanceSpec,
    minutes: int,
    agc_enabled: bool = True,
    nsi: TimeSeries | float | None = None,
) -> SyntheticDataset:
    """Simulate ``minutes`` of one balancing area.

    With AGC on, the area reference is corrected once per minute by the
    proportional law ``d_ref += -gain * d_f / alpha`` (gain 1), which
    cancels the previous minute's frequency deviation from nominal.
    ``nsi`` defaults to ``spec.nsi_mw`` held constant.
    """
    if minutes < 2:
        raise InvalidSpec(f"minutes must be >= 2, got {minutes}")
    spec.validate()
    area = _resolve_area(area)
    rng = np.random.default_rng(spec.seed)
    load_dev = spec.load_model.sample(rng, minutes)
    d_interchange = spec.interchange_model.sample(minutes)
    nsi_arr = _minute_schedule(spec.nsi_mw if nsi is None else nsi, spec.start_time, minutes)
    return _simulate(area, spec, minutes, agc_enabled, nsi_arr, nsi_arr + d_interchange, load_dev)


def two_area_interchange(
    area_a: AreaDroop | Sequence[GtgParams],
    spec_a: DisturbanceSpec,
    area_b: AreaDroop | Sequence[GtgParams],
    spec_b: DisturbanceSpec,
    schedule_nsi: TimeSeries,
    agc_enabled: bool = True,
) -> tuple[SyntheticDataset, SyntheticDataset]:
    """Two areas tied by one interchange path.

    ``schedule_nsi`` is area A's scheduled export; area B's is its negation.
    The unscheduled flow comes from ``spec_a.interchange_model`` and B sees
    the mirror image, so ``nai_A + nai_B == 0`` exactly.
    """
    spec_a.validate()
    spec_b.validate()
    if spec_b.interchange_model.kind != "zero":
        raise InvalidSpec("area B interchange is implied by area A; use InterchangeModel.zero() for spec_b")
    if spec_a.start_time != spec_b.start_time:
        raise ScheduleMismatch("both areas must share a start time")
    minute_nsi = schedule_nsi if schedule_nsi.period_s == MINUTE_S else zero_order_hold(schedule_nsi, MINUTE_S)
    minutes = len(minute_nsi)
    if minutes < 2:
        raise InvalidSpec("schedule must cover at least two minutes")
    nsi_a = _minute_schedule(minute_nsi, spec_a.start_time, minutes)
    d_a = spec_a.interchange_model.sample(minutes)
    nai_a = nsi_a + d_a
    nsi_b = -nsi_a
    nai_b = -nai_a

    area_a = _resolve_area(area_a)
    area_b = _resolve_area(area_b)
    load_a = spec_a.load_model.sample(np.random.default_rng(spec_a.seed), minutes)
    load_b = spec_b.load_model.sample(np.random.default_rng(spec_b.seed), minutes)
    ds_a = _simulate(area_a, spec_a, minutes, agc_enabled, nsi_a, nai_a, load_a)
    ds_b = _simulate(area_b, spec_b, minutes, agc_enabled, nsi_b, nai_b, load_b)
    return ds_a, ds_b


def ar1_series(seed: int, minutes: int, rho: float = 0.9, noise_mw: float = 10.0) -> np.ndarray:
    """Seeded AR(1) sample, handy as an exogenous interchange deviation."""
    model = LoadModel.ar1(rho, noise_mw)
    model.validate()
    return model.sample(np.random.default_rng(seed), minutes)
