"""Rolling least-squares calibration of the area droop ``f = alpha f_ref - sigma p``.

The fit has no intercept: the regressors are exactly ``[f_ref, -p]``. Each
window is solved through its 2x2 normal equations with an explicit
determinant check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import CollinearRegressors, SeriesTooShort, UnitMismatch, ZeroSigma
from .timeseries import BiasValue, TimeSeries, Unit, Window, check_aligned

_EPS = np.finfo(np.float64).eps
# det / (S11 * S22) at or below this is treated as exactly singular
SINGULAR_RTOL = 4.0 * _EPS


@dataclass(frozen=True)
class EstimatorConfig:
    window_minutes: int = 60
    stride_minutes: int = 1
    condition_threshold: float = 1e8
    min_regressor_variance: float = 1e-12

    def __post_init__(self) -> None:
        if self.window_minutes < 2:
            raise ValueError(f"window_minutes must be >= 2, got {self.window_minutes}")
        if self.stride_minutes < 1:
            raise ValueError(f"stride_minutes must be >= 1, got {self.stride_minutes}")
        if not self.condition_threshold >= 1:
            raise ValueError("condition_threshold must be >= 1")
        if self.min_regressor_variance < 0:
            raise ValueError("min_regressor_variance must be nonnegative")


@dataclass(frozen=True)
class DroopEstimate:
    """Fit of one window; ``minute_index`` is the window's last sample.

    ``condition_number`` belongs to the column-equilibrated normal matrix,
    so it does not depend on the units of either regressor.
    """

    minute_index: int
    alpha: float
    sigma: float
    beta: BiasValue
    window: Window
    r_squared: float
    condition_number: float
    residual_rms: float
    ill_conditioned: bool
    carried_forward: bool = field(default=False)


def beta_from_sigma(sigma: float) -> BiasValue:
    """Area bias ``1/sigma`` in MW/Hz for a droop slope in Hz/MW."""
    if sigma == 0:
        raise ZeroSigma("sigma is zero; the bias is unbounded")
    return BiasValue(1.0 / sigma, Unit.MW_PER_HZ)


def _beta_or_sentinel(sigma: float) -> BiasValue:
    if sigma == 0:
        return BiasValue(math.inf, Unit.MW_PER_HZ)
    if math.isnan(sigma):
        return BiasValue(math.nan, Unit.MW_PER_HZ)
    return beta_from_sigma(sigma)


def _check_inputs(f: TimeSeries, f_ref: TimeSeries, p: TimeSeries) -> None:
    check_aligned(f, f_ref, p)
    if f.unit != Unit.HZ or f_ref.unit != Unit.HZ:
        raise UnitMismatch("f and f_ref must be in Hz")
    if p.unit != Unit.MW:
        raise UnitMismatch("p must be in MW")


def _solve(y: np.ndarray, x1: np.ndarray, x2: np.ndarray, min_var: float) -> dict[str, np.ndarray]:
    """Closed-form fit of ``y = c1 x1 + c2 x2`` along the last axis.

    The 2x2 normal equations are eliminated on ``x1`` first; the Schur
    complement ``S22 - S12**2 / S11`` and the matching right-hand side are
    accumulated from the residualized columns instead of from the raw sums,
    which avoids cancellation when the regressors are nearly collinear.
    The determinant is ``S11`` times that complement.
    """
    s11 = np.sum(x1 * x1, axis=-1)
    s22 = np.sum(x2 * x2, axis=-1)
    with np.errstate(divide="ignore", invalid="ignore"):
        g = np.sum(x1 * y, axis=-1) / s11
        c = np.sum(x1 * x2, axis=-1) / s11
        y_r = y - g[..., None] * x1
        x2_r = x2 - c[..., None] * x1
        schur = np.sum(x2_r * x2_r, axis=-1)
        c2 = np.sum(x2_r * y_r, axis=-1) / schur
        c1 = g - c * c2
        # 1 - rho**2 of the equilibrated normal matrix, without cancellation
        q = schur / s22
        rho = np.sqrt(np.clip(1.0 - q, 0.0, 1.0))
        cond = (1.0 + rho) ** 2 / q
    flat = (np.var(x1, axis=-1) < min_var) & (np.var(x2, axis=-1) < min_var)
    singular = ~(s11 > 0) | ~(s22 > 0) | ~(q > SINGULAR_RTOL) | flat
    cond = np.where(singular, np.inf, cond)
    c1 = np.where(singular, np.nan, c1)
    c2 = np.where(singular, np.nan, c2)
    return {"c1": c1, "c2": c2, "cond": cond, "singular": singular}


def _diagnostics(y: np.ndarray, x1: np.ndarray, x2: np.ndarray, c1: np.ndarray, c2: np.ndarray):
    resid = y - c1[..., None] * x1 - c2[..., None] * x2
    ssr = np.sum(resid * resid, axis=-1)
    sst = np.sum((y - y.mean(axis=-1, keepdims=True)) ** 2, axis=-1)
    n = y.shape[-1]
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(sst > 0, 1.0 - ssr / sst, np.where(ssr == 0, 1.0, 0.0))
    r2 = np.clip(r2, 0.0, 1.0)
    r2 = np.where(np.isnan(ssr), np.nan, r2)
    return r2, np.sqrt(ssr / n)


def ols_fit(
    f: TimeSeries,
    f_ref: TimeSeries,
    p: TimeSeries,
    w: Window,
    condition_threshold: float = 1e8,
    min_regressor_variance: float = 1e-12,
) -> DroopEstimate:
    """Least-squares droop ``(alpha, sigma)`` over one window.

    A zero fitted ``sigma`` yields an infinite bias sentinel. Raises
    CollinearRegressors when the normal matrix is numerically singular;
    merely ill-conditioned windows are returned flagged.
    """
    _check_inputs(f, f_ref, p)
    w.check(len(f))
    if w.length < 2:
        raise SeriesTooShort("a droop fit needs at least two samples")
    sl = slice(w.start_index, w.stop)
    y, x1, x2 = f.values[sl], f_ref.values[sl], -p.values[sl]
    sol = _solve(y, x1, x2, min_regressor_variance)
    cond = float(sol["cond"])
    if bool(sol["singular"]):
        raise CollinearRegressors(f"normal matrix is singular over window starting at {w.start_index}")
    alpha = float(sol["c1"])
    sigma = float(sol["c2"])
    r2, rms = _diagnostics(y, x1, x2, sol["c1"], sol["c2"])
    return DroopEstimate(
        minute_index=w.stop - 1,
        alpha=alpha,
        sigma=sigma,
        beta=_beta_or_sentinel(sigma),
        window=w,
        r_squared=float(r2),
        condition_number=cond,
        residual_rms=float(rms),
        ill_conditioned=cond > condition_threshold,
    )


def objective_value(
    f: TimeSeries, f_ref: TimeSeries, p: TimeSeries, w: Window, alpha: float, sigma: float
) -> float:
    """Sum over the window of ``(f - alpha f_ref + sigma p)**2``."""
    check_aligned(f, f_ref, p)
    w.check(len(f))
    sl = slice(w.start_index, w.stop)
    r = f.values[sl] - alpha * f_ref.values[sl] + sigma * p.values[sl]
    return float(np.dot(r, r))


def rolling_estimate(
    f: TimeSeries, f_ref: TimeSeries, p: TimeSeries, cfg: EstimatorConfig = EstimatorConfig()
) -> list[DroopEstimate]:
    """Trailing-window fits, one per stride position.

    The first estimate ends at minute ``window_minutes - 1``. Windows whose
    condition number exceeds the threshold reuse the last well-conditioned
    ``(alpha, sigma)`` and are flagged; before any good window those are NaN.
    """
    _check_inputs(f, f_ref, p)
    n = len(f)
    wlen = cfg.window_minutes
    if n < wlen:
        raise SeriesTooShort(f"series of {n} samples is shorter than the {wlen}-minute window")
    ends = np.arange(wlen - 1, n, cfg.stride_minutes)
    starts = ends - wlen + 1
    y = sliding_window_view(f.values, wlen)[starts]
    x1 = sliding_window_view(f_ref.values, wlen)[starts]
    x2 = -sliding_window_view(p.values, wlen)[starts]
    sol = _solve(y, x1, x2, cfg.min_regressor_variance)
    ill = sol["singular"] | (sol["cond"] > cfg.condition_threshold)

    c1 = sol["c1"].copy()
    c2 = sol["c2"].copy()
    last = (math.nan, math.nan)
    for i in range(len(ends)):
        if ill[i]:
            c1[i], c2[i] = last
        else:
            last = (c1[i], c2[i])
    r2, rms = _diagnostics(y, x1, x2, c1, c2)

    out = []
    for i, end in enumerate(ends):
        sigma = float(c2[i])
        out.append(
            DroopEstimate(
                minute_index=int(end),
                alpha=float(c1[i]),
                sigma=sigma,
                beta=_beta_or_sentinel(sigma),
                window=Window(int(starts[i]), wlen),
                r_squared=float(r2[i]),
                condition_number=float(sol["cond"][i]),
                residual_rms=float(rms[i]),
                ill_conditioned=bool(ill[i]),
                carried_forward=bool(ill[i]),
            )
        )
    return out


def estimates_beta_series(estimates: list[DroopEstimate], length: int, fill: float | None = None) -> np.ndarray:
    """Per-minute bias (MW/Hz) from a stride-1 estimate list.

    Minutes before the first estimate take ``fill`` (default: the first
    estimate's value); later gaps hold the previous estimate.
    """
    out = np.full(length, np.nan)
    for e in estimates:
        if e.minute_index < length:
            out[e.minute_index] = e.beta.mw_per_hz
    first = next((i for i in range(length) if not np.isnan(out[i])), None)
    if first is None:
        raise SeriesTooShort("no estimates cover the requested span")
    out[:first] = out[first] if fill is None else fill
    for i in range(first + 1, length):
        if np.isnan(out[i]):
            out[i] = out[i - 1]
    return out
