"""Run configuration and end-to-end report generation."""
from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from .ace import ace_f_from_bias, compose_ace, estimate_load_deviation, iee_compare, interchange_deviation
from .csvio import GAP_POLICIES, Telemetry, emit_plot_data, fmt9, write_rows
from .errors import ConfigError
from .estimator import DroopEstimate, EstimatorConfig, estimates_beta_series, rolling_estimate
from .reserves import BandSpec, CostModel, band_compliance, cost_savings, envelope_tightening, reserve_envelope
from .timeseries import BiasValue, TimeSeries, Unit, subtract

ESTIMATE_COLUMNS = (
    "minute",
    "alpha",
    "sigma_hz_per_mw",
    "beta_mw_per_hz",
    "beta_mw_per_0p1hz",
    "r_squared",
    "condition_number",
    "ill_conditioned",
)
ACE_COLUMNS = ("minute", "ace_f_mw", "delta_f_interchange_mw", "ace_total_mw", "ace_f_estimated_mw")
IEE_COLUMNS = ("hour", "iee_mwh", "iee_optimal_mwh")
ENVELOPE_COLUMNS = ("hour", "basis", "quantile", "reg_up_mw", "reg_down_mw")

# SPP's 2017 bias, 409 MW/0.1Hz
DEFAULT_FIXED_BETA = BiasValue(409.0, Unit.MW_PER_0P1HZ)


@dataclass(frozen=True)
class RunConfig:
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    fixed_beta: BiasValue = DEFAULT_FIXED_BETA
    band: BandSpec = field(default_factory=BandSpec)
    cost: CostModel = field(default_factory=CostModel)
    quantile: float = 1.0
    gap_policy: str = "reject"
    flip_interchange_sign: bool = False

    def __post_init__(self) -> None:
        if self.gap_policy not in GAP_POLICIES:
            raise ConfigError(f"gap_policy must be one of {GAP_POLICIES}")
        if not (0.5 < self.quantile <= 1.0):
            raise ConfigError(f"quantile must lie in (0.5, 1.0], got {self.quantile}")


_BETA_UNITS = {"mw_per_hz": Unit.MW_PER_HZ, "mw_per_0p1hz": Unit.MW_PER_0P1HZ}
_BOOL = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}

CONFIG_KEYS = {
    "window_minutes": int,
    "stride_minutes": int,
    "condition_threshold": float,
    "min_regressor_variance": float,
    "fixed_beta": float,
    "beta_unit": str,
    "nominal_hz": float,
    "band_half_width_hz": float,
    "price_up": float,
    "price_down": float,
    "hours": float,
    "quantile": float,
    "gap_policy": str,
    "flip_interchange_sign": str,
}


def parse_config_text(text: str) -> dict[str, Any]:
    """Parse ``key = value`` lines; ``#`` starts a comment, blank lines are skipped."""
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.lower()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            out[key] = CONFIG_KEYS[key](value)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value {value!r} for {key}") from None
    return out


def config_from_mapping(values: dict[str, Any], base: RunConfig | None = None) -> RunConfig:
    """Overlay flat settings on ``base`` (default: all defaults)."""
    cfg = base or RunConfig()
    try:
        est = cfg.estimator
        est = replace(
            est,
            window_minutes=int(values.get("window_minutes", est.window_minutes)),
            stride_minutes=int(values.get("stride_minutes", est.stride_minutes)),
            condition_threshold=float(values.get("condition_threshold", est.condition_threshold)),
            min_regressor_variance=float(values.get("min_regressor_variance", est.min_regressor_variance)),
        )
        beta = cfg.fixed_beta
        if "fixed_beta" in values or "beta_unit" in values:
            unit_key = str(values.get("beta_unit", "mw_per_hz" if beta.unit == Unit.MW_PER_HZ else "mw_per_0p1hz")).lower()
            if unit_key not in _BETA_UNITS:
                raise ConfigError(f"beta_unit must be one of {sorted(_BETA_UNITS)}")
            beta = BiasValue(float(values.get("fixed_beta", beta.magnitude)), _BETA_UNITS[unit_key])
        band = BandSpec(
            float(values.get("nominal_hz", cfg.band.nominal_hz)),
            float(values.get("band_half_width_hz", cfg.band.half_width_hz)),
        )
        cost = CostModel(
            float(values.get("price_up", cfg.cost.price_up)),
            float(values.get("price_down", cfg.cost.price_down)),
            float(values.get("hours", cfg.cost.hours)),
        )
        flip = values.get("flip_interchange_sign", cfg.flip_interchange_sign)
        if isinstance(flip, str):
            if flip.lower() not in _BOOL:
                raise ConfigError(f"flip_interchange_sign must be a boolean, got {flip!r}")
            flip = _BOOL[flip.lower()]
        return RunConfig(
            estimator=est,
            fixed_beta=beta,
            band=band,
            cost=cost,
            quantile=float(values.get("quantile", cfg.quantile)),
            gap_policy=str(values.get("gap_policy", cfg.gap_policy)),
            flip_interchange_sign=bool(flip),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path: str | os.PathLike | None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Config file settings, then ``overrides`` (CLI flags) on top."""
    values: dict[str, Any] = {}
    if path is not None:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        values.update(parse_config_text(text))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return config_from_mapping(values)


# -- report ------------------------------------------------------------------


@dataclass
class ReportBundle:
    out_dir: Path
    files: dict[str, Path]
    summary: dict[str, Any]
    estimates: list[DroopEstimate]


def _clean(x: Any) -> Any:
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return float(fmt9(x)) if math.isfinite(x) else None
    if isinstance(x, dict):
        return {k: _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    return x


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(_clean(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def interchange_part(tel: Telemetry) -> TimeSeries:
    """``NAI - NSI`` when NSI is present, otherwise the recorded ``delta_t`` column."""
    if tel.nsi is not None:
        return interchange_deviation(tel.nai, tel.nsi)
    return tel.delta_t


def estimate_rows(estimates: list[DroopEstimate]):
    for e in estimates:
        yield (
            e.minute_index,
            fmt9(e.alpha),
            fmt9(e.sigma),
            fmt9(e.beta.mw_per_hz),
            fmt9(e.beta.mw_per_0p1hz),
            fmt9(e.r_squared),
            fmt9(e.condition_number),
            int(e.ill_conditioned),
        )


def write_estimates(estimates: list[DroopEstimate], path: Path) -> Path:
    return write_rows(path, ESTIMATE_COLUMNS, estimate_rows(estimates))


def run_estimate(tel: Telemetry, config: RunConfig, out_dir: str | os.PathLike) -> ReportBundle:
    out = Path(out_dir)
    estimates = rolling_estimate(tel.f, tel.f_ref, tel.p_g, config.estimator)
    files = {"estimates": write_estimates(estimates, out / "estimates.csv")}
    summary = _estimate_summary(estimates)
    return ReportBundle(out, files, summary, estimates)


def _estimate_summary(estimates: list[DroopEstimate]) -> dict[str, Any]:
    good = [e for e in estimates if not e.ill_conditioned]
    betas = np.array([e.beta.mw_per_hz for e in good]) if good else np.array([math.nan])
    return {
        "n_estimates": len(estimates),
        "n_ill_conditioned": len(estimates) - len(good),
        "beta_estimate_mean_mw_per_hz": float(np.mean(betas)),
        "beta_estimate_min_mw_per_hz": float(np.min(betas)),
        "beta_estimate_max_mw_per_hz": float(np.max(betas)),
        "alpha_estimate_mean": float(np.mean([e.alpha for e in good])) if good else math.nan,
    }


def run_decompose(tel: Telemetry, config: RunConfig, out_dir: str | os.PathLike,
                  estimates: list[DroopEstimate] | None = None) -> ReportBundle:
    """ACE and IEE tables for fixed vs. estimated bias."""
    out = Path(out_dir)
    if estimates is None:
        estimates = rolling_estimate(tel.f, tel.f_ref, tel.p_g, config.estimator)
    fixed = config.fixed_beta
    beta_est = estimates_beta_series(estimates, len(tel), fill=fixed.mw_per_hz)
    delta_f = subtract(tel.f, tel.f_ref)
    d_int = interchange_part(tel)
    ace_fixed = ace_f_from_bias(fixed, delta_f)
    ace_est = ace_f_from_bias(beta_est, delta_f)
    records = compose_ace(ace_fixed, d_int)
    ace_rows = (
        (r.minute_index, fmt9(r.ace_f), fmt9(r.delta_f_interchange), fmt9(r.ace_total), fmt9(e))
        for r, e in zip(records, ace_est.values)
    )
    files = {"ace": write_rows(out / "ace.csv", ACE_COLUMNS, ace_rows)}

    iee = iee_compare(tel, fixed, beta_est)
    files["iee"] = write_rows(
        out / "iee.csv", IEE_COLUMNS, ((r.hour_index, fmt9(r.iee_mwh), fmt9(r.iee_optimal_mwh)) for r in iee)
    )
    dp_l = estimate_load_deviation(beta_est, delta_f)
    files["plot_beta"] = emit_plot_data(
        {"beta_estimate": beta_est, "beta_fixed": np.full(len(tel), fixed.mw_per_hz)}, out / "plot_beta.csv"
    )
    files["plot_iee"] = emit_plot_data(
        {"iee": [r.iee_mwh for r in iee], "iee_optimal": [r.iee_optimal_mwh for r in iee]},
        out / "plot_iee.csv",
        index_name="hour",
    )
    files["plot_load"] = emit_plot_data(
        {"dp_l_estimated": dp_l.dp_l, "ace_total": [r.ace_total for r in records], "delta_f_interchange": d_int},
        out / "plot_load.csv",
    )
    identity = max(abs(r.ace_total - (r.ace_f + r.delta_f_interchange)) for r in records)
    summary = {
        "fixed_beta_mw_per_hz": fixed.mw_per_hz,
        "ace_identity_max_abs_mw": identity,
        "iee_total_mwh": float(sum(r.iee_mwh for r in iee)),
        "iee_optimal_total_mwh": float(sum(r.iee_optimal_mwh for r in iee)),
        "n_hours": len(iee),
    }
    return ReportBundle(out, files, summary, estimates)


def run_reserves(tel: Telemetry, config: RunConfig, out_dir: str | os.PathLike,
                 estimates: list[DroopEstimate] | None = None) -> ReportBundle:
    """Reserve envelopes on estimated load deviation and on ACE, tightening and savings."""
    out = Path(out_dir)
    if estimates is None:
        estimates = rolling_estimate(tel.f, tel.f_ref, tel.p_g, config.estimator)
    fixed = config.fixed_beta
    beta_est = estimates_beta_series(estimates, len(tel), fill=fixed.mw_per_hz)
    delta_f = subtract(tel.f, tel.f_ref)
    d_int = interchange_part(tel)
    ace_f = ace_f_from_bias(fixed, delta_f)
    ace_total = ace_f.with_values(ace_f.values + d_int.values)
    dp_l = estimate_load_deviation(beta_est, delta_f).dp_l
    q = config.quantile
    env_dpl = reserve_envelope(dp_l, q, basis="dp_l")
    env_ace = reserve_envelope(ace_total, q, basis="ace")
    tight = envelope_tightening(ace_total, ace_f, q)
    savings = cost_savings(max(tight.average_mw, 0.0), config.cost)
    rows = [
        (e.hour_index, e.basis, fmt9(e.quantile), fmt9(e.reg_up_mw), fmt9(e.reg_down_mw))
        for e in env_dpl + env_ace
    ]
    files = {"envelopes": write_rows(out / "envelopes.csv", ENVELOPE_COLUMNS, rows)}
    files["tightening"] = write_rows(
        out / "tightening.csv", ("hour", "tightening_mw"), ((h, fmt9(v)) for h, v in enumerate(tight.per_hour_mw))
    )
    summary = {
        "quantile": q,
        "band_compliance": band_compliance(tel.f, tel.f_ref, config.band),
        "band_half_width_hz": config.band.half_width_hz,
        "reg_up_dp_l_mean_mw": float(np.mean([e.reg_up_mw for e in env_dpl])),
        "reg_down_dp_l_mean_mw": float(np.mean([e.reg_down_mw for e in env_dpl])),
        "reg_up_ace_mean_mw": float(np.mean([e.reg_up_mw for e in env_ace])),
        "reg_down_ace_mean_mw": float(np.mean([e.reg_down_mw for e in env_ace])),
        "tightening_avg_mw": tight.average_mw,
        "savings": {
            "price_up": config.cost.price_up,
            "price_down": config.cost.price_down,
            "hours": config.cost.hours,
            "usd": str(savings),
        },
    }
    return ReportBundle(out, files, summary, estimates)


def run_pipeline(config: RunConfig, tel: Telemetry, out_dir: str | os.PathLike,
                 truth_beta: np.ndarray | None = None) -> ReportBundle:
    """Estimate, decompose and size reserves; write all tables and ``summary.json``.

    ``truth_beta`` (MW/Hz per minute) adds the maximum relative bias error
    of the well-conditioned estimates to the summary.
    """
    out = Path(out_dir)
    est = run_estimate(tel, config, out)
    dec = run_decompose(tel, config, out, est.estimates)
    res = run_reserves(tel, config, out, est.estimates)
    summary: dict[str, Any] = {
        "n_minutes": len(tel),
        "start_time": tel.start_time.strftime("%Y-%m-%dT%H:%M:%SZ"),
        "window_minutes": config.estimator.window_minutes,
        "estimates": est.summary,
        "decomposition": dec.summary,
        "reserves": res.summary,
    }
    if tel.hour_mask is not None:
        summary["hour_mask"] = list(tel.hour_mask)
    if truth_beta is not None:
        good = [e for e in est.estimates if not e.ill_conditioned]
        errs = [abs(e.beta.mw_per_hz / truth_beta[e.minute_index] - 1.0) for e in good]
        summary["max_rel_beta_error"] = max(errs) if errs else math.nan
    files = {**est.files, **dec.files, **res.files}
    files["summary"] = write_json(out / "summary.json", summary)
    return ReportBundle(out, files, summary, est.estimates)
