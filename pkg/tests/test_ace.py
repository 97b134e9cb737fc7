"""Tests for ACE decomposition, load-deviation estimates and inadvertent energy."""
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import T0
from freqbias import BiasValue, DisturbanceSpec, LoadModel, TimeSeries, Unit, rolling_estimate, simulate_ba
from freqbias.ace import (
    ace_f_from_bias,
    compose_ace,
    estimate_load_deviation,
    iee_compare,
    iee_hourly,
    interchange_deviation,
)
from freqbias.errors import PartialHour, ShapeMismatch, UnitMismatch
from freqbias.estimator import estimates_beta_series
from freqbias.synth import BiasSchedule, InterchangeModel, ar1_series

FIXED = BiasValue(409.0, Unit.MW_PER_0P1HZ)


def mw(v, period=60.0):
    return TimeSeries(T0, period, v, Unit.MW)


def hz(v):
    return TimeSeries(T0, 60.0, v, Unit.HZ)


def test_interchange_deviation_examples(rng):
    nsi = mw(np.full(60, 500.0))
    assert np.all(interchange_deviation(nsi, nsi).values == 0.0)
    assert np.all(interchange_deviation(mw(nsi.values + 100.0), nsi).values == 100.0)
    held = interchange_deviation(mw(np.full(60, 510.0)), mw([500.0], 3600.0))
    assert held.values.tolist() == oracles.loop_subtract([510.0] * 60, oracles.loop_zoh([500.0]))


def test_interchange_deviation_guards():
    with pytest.raises(ShapeMismatch):
        interchange_deviation(mw(np.zeros(90)), mw([0.0, 0.0], 3600.0))
    with pytest.raises(UnitMismatch):
        interchange_deviation(hz(np.zeros(60)), mw(np.zeros(60)))


def test_ace_f_examples():
    assert np.all(ace_f_from_bias(BiasValue(4090.0), hz(np.zeros(5))).values == 0.0)
    assert ace_f_from_bias(BiasValue(4090.0), hz([-0.036])).values[0] == pytest.approx(147.24, abs=1e-9)
    d_f = hz([0.01, -0.02, 0.005])
    one = ace_f_from_bias(BiasValue(1000.0), d_f).values
    two = ace_f_from_bias(BiasValue(2000.0), d_f).values
    np.testing.assert_array_equal(two, 2.0 * one)
    with pytest.raises(UnitMismatch):
        ace_f_from_bias(BiasValue(1000.0), mw([0.0]))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(min_value=-0.2, max_value=0.2), min_size=1, max_size=30),
       st.floats(min_value=1.0, max_value=1e4))
def test_bias_unit_coherence(d_f, b):
    a = ace_f_from_bias(BiasValue(b, Unit.MW_PER_0P1HZ), hz(d_f)).values
    c = ace_f_from_bias(BiasValue(10.0 * b, Unit.MW_PER_HZ), hz(d_f)).values
    np.testing.assert_allclose(a, c, rtol=1e-12, atol=0.0)


def test_per_minute_bias_forms():
    d_f = hz([0.01, 0.02])
    arr = ace_f_from_bias(np.array([1000.0, 2000.0]), d_f).values
    lst = ace_f_from_bias([BiasValue(100.0, Unit.MW_PER_0P1HZ), BiasValue(2000.0)], d_f).values
    ts = ace_f_from_bias(TimeSeries(T0, 60.0, [100.0, 200.0], Unit.MW_PER_0P1HZ), d_f).values
    np.testing.assert_allclose(arr, [-10.0, -40.0])
    np.testing.assert_allclose(lst, arr)
    np.testing.assert_allclose(ts, arr)
    with pytest.raises(ShapeMismatch):
        ace_f_from_bias(np.array([1.0]), d_f)
    with pytest.raises(UnitMismatch):
        ace_f_from_bias(TimeSeries(T0, 60.0, [1.0, 1.0], Unit.MW), d_f)


def test_compose_examples(rng):
    zero = compose_ace(mw(np.zeros(3)), mw(np.zeros(3)))
    assert all(r.ace_total == 0.0 for r in zero)
    x = rng.normal(0, 50, 10)
    cancel = compose_ace(mw(x), mw(-x))
    assert all(r.ace_total == 0.0 and r.ace_f != 0.0 for r in cancel)
    assert [r.minute_index for r in cancel] == list(range(10))
    with pytest.raises(ShapeMismatch):
        compose_ace(mw(np.zeros(3)), mw(np.zeros(4)))


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4)), min_size=1, max_size=40))
def test_compose_identity_is_exact(pairs):
    a, d = (np.array(v) for v in zip(*pairs))
    for r in compose_ace(mw(a), mw(d)):
        assert r.ace_total - (r.ace_f + r.delta_f_interchange) == 0.0


def test_load_deviation_examples():
    assert np.all(estimate_load_deviation(BiasValue(4090.0), hz(np.zeros(4))).dp_l.values == 0.0)
    out = estimate_load_deviation(BiasValue(4090.0), hz([0.01]))
    assert out.dp_l.values[0] == pytest.approx(-40.9, abs=1e-12) and out.beta_used == "fixed"
    # MW/0.1Hz input supplies the factor of ten
    same = estimate_load_deviation(BiasValue(409.0, Unit.MW_PER_0P1HZ), hz([0.01]))
    assert same.dp_l.values[0] == pytest.approx(-40.9, abs=1e-12)
    assert estimate_load_deviation(np.array([4090.0]), hz([0.01])).beta_used == "estimated"


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_load_deviation_is_linear(seed, c):
    rng = np.random.default_rng(seed)
    b1, b2 = rng.uniform(1000, 5000, (2, 20))
    d1, d2 = rng.uniform(-0.05, 0.05, (2, 20))
    dp = lambda b, d: estimate_load_deviation(b, hz(d)).dp_l.values
    np.testing.assert_allclose(dp(b1 + c * b2, d1), dp(b1, d1) + c * dp(b2, d1), rtol=1e-9, atol=1e-9)
    np.testing.assert_allclose(dp(b1, d1 + c * d2), dp(b1, d1) + c * dp(b1, d2), rtol=1e-9, atol=1e-9)
    # both sign conventions appear through negative scaling
    np.testing.assert_allclose(dp(b1, -d1), -dp(b1, d1), rtol=0, atol=0)


def test_iee_examples():
    nsi = mw(np.full(120, 300.0))
    assert [r.iee_mwh for r in iee_hourly(nsi, nsi)] == [0.0, 0.0]
    assert iee_hourly(mw(np.full(60, 360.0)), mw(np.full(60, 300.0)))[0].iee_mwh == 60.0
    saw = np.tile(np.arange(0.0, 25.0, 2.0), 5)[:60]
    saw = saw - saw.mean() + 12.0
    got = iee_hourly(mw(300.0 + saw), mw(np.full(60, 300.0)))[0].iee_mwh
    assert got == pytest.approx(12.0, abs=1e-12)
    assert [r.hour_index for r in iee_hourly(nsi, nsi)] == [0, 1]
    with pytest.raises(PartialHour):
        iee_hourly(mw(np.zeros(90)), mw(np.zeros(90)))


def test_iee_conservation(rng):
    nai = mw(300.0 + rng.normal(0, 40, 1440))
    nsi = mw([300.0 + 10 * h for h in range(24)], 3600.0)
    total = sum(r.iee_mwh for r in iee_hourly(nai, nsi))
    integral = sum(oracles.loop_subtract(nai.values, oracles.loop_zoh(nsi.values))) / 60.0
    assert abs(total - integral) <= 1e-9


def test_iee_compare_degenerate(noiseless_day):
    rows = iee_compare(noiseless_day, FIXED, np.full(1440, FIXED.mw_per_hz))
    assert all(r.iee_mwh == r.iee_optimal_mwh for r in rows) and len(rows) == 24


def test_iee_compare_zero_frequency_error():
    d = ar1_series(2, 1440, 0.9, 20.0)
    day = SimpleNamespace(f=hz(np.full(1440, 60.0)), f_ref=hz(np.full(1440, 60.0)),
                          nai=mw(400.0 + d), nsi=mw(np.full(1440, 400.0)))
    rows = iee_compare(day, FIXED, np.full(1440, 3000.0))
    want = oracles.loop_hourly_mwh(d)
    np.testing.assert_allclose([r.iee_mwh for r in rows], want, atol=1e-9)
    assert all(r.iee_mwh == r.iee_optimal_mwh for r in rows)


def test_iee_compare_tracks_truth(area):
    spec = DisturbanceSpec(
        seed=4,
        load_model=LoadModel.ar1(0.9, 25.0),
        interchange_model=InterchangeModel.exogenous(ar1_series(5, 1440, 0.9, 20.0)),
        bias_schedule=BiasSchedule.sinusoidal(3600.0, 300.0),
    )
    ds = simulate_ba(area, spec, 1440)
    est = estimates_beta_series(rolling_estimate(ds.f, ds.f_ref, ds.p_g), 1440, fill=FIXED.mw_per_hz)
    with_est = iee_compare(ds, FIXED, est)
    with_truth = iee_compare(ds, FIXED, ds.truth_beta)
    opt = np.array([r.iee_optimal_mwh for r in with_est])
    fixed = np.array([r.iee_mwh for r in with_est])
    truth = np.array([r.iee_optimal_mwh for r in with_truth])
    assert not np.allclose(opt, fixed)
    assert np.mean(np.abs(opt - truth)) <= np.mean(np.abs(fixed - truth))


def test_iee_compare_uses_delta_t_without_nsi(noiseless_day):
    recorded = SimpleNamespace(f=noiseless_day.f, f_ref=noiseless_day.f_ref, nai=noiseless_day.nai, nsi=None,
                               delta_t=mw(np.full(1440, 6.0)))
    rows = iee_compare(recorded, FIXED, np.full(1440, FIXED.mw_per_hz))
    assert all(r.iee_mwh == 6.0 for r in rows)
