"""Tests for the plant model, its integrator and area aggregation."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from freqbias import (
    AreaDroop,
    GtgParams,
    GtgState,
    aggregate_area,
    aggregate_reference,
    analytic_droop,
    integrate_gtg,
    random_gtg_params,
    step_gtg,
)
from freqbias.errors import DegenerateParams, EmptyArea, NonFiniteState, StepTooLarge
from freqbias.gtg import PARAM_BOX, equilibrium_state, is_stable


def test_equilibrium_is_a_fixed_point():
    p = GtgParams(e_T=0.1)
    x0 = equilibrium_state(p, 0.01, 0.3)
    x1 = step_gtg(x0, p, 0.01, 0.3, p.default_dt)
    np.testing.assert_allclose(x1.as_array()[1:], x0.as_array()[1:], atol=1e-12)


def test_origin_stays_at_rest():
    p = GtgParams()
    x = GtgState()
    for _ in range(100):
        x = step_gtg(x, p, 0.0, 0.0, p.default_dt)
    assert x == GtgState()


def test_step_response_settles_on_the_droop_line():
    p = GtgParams()
    end = integrate_gtg(GtgState(), p, 0.0, 0.2, 50 * p.T_a)
    sigma, alpha = analytic_droop(p)
    assert abs(end.omega_G - (alpha * 0.0 - sigma * 0.2)) <= 1e-6


def test_droop_matches_linear_steady_state_oracle():
    rng = np.random.default_rng(1)
    for _ in range(10):
        p = random_gtg_params(rng)
        w_ref, P_G = rng.uniform(-0.05, 0.05), rng.uniform(-0.5, 0.5)
        sigma, alpha = analytic_droop(p)
        w, pt, a = oracles.steady_state_linear(p, w_ref, P_G)
        assert math.isclose(alpha * w_ref - sigma * P_G, w, rel_tol=1e-12, abs_tol=1e-15)
        eq = equilibrium_state(p, w_ref, P_G)
        np.testing.assert_allclose([eq.omega_G, eq.P_T, eq.a], [w, pt, a], rtol=1e-10, atol=1e-14)


def test_rk4_agrees_with_independent_euler():
    p = GtgParams(e_T=0.1)
    end = integrate_gtg(GtgState(), p, 0.01, 0.1, 10.0)
    assert abs(end.omega_G - oracles.euler_gtg_settle(p, 0.01, 0.1, 10.0, dt=1e-4)) < 1e-5


def test_propagator_equals_repeated_steps():
    p = GtgParams(e_T=0.05)
    dt = p.default_dt
    x = GtgState(0.1, 0.01, -0.02, 0.03)
    for _ in range(200):
        x = step_gtg(x, p, 0.02, 0.1, dt)
    y = integrate_gtg(GtgState(0.1, 0.01, -0.02, 0.03), p, 0.02, 0.1, 200 * dt, dt)
    np.testing.assert_allclose(y.as_array(), x.as_array(), rtol=1e-10, atol=1e-13)


def test_step_is_deterministic():
    p = GtgParams()
    x = GtgState(0.0, 0.01, 0.0, 0.0)
    assert step_gtg(x, p, 0.0, 0.1, 0.001) == step_gtg(x, p, 0.0, 0.1, 0.001)


def test_theta_integrates_frequency():
    p = GtgParams()
    x = GtgState(0.0, 0.001, 0.0, 0.0)
    y = step_gtg(x, p, 0.001 * (1 + p.r), 0.0, 1e-4)
    assert y.theta_G > 0


def test_step_too_large():
    p = GtgParams(T_a=2.0)
    with pytest.raises(StepTooLarge):
        step_gtg(GtgState(), p, 0.0, 0.0, 0.21)
    with pytest.raises(StepTooLarge):
        step_gtg(GtgState(), p, 0.0, 0.0, 0.0)
    with pytest.raises(StepTooLarge):
        integrate_gtg(GtgState(), p, 0.0, 0.0, 1.0, dt=1.0)


def test_non_finite_state():
    with pytest.raises(NonFiniteState):
        step_gtg(GtgState(0.0, math.nan, 0.0, 0.0), GtgParams(), 0.0, 0.0, 0.001)


@pytest.mark.parametrize("field", ["J", "T_u", "T_a", "r", "K_t", "base_mw"])
def test_params_reject_nonpositive(field):
    with pytest.raises(DegenerateParams):
        GtgParams(**{field: 0.0})


def test_params_reject_negative_damping_and_nan():
    with pytest.raises(DegenerateParams):
        GtgParams(D=-0.1)
    with pytest.raises(DegenerateParams):
        GtgParams(e_T=math.nan)


def test_analytic_droop_examples():
    s, a = analytic_droop(GtgParams(r=0.05, D=1.0, K_t=1.0, e_T=0.0))
    assert math.isclose(s, 0.05 / 1.05, rel_tol=1e-15) and round(s, 6) == 0.047619
    assert round(a, 6) == 0.952381
    assert analytic_droop(GtgParams(r=0.05, D=0.0, K_t=1.0)) == (0.05, 1.0)
    assert math.isclose(analytic_droop(GtgParams(r=0.05, D=0.0, K_t=1.0, e_T=1.0))[0], 0.025, rel_tol=1e-15)


def test_analytic_droop_degenerate():
    with pytest.raises(DegenerateParams):
        analytic_droop(GtgParams(r=0.05, D=0.0, K_t=1.0, e_T=-1.0))


def test_param_box_draws_are_stable():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = random_gtg_params(rng)
        assert is_stable(p)
        for k, (lo, hi) in PARAM_BOX.items():
            assert lo <= getattr(p, k) <= hi


def _unit(sigma):
    return GtgParams(r=sigma, D=0.0, K_t=1.0)


def test_aggregate_examples():
    assert math.isclose(aggregate_area([_unit(0.05), _unit(0.05)]).beta_pu, 40.0, rel_tol=1e-12)
    assert math.isclose(aggregate_area([_unit(0.04), _unit(0.05)]).beta_pu, 45.0, rel_tol=1e-12)
    single = aggregate_area([_unit(0.05)])
    assert math.isclose(single.beta_pu, 20.0, rel_tol=1e-12)
    # 1000 MW base at 60 Hz: 20 pu -> 20 * 1000 / 60 MW/Hz
    assert math.isclose(single.beta.mw_per_hz, 20.0 * 1000.0 / 60.0, rel_tol=1e-12)
    assert math.isclose(single.sigma * single.beta.mw_per_hz, 1.0, rel_tol=1e-15)


def test_aggregate_alpha_uses_area_damping():
    units = [GtgParams(D=1.5), GtgParams(D=1.0, r=0.08)]
    area = aggregate_area(units)
    d_area = sum(u.D * u.base_mw / 60.0 for u in units)
    assert math.isclose(area.alpha, 1.0 - area.sigma * d_area, rel_tol=1e-14)
    assert math.isclose(area.damping_mw_per_hz, d_area, rel_tol=1e-12)


def test_aggregate_empty():
    with pytest.raises(EmptyArea):
        aggregate_area([])


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(min_value=0.1, max_value=10.0))
def test_aggregate_scaling(seed, c):
    rng = np.random.default_rng(seed)
    units = [random_gtg_params(rng) for _ in range(3)]
    scaled = [GtgParams(**{**u.__dict__, "base_mw": u.base_mw * c}) for u in units]
    a, b = aggregate_area(units), aggregate_area(scaled)
    assert math.isclose(b.beta.mw_per_hz, c * a.beta.mw_per_hz, rel_tol=1e-12)
    assert math.isclose(b.sigma, a.sigma / c, rel_tol=1e-12)
    assert math.isclose(b.alpha, a.alpha, rel_tol=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 6))
def test_aggregate_union_is_additive(seed, n1, n2):
    rng = np.random.default_rng(seed)
    g1 = [random_gtg_params(rng) for _ in range(n1)]
    g2 = [random_gtg_params(rng) for _ in range(n2)]
    total = aggregate_area(g1 + g2).beta.mw_per_hz
    assert math.isclose(total, aggregate_area(g1).beta.mw_per_hz + aggregate_area(g2).beta.mw_per_hz, rel_tol=1e-12)


def test_aggregate_reference():
    rng = np.random.default_rng(5)
    units = [random_gtg_params(rng) for _ in range(4)]
    assert math.isclose(aggregate_reference(units, [0.02] * 4), 0.02, rel_tol=1e-12)
    refs = rng.uniform(-0.01, 0.01, 4)
    area = aggregate_area(units)
    # area droop line at P_G = 0 reproduces the MW-weighted member lines
    want = sum(analytic_droop(u)[1] / analytic_droop(u)[0] * w * u.base_mw / 60.0 for u, w in zip(units, refs))
    assert math.isclose(area.alpha / area.sigma * aggregate_reference(units, refs), want, rel_tol=1e-12)
    with pytest.raises(ValueError):
        aggregate_reference(units, [0.0])


def test_area_from_bias():
    area = AreaDroop.from_bias(4090.0, 0.98)
    assert area.sigma == 1.0 / 4090.0 and area.beta.mw_per_0p1hz == 409.0
    with pytest.raises(DegenerateParams):
        AreaDroop.from_bias(0.0, 0.98)
