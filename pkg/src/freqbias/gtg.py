"""Governor-turbine-generator (GTG) plant model and area droop aggregation.

The plant is the linear four-state model

    theta'       = omega_0 * omega
    J omega'     = P_T + e_T a - P_G - D omega
    T_u P_T'     = -P_T + K_t a
    T_a a'       = -r a - omega + omega_ref

in per-unit deviation variables. Its steady state is the droop line
``omega = alpha * omega_ref - sigma * P_G``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateParams, EmptyArea, NonFiniteState, StepTooLarge
from .timeseries import BiasValue, Unit

NOMINAL_HZ = 60.0
DEFAULT_BASE_MW = 1000.0

# Sampling box for random plants; every draw in it is stable and settles well
# within 50 * max(T_u, T_a).
PARAM_BOX = {
    "J": (0.5, 1.0),
    "D": (1.0, 2.0),
    "T_u": (0.05, 0.2),
    "K_t": (0.8, 1.2),
    "T_a": (1.5, 2.5),
    "r": (0.05, 0.1),
    "e_T": (0.0, 0.2),
}


@dataclass(frozen=True)
class GtgParams:
    J: float = 0.8
    D: float = 1.5
    T_u: float = 0.1
    K_t: float = 1.0
    T_a: float = 2.0
    r: float = 0.05
    e_T: float = 0.0
    omega_0: float = 2.0 * math.pi * NOMINAL_HZ
    base_mw: float = DEFAULT_BASE_MW

    def __post_init__(self) -> None:
        checks = {
            "J": self.J > 0,
            "T_u": self.T_u > 0,
            "T_a": self.T_a > 0,
            "r": self.r > 0,
            "D": self.D >= 0,
            "K_t": self.K_t > 0,
            "base_mw": self.base_mw > 0,
        }
        bad = [k for k, ok in checks.items() if not ok]
        if bad:
            raise DegenerateParams(f"invalid GTG parameters: {', '.join(bad)}")
        values = (self.J, self.D, self.T_u, self.K_t, self.T_a, self.r, self.e_T, self.omega_0, self.base_mw)
        if not all(math.isfinite(x) for x in values):
            raise DegenerateParams("GTG parameters must be finite")

    @property
    def default_dt(self) -> float:
        return min(self.T_u, self.T_a) / 20.0

    @property
    def settle_time(self) -> float:
        return 50.0 * max(self.T_u, self.T_a)


@dataclass(frozen=True)
class GtgState:
    theta_G: float = 0.0
    omega_G: float = 0.0
    P_T: float = 0.0
    a: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.theta_G, self.omega_G, self.P_T, self.a], dtype=np.float64)

    @classmethod
    def from_array(cls, x: np.ndarray) -> "GtgState":
        if not np.all(np.isfinite(x)):
            raise NonFiniteState(f"non-finite GTG state {x!r}")
        return cls(float(x[0]), float(x[1]), float(x[2]), float(x[3]))


def _derivative(x: np.ndarray, p: GtgParams, omega_ref: float, P_G: float) -> np.ndarray:
    _, w, pt, a = x
    return np.array(
        [
            p.omega_0 * w,
            (pt + p.e_T * a - P_G - p.D * w) / p.J,
            (-pt + p.K_t * a) / p.T_u,
            (-p.r * a - w + omega_ref) / p.T_a,
        ]
    )


def _check_dt(p: GtgParams, dt: float) -> None:
    if not (dt > 0) or dt > p.T_a / 10.0:
        raise StepTooLarge(f"dt={dt!r} must lie in (0, T_a/10 = {p.T_a / 10.0!r}]")


def step_gtg(state: GtgState, p: GtgParams, omega_ref: float, P_G_elec: float, dt: float) -> GtgState:
    """Advance the plant by one classical RK4 step of length ``dt``."""
    _check_dt(p, dt)
    x = state.as_array()
    k1 = _derivative(x, p, omega_ref, P_G_elec)
    k2 = _derivative(x + 0.5 * dt * k1, p, omega_ref, P_G_elec)
    k3 = _derivative(x + 0.5 * dt * k2, p, omega_ref, P_G_elec)
    k4 = _derivative(x + dt * k3, p, omega_ref, P_G_elec)
    return GtgState.from_array(x + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))


def state_matrix(p: GtgParams) -> np.ndarray:
    """Jacobian of the (omega, P_T, a) subsystem; theta is a pure integrator."""
    return np.array(
        [
            [-p.D / p.J, 1.0 / p.J, p.e_T / p.J],
            [0.0, -1.0 / p.T_u, p.K_t / p.T_u],
            [-1.0 / p.T_a, 0.0, -p.r / p.T_a],
        ]
    )


def is_stable(p: GtgParams) -> bool:
    return bool(np.linalg.eigvals(state_matrix(p)).real.max() < 0)


def _rk4_propagator(p: GtgParams, omega_ref: float, P_G: float, dt: float) -> tuple[np.ndarray, np.ndarray]:
    # x_{n+1} = M x_n + c is exactly one RK4 step of the affine system x' = A x + b.
    A = np.zeros((4, 4))
    A[0, 1] = p.omega_0
    A[1:, 1:] = state_matrix(p)
    b = np.array([0.0, -P_G / p.J, 0.0, omega_ref / p.T_a])
    hA = dt * A
    eye = np.eye(4)
    hA2 = hA @ hA
    hA3 = hA2 @ hA
    M = eye + hA + hA2 / 2.0 + hA3 / 6.0 + hA3 @ hA / 24.0
    c = dt * (eye + hA / 2.0 + hA2 / 6.0 + hA3 / 24.0) @ b
    return M, c


def integrate_gtg(
    state: GtgState,
    p: GtgParams,
    omega_ref: float,
    P_G_elec: float,
    duration: float,
    dt: float | None = None,
) -> GtgState:
    """Integrate with fixed-step RK4 for ``duration`` seconds under constant inputs."""
    dt = p.default_dt if dt is None else dt
    _check_dt(p, dt)
    n = int(math.ceil(duration / dt - 1e-9))
    M, c = _rk4_propagator(p, omega_ref, P_G_elec, dt)
    x = state.as_array()
    for _ in range(n):
        x = M @ x + c
    return GtgState.from_array(x)


def analytic_droop(p: GtgParams) -> tuple[float, float]:
    """Steady-state droop ``(sigma, alpha)`` of a single plant, per-unit.

    sigma = r / (r D + K_t + e_T), alpha = 1 - sigma D.
    """
    denom = p.r * p.D + p.K_t + p.e_T
    if not denom > 0:
        raise DegenerateParams(f"r*D + K_t + e_T must be positive, got {denom!r}")
    sigma = p.r / denom
    return sigma, 1.0 - sigma * p.D


def equilibrium_state(p: GtgParams, omega_ref: float, P_G_elec: float, theta_G: float = 0.0) -> GtgState:
    sigma, alpha = analytic_droop(p)
    w = alpha * omega_ref - sigma * P_G_elec
    a = (omega_ref - w) / p.r
    return GtgState(theta_G, w, p.K_t * a, a)


def random_gtg_params(rng: np.random.Generator, **overrides: float) -> GtgParams:
    """Draw plant constants uniformly from :data:`PARAM_BOX`."""
    kw = {k: float(rng.uniform(lo, hi)) for k, (lo, hi) in PARAM_BOX.items()}
    kw.update(overrides)
    return GtgParams(**kw)


@dataclass(frozen=True)
class AreaDroop:
    """Aggregate droop of the regulating plants of one area.

    ``sigma`` is in Hz/MW and ``beta`` in MW/Hz; ``beta_pu`` is the plain
    sum of member ``1/sigma_j`` on their own per-unit bases.
    """

    sigma: float
    alpha: float
    beta: BiasValue
    member_sigmas: tuple[float, ...] = field(default=())
    beta_pu: float = math.nan
    nominal_hz: float = NOMINAL_HZ

    @property
    def damping_mw_per_hz(self) -> float:
        return (1.0 - self.alpha) / self.sigma

    @classmethod
    def from_bias(cls, beta_mw_per_hz: float, alpha: float, nominal_hz: float = NOMINAL_HZ) -> "AreaDroop":
        if not beta_mw_per_hz > 0:
            raise DegenerateParams(f"area bias must be positive, got {beta_mw_per_hz!r}")
        return cls(1.0 / beta_mw_per_hz, alpha, BiasValue(beta_mw_per_hz, Unit.MW_PER_HZ), nominal_hz=nominal_hz)


def aggregate_area(units: Sequence[GtgParams], nominal_hz: float = NOMINAL_HZ) -> AreaDroop:
    """Aggregate plant droops into one area droop.

    The area bias is the sum of member natural responses ``1/sigma_j``,
    each converted from its per-unit base to MW/Hz; area damping is the sum
    of member damping, and ``alpha = 1 - sigma * D_area``.
    """
    if len(units) == 0:
        raise EmptyArea("an area needs at least one regulating unit")
    sigmas = []
    beta = 0.0
    beta_pu = 0.0
    damping = 0.0
    for u in units:
        s, _ = analytic_droop(u)
        sigmas.append(s)
        beta_pu += 1.0 / s
        beta += u.base_mw / (s * nominal_hz)
        damping += u.D * u.base_mw / nominal_hz
    sigma = 1.0 / beta
    return AreaDroop(
        sigma=sigma,
        alpha=1.0 - sigma * damping,
        beta=BiasValue(beta, Unit.MW_PER_HZ),
        member_sigmas=tuple(sigmas),
        beta_pu=beta_pu,
        nominal_hz=nominal_hz,
    )


def aggregate_reference(units: Sequence[GtgParams], omega_refs: Sequence[float], nominal_hz: float = NOMINAL_HZ) -> float:
    """Area reference that reproduces the summed member droop lines.

    Solves ``alpha_I * omega_ref_I = sigma_I * sum_j (alpha_j / sigma_j) omega_ref_j``
    with every sigma expressed in Hz/MW, so that equal member references
    aggregate to the same reference.
    """
    if len(units) == 0:
        raise EmptyArea("an area needs at least one regulating unit")
    if len(units) != len(omega_refs):
        raise ValueError("one reference per unit is required")
    area = aggregate_area(units, nominal_hz)
    acc = 0.0
    for u, w in zip(units, omega_refs):
        s, a = analytic_droop(u)
        acc += a * w * u.base_mw / (s * nominal_hz)
    if area.alpha == 0.0:
        raise DegenerateParams("area alpha is zero; reference is undefined")
    return area.sigma * acc / area.alpha
