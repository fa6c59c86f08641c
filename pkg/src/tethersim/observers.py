"""Disturbance estimators for the tethered quadrotor.

Three interchangeable designs produce a feed-forward force estimate
F_hat_d each control step:

* Redundant disturbance observer (RDO): jointly estimates the cable
  stiffness K and the lumped vertical force d by fusing all three
  translational channels.  The target error dynamics

      [K_hat_dot, d_hat_dot]^T = A_o [K_hat - K, d_hat - d]^T,
      A_o = diag(-c1, -c2)

  are realised through a gain matrix L = [l_{1:3}; l_{4:6}] satisfying
  L @ [Delta, e3] = A_o.  The underdetermined rows (l1, l2, l4, l5) are
  resolved by the minimum-norm pseudo-inverse

      [l1, l2, l4, l5] = [-Dx*c1, -Dy*c1, Dx*Dz*c2, Dy*Dz*c2] / q,
      q = Dx^2 + Dy^2 + c3

  with c3 a small regulariser guarding the Dx = Dy = 0 singularity,
  plus l3 = 0 and l6 = -c2.  Internal variables (alpha, beta) and the
  path integrals (gamma_alpha, gamma_beta) of the gain rows against the
  measured velocity remove any dependence on acceleration:

      K_hat = alpha + gamma_alpha,   d_hat = beta + gamma_beta
      alpha_dot = -c1*(alpha + gamma_alpha) - l_{1:3} @ (nu + m*g*e3)
      beta_dot  = -c2*(beta  + gamma_beta)  - l_{4:6} @ (nu + m*g*e3)

  The force estimate is reconstructed from the measured extension every
  step, F_hat_d = -d_hat*e3 - K_hat*Delta, and is never integrated
  directly, so it reacts instantly when the vehicle moves or the cable
  goes slack.

* Reduced-order disturbance observer (DOB): assumes F_d_dot ~ 0 and
  filters the lumped force with first-order error dynamics at rate l_d
  per axis:

      z_d_dot  = -l_d z_d - l_d (m*l_d*v + m*g*e3 + nu)
      F_hat_d  = z_d + m*l_d*v

* Extended state observer (ESO): augments each translational channel
  with disturbance and disturbance-rate states (F_d_ddot ~ 0), a
  12-state Luenberger observer with measurements (p, v) whose gain is
  found by per-axis analytic pole placement.

All step functions integrate with forward Euler at the control rate and
are pure: they take a state value and return the advanced value.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .model import E3, VehicleParams


@dataclass
class Measurement:
    """Sensor bundle available to an estimator at one control instant."""

    p_v: np.ndarray
    v_v: np.ndarray
    delta: np.ndarray


@dataclass
class DisturbanceEstimate:
    """Force estimate and, for the RDO, its (K_hat, d_hat) decomposition.

    K_hat and d_hat are NaN for estimators that do not separate the
    stiffness from the vertical force.
    """

    K_hat: float
    d_hat: float
    f_hat: np.ndarray


# ---------------------------------------------------------------------------
# Redundant disturbance observer
# ---------------------------------------------------------------------------

@dataclass
class RdoConfig:
    c1: float = 2.0      # stiffness estimation rate [1/s]
    c2: float = 0.75     # vertical-force estimation rate [1/s]
    c3: float = 5e-3     # singularity regulariser [m^2]

    def __post_init__(self):
        if self.c1 <= 0.0 or self.c2 <= 0.0:
            raise ValueError("estimation rates c1, c2 must be positive")
        if self.c3 < 0.0:
            raise ValueError("regulariser c3 must be non-negative")


@dataclass
class RdoState:
    """Internal observer variables; K_hat = alpha + gamma_alpha etc."""

    alpha: float
    beta: float
    gamma_alpha: float
    gamma_beta: float
    prev_v: np.ndarray       # velocity sample of the previous step
    prev_gains: np.ndarray   # 2x3 gain matrix of the previous step


def rdo_gains(delta, cfg: RdoConfig) -> np.ndarray:
    """Observer gain matrix L (2x3) for the measured extension.

    Minimum-norm solution of L @ [Delta, e3] = diag(-c1, -c2) with the
    structural constraints l3 = 0, l6 = -c2.  With Delta = 0 the first
    row vanishes (the stiffness update pauses) while the second row
    keeps the vertical-force estimate active.
    """
    dx, dy, dz = float(delta[0]), float(delta[1]), float(delta[2])
    q = dx * dx + dy * dy + cfg.c3
    if q == 0.0:
        return np.array([[0.0, 0.0, 0.0], [0.0, 0.0, -cfg.c2]])
    return np.array([
        [-dx * cfg.c1 / q, -dy * cfg.c1 / q, 0.0],
        [dx * dz * cfg.c2 / q, dy * dz * cfg.c2 / q, -cfg.c2],
    ])


def rdo_init(meas: Measurement, cfg: RdoConfig) -> RdoState:
    """Zero-estimate initial state (K_hat(0) = d_hat(0) = 0)."""
    return RdoState(0.0, 0.0, 0.0, 0.0, np.array(meas.v_v, dtype=float),
                    rdo_gains(meas.delta, cfg))


def rdo_step(st: RdoState, meas: Measurement, nu, cfg: RdoConfig,
             params: VehicleParams, dt: float) -> RdoState:
    """Advance the observer one control period.

    nu is the virtual force that was applied over the elapsed interval.
    Ordering: the path integrals are updated first with the *previous*
    gain rows against the velocity increment, then (alpha, beta) take a
    forward-Euler step, then the gains are refreshed from the new
    extension measurement.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    dv = np.asarray(meas.v_v, dtype=float) - st.prev_v
    l13, l46 = st.prev_gains[0], st.prev_gains[1]
    gamma_a = st.gamma_alpha + params.m * float(l13 @ dv)
    gamma_b = st.gamma_beta + params.m * float(l46 @ dv)
    u = np.asarray(nu, dtype=float) + params.m * params.g * E3
    alpha = st.alpha + dt * (-cfg.c1 * (st.alpha + gamma_a) - float(l13 @ u))
    beta = st.beta + dt * (-cfg.c2 * (st.beta + gamma_b) - float(l46 @ u))
    return RdoState(alpha, beta, gamma_a, gamma_b,
                    np.array(meas.v_v, dtype=float),
                    rdo_gains(meas.delta, cfg))


def rdo_estimate(st: RdoState, delta) -> DisturbanceEstimate:
    """Reconstruct (K_hat, d_hat, F_hat_d) from the current extension."""
    k_hat = st.alpha + st.gamma_alpha
    d_hat = st.beta + st.gamma_beta
    f_hat = -d_hat * E3 - k_hat * np.asarray(delta, dtype=float)
    return DisturbanceEstimate(k_hat, d_hat, f_hat)


# ---------------------------------------------------------------------------
# Reduced-order disturbance observer
# ---------------------------------------------------------------------------

@dataclass
class DobConfig:
    """Positive diagonal gain; a scalar is broadcast to all three axes."""

    l_d: np.ndarray = field(default_factory=lambda: np.full(3, 0.75))

    def __post_init__(self):
        l = np.asarray(self.l_d, dtype=float)
        if l.ndim == 0:
            l = np.full(3, float(l))
        if l.shape != (3,):
            raise ValueError("l_d must be a scalar or 3-vector of diagonal gains")
        if np.any(l <= 0.0):
            raise ValueError("observer gains l_d must be positive")
        self.l_d = l


def dob_init(meas: Measurement, cfg: DobConfig, params: VehicleParams) -> np.ndarray:
    """Internal state z_d chosen so that F_hat_d(0) = 0."""
    return -params.m * cfg.l_d * np.asarray(meas.v_v, dtype=float)


def dob_step(z_d, meas: Measurement, nu, cfg: DobConfig,
             params: VehicleParams, dt: float):
    """Euler-integrate z_d and return (new state, estimate).

    The derivative uses the velocity sample at the start of the interval
    (carried in `meas`); the returned estimate recombines the new state
    with that same measurement, so callers wanting F_hat at the new
    instant should re-evaluate via dob_estimate with the fresh velocity.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    z_d = np.asarray(z_d, dtype=float)
    v = np.asarray(meas.v_v, dtype=float)
    u = np.asarray(nu, dtype=float) + params.m * params.g * E3
    z_new = z_d + dt * (-cfg.l_d * z_d - cfg.l_d * (params.m * cfg.l_d * v + u))
    return z_new, dob_estimate(z_new, v, cfg, params)


def dob_estimate(z_d, v_v, cfg: DobConfig, params: VehicleParams) -> DisturbanceEstimate:
    """F_hat_d = z_d + m*l_d*v."""
    f_hat = np.asarray(z_d, dtype=float) + params.m * cfg.l_d * np.asarray(v_v, dtype=float)
    return DisturbanceEstimate(math.nan, math.nan, f_hat)


# ---------------------------------------------------------------------------
# Extended state observer
# ---------------------------------------------------------------------------

@dataclass
class EsoConfig:
    """Per-axis estimator poles; the same four poles are used on x, y, z."""

    poles: np.ndarray = field(default_factory=lambda: np.array([-0.05, -0.5, -5.0, -25.0]))

    def __post_init__(self):
        p = np.atleast_1d(np.asarray(self.poles, dtype=complex))
        if p.shape != (4,):
            raise ValueError("need exactly 4 poles per axis")
        self.poles = p
        self._gain = None

    def gain_matrix(self) -> np.ndarray:
        if self._gain is None:
            self._gain = eso_gains(self.poles)
        return self._gain


def eso_system_matrices(m: float):
    """(A_e, B, C) of the 12-state estimator model.

    State ordering z = (p, v, f, f_dot) with f = F_d/m, so the chain per
    axis is p_dot = v, v_dot = f + u/m, f_dot tracked with zero second
    derivative.  Measurements are (p, v).
    """
    a = np.zeros((12, 12))
    a[:9, 3:] = np.eye(9)
    b = np.zeros((12, 3))
    b[3:6, :] = np.eye(3) / m
    c = np.hstack([np.eye(6), np.zeros((6, 6))])
    return a, b, c


def eso_axis_gain(poles) -> np.ndarray:
    """Gain of one 4-state chain (p, v, f, f_dot) with measurements (p, v).

    The gain is structured so that the position measurement corrects only
    the position state and the velocity measurement drives the
    (v, f, f_dot) sub-chain; the characteristic polynomial then factors
    as (s + a1)(s^3 + b2 s^2 + b3 s + b4), which places any pole set
    containing at least one real pole.  The slowest real pole is
    assigned to the position factor so the disturbance sub-chain keeps
    the remaining bandwidth.
    """
    p = np.atleast_1d(np.asarray(poles, dtype=complex))
    if p.shape != (4,):
        raise ValueError("need exactly 4 poles per axis")
    if np.any(p.real >= 0.0):
        raise ValueError("estimator poles must have negative real parts")
    real_idx = [i for i in range(4) if abs(p[i].imag) < 1e-12]
    if not real_idx:
        raise ValueError("pole set with two complex pairs is unreachable for "
                         "this gain structure; include at least one real pole")
    slow = max(real_idx, key=lambda i: p[i].real)
    rest = np.delete(p, slow)
    coeffs = np.poly(rest)
    if np.max(np.abs(coeffs.imag)) > 1e-9:
        raise ValueError("complex poles must come in conjugate pairs")
    a1 = -p[slow].real
    b2, b3, b4 = coeffs.real[1:]
    return np.array([[a1, 0.0], [0.0, b2], [0.0, b3], [0.0, b4]])


def eso_gains(poles) -> np.ndarray:
    """Full 12x6 gain matrix from four per-axis poles.

    The three axes are decoupled copies of the same chain, so the axis
    gain is replicated into the block structure of (A_e, C).
    """
    l4 = eso_axis_gain(poles)
    l_e = np.zeros((12, 6))
    for axis in range(3):
        rows = [axis, 3 + axis, 6 + axis, 9 + axis]
        cols = [axis, 3 + axis]
        l_e[np.ix_(rows, cols)] = l4
    return l_e


def eso_init(meas: Measurement) -> np.ndarray:
    """Start from the measured (p, v) with zero disturbance states."""
    z = np.zeros(12)
    z[:3] = meas.p_v
    z[3:6] = meas.v_v
    return z


def eso_step(z_e, meas: Measurement, nu, cfg: EsoConfig,
             params: VehicleParams, dt: float):
    """Euler-integrate the 12-state estimator; returns (state, estimate).

    The known gravity force is folded into the input, u = nu + m*g*e3,
    so the augmented states estimate the disturbance F_d alone.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    z_e = np.asarray(z_e, dtype=float)
    l_e = cfg.gain_matrix()
    u = np.asarray(nu, dtype=float) + params.m * params.g * E3
    y = np.concatenate([meas.p_v, meas.v_v])
    dz = np.zeros(12)
    dz[:9] = z_e[3:]
    dz[3:6] += u / params.m
    dz += l_e @ (y - z_e[:6])
    z_new = z_e + dt * dz
    return z_new, eso_estimate(z_new, params)


def eso_estimate(z_e, params: VehicleParams) -> DisturbanceEstimate:
    """F_hat_d = m * (z7, z8, z9)."""
    return DisturbanceEstimate(math.nan, math.nan, params.m * np.asarray(z_e[6:9], dtype=float))


# ---------------------------------------------------------------------------
# Uniform wrappers for the simulation loop
# ---------------------------------------------------------------------------

class RdoEstimator:
    name = "rdo"

    def __init__(self, cfg: RdoConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self.state = None

    def reset(self, meas: Measurement) -> DisturbanceEstimate:
        self.state = rdo_init(meas, self.cfg)
        return rdo_estimate(self.state, meas.delta)

    def step(self, meas: Measurement, nu, dt: float) -> DisturbanceEstimate:
        self.state = rdo_step(self.state, meas, nu, self.cfg, self.params, dt)
        return rdo_estimate(self.state, meas.delta)


class DobEstimator:
    name = "dob"

    def __init__(self, cfg: DobConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self.z_d = None
        self._prev = None

    def reset(self, meas: Measurement) -> DisturbanceEstimate:
        self.z_d = dob_init(meas, self.cfg, self.params)
        self._prev = meas
        return dob_estimate(self.z_d, meas.v_v, self.cfg, self.params)

    def step(self, meas: Measurement, nu, dt: float) -> DisturbanceEstimate:
        self.z_d, _ = dob_step(self.z_d, self._prev, nu, self.cfg, self.params, dt)
        self._prev = meas
        return dob_estimate(self.z_d, meas.v_v, self.cfg, self.params)


class EsoEstimator:
    name = "eso"

    def __init__(self, cfg: EsoConfig, params: VehicleParams):
        self.cfg = cfg
        self.params = params
        self.z_e = None
        self._prev = None

    def reset(self, meas: Measurement) -> DisturbanceEstimate:
        self.z_e = eso_init(meas)
        self._prev = meas
        return eso_estimate(self.z_e, self.params)

    def step(self, meas: Measurement, nu, dt: float) -> DisturbanceEstimate:
        self.z_e, _ = eso_step(self.z_e, self._prev, nu, self.cfg, self.params, dt)
        self._prev = meas
        return eso_estimate(self.z_e, self.params)
