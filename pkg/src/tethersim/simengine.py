"""Closed-loop fixed-step simulation of the tethered quadrotor.

The plant integrates at dt_plant while the controller and estimator run
at dt_ctrl (an integer multiple).  One control step:

    measure (optional Gaussian noise) -> cable extension -> estimator
    update -> PD + feed-forward -> thrust/attitude allocation -> RK4
    plant substeps (thrust held, attitude tracks the command through a
    first-order lag) -> mechanism release check -> log.

The integrated state is (p_v, v_v, att): translational dynamics from
the model module plus the commanded-attitude lag, so a single RK4 pass
covers the coupled system.  The overcentre mechanism is a threshold
latch: at the first control boundary where the true cable tension
reaches F_crit the tether is marked released and produces no force from
the next plant substep on.

Scenario kinds:

* circle      constant-altitude circle (radius, period, altitude)
* helix       same circle with a linear climb between climb_start and
              climb_end; the cable goes taut partway up the ramp
* extraction  straight-line ramp from a hover start pose, stretching
              the cable until the mechanism releases
* custom      hold the configured start pose (constant setpoint)
"""

from dataclasses import dataclass, field, replace
import math

import numpy as np

from .controller import ControllerGains, allocate, pd_control
from .model import (E3, TetherConfig, VehicleParams, VehicleState, _vec3,
                    cable_extension, disturbance_force)
from .observers import (DisturbanceEstimate, DobConfig, DobEstimator,
                        EsoConfig, EsoEstimator, Measurement, RdoConfig,
                        RdoEstimator)

SCENARIO_KINDS = ("circle", "helix", "extraction", "custom")
ESTIMATOR_NAMES = ("rdo", "dob", "eso", "oracle")
BLOWUP_LIMIT = 1e6

CSV_COLUMNS = (
    "t", "px", "py", "pz", "rx", "ry", "rz", "ex", "ey", "ez",
    "dx_cable", "dy_cable", "dz_cable", "nu_x", "nu_y", "nu_z", "T",
    "K_hat", "d_hat", "Fhat_x", "Fhat_y", "Fhat_z",
    "Fd_x", "Fd_y", "Fd_z", "released",
)


class BlowUpError(RuntimeError):
    """Simulation state exceeded the sanity bound (divergence)."""

    def __init__(self, t, detail):
        super().__init__(f"numerical blow-up at t={t:g} s: {detail}")
        self.t = t


@dataclass
class NoiseConfig:
    pos_std: float = 0.0    # m, per-axis position noise
    vel_std: float = 0.0    # m/s, per-axis velocity noise

    def __post_init__(self):
        if self.pos_std < 0.0 or self.vel_std < 0.0:
            raise ValueError("noise standard deviations must be non-negative")


@dataclass
class DisturbanceSchedule:
    """Piecewise-constant vertical force d(t): d0, optionally stepping
    to d1 at t_step."""

    d0: float = 0.0       # N
    d1: float | None = None
    t_step: float = 0.0   # s

    def __post_init__(self):
        if self.t_step < 0.0:
            raise ValueError("t_step must be non-negative")

    def value(self, t: float) -> float:
        if self.d1 is None or t < self.t_step:
            return self.d0
        return self.d1


@dataclass
class ReferenceConfig:
    """Geometry of the reference trajectory; fields are read per kind."""

    radius: float = 1.5       # m (circle, helix)
    period: float = 30.0      # s (circle, helix)
    altitude: float = 1.25    # m (circle)
    alt_start: float = 0.0    # m (helix climb endpoints)
    alt_end: float = 0.4      # m
    climb_start: float = 5.0  # s
    climb_end: float = 20.0   # s
    ramp_rate: float = 0.15   # m/s (extraction)
    ramp_dir: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, -1.0]))
    start: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -1.0]))

    def __post_init__(self):
        self.ramp_dir = _vec3(self.ramp_dir)
        self.start = _vec3(self.start)
        if self.radius < 0.0:
            raise ValueError("radius must be non-negative")
        if self.period <= 0.0:
            raise ValueError("period must be positive")
        if self.climb_end <= self.climb_start:
            raise ValueError("climb_end must exceed climb_start")
        if self.ramp_rate < 0.0:
            raise ValueError("ramp_rate must be non-negative")
        if np.linalg.norm(self.ramp_dir) == 0.0:
            raise ValueError("ramp_dir must be a non-zero direction")


@dataclass
class ReferenceSample:
    p_r: np.ndarray    # m
    v_r: np.ndarray    # m/s


def reference(kind: str, t: float, cfg: ReferenceConfig) -> ReferenceSample:
    """Reference position and its exact derivative at time t.

    Altitudes are heights above the anchor plane, so they map to
    negative z in the world frame.
    """
    if t < 0.0:
        raise ValueError("t must be non-negative")
    if kind == "circle":
        w = 2.0 * math.pi / cfg.period
        r = cfg.radius
        return ReferenceSample(
            np.array([r * math.cos(w * t), r * math.sin(w * t), -cfg.altitude]),
            np.array([-r * w * math.sin(w * t), r * w * math.cos(w * t), 0.0]))
    if kind == "helix":
        w = 2.0 * math.pi / cfg.period
        r = cfg.radius
        slope = (cfg.alt_end - cfg.alt_start) / (cfg.climb_end - cfg.climb_start)
        if t <= cfg.climb_start:
            alt, rate = cfg.alt_start, 0.0
        elif t >= cfg.climb_end:
            alt, rate = cfg.alt_end, 0.0
        else:
            alt, rate = cfg.alt_start + slope * (t - cfg.climb_start), slope
        return ReferenceSample(
            np.array([r * math.cos(w * t), r * math.sin(w * t), -alt]),
            np.array([-r * w * math.sin(w * t), r * w * math.cos(w * t), -rate]))
    if kind == "extraction":
        u = cfg.ramp_dir / np.linalg.norm(cfg.ramp_dir)
        return ReferenceSample(cfg.start + cfg.ramp_rate * t * u,
                               cfg.ramp_rate * u)
    if kind == "custom":
        return ReferenceSample(cfg.start.copy(), np.zeros(3))
    raise ValueError(f"unknown scenario kind {kind!r}")


@dataclass
class MechanismModel:
    """Threshold latch for the overcentre release."""

    f_crit: float = math.inf    # N
    released: bool = False
    release_time: float | None = None

    def check(self, tension: float, t: float) -> bool:
        """Latch at the first call where tension reaches f_crit."""
        if not self.released and tension >= self.f_crit:
            self.released = True
            self.release_time = t
            return True
        return False


@dataclass
class ScenarioConfig:
    kind: str = "circle"
    duration: float = 45.0     # s
    dt_plant: float = 1e-3     # s
    dt_ctrl: float = 1e-2      # s
    seed: int = 1
    estimator: str = "rdo"
    tau_att: float = 0.05      # s, inner attitude-loop time constant
    psi_d: float = 0.0         # rad, constant yaw setpoint
    vehicle: VehicleParams = field(default_factory=VehicleParams)
    tether: TetherConfig = field(default_factory=TetherConfig)
    gains: ControllerGains = field(default_factory=ControllerGains)
    rdo: RdoConfig = field(default_factory=RdoConfig)
    dob: DobConfig = field(default_factory=DobConfig)
    eso: EsoConfig = field(default_factory=EsoConfig)
    disturbance: DisturbanceSchedule = field(default_factory=DisturbanceSchedule)
    noise: NoiseConfig = field(default_factory=NoiseConfig)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)

    def validate(self):
        if self.kind not in SCENARIO_KINDS:
            raise ValueError(f"kind must be one of {SCENARIO_KINDS}, got {self.kind!r}")
        if self.estimator not in ESTIMATOR_NAMES:
            raise ValueError(f"estimator must be one of {ESTIMATOR_NAMES}, "
                             f"got {self.estimator!r}")
        if self.duration <= 0.0:
            raise ValueError("duration must be positive")
        if self.dt_plant <= 0.0 or self.dt_ctrl <= 0.0:
            raise ValueError("dt_plant and dt_ctrl must be positive")
        ratio = self.dt_ctrl / self.dt_plant
        if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
            raise ValueError("dt_ctrl must be an integer multiple of dt_plant")
        if self.tau_att < 0.0:
            raise ValueError("tau_att must be non-negative")

    def n_steps(self) -> int:
        return round(self.duration / self.dt_ctrl)

    def n_substeps(self) -> int:
        return round(self.dt_ctrl / self.dt_plant)


@dataclass
class RunLog:
    """Uniformly sampled record of one run, one row per control step."""

    t: np.ndarray
    p_v: np.ndarray
    v_v: np.ndarray
    att: np.ndarray
    p_r: np.ndarray
    v_r: np.ndarray
    e_p: np.ndarray
    delta: np.ndarray
    nu: np.ndarray
    thrust: np.ndarray
    k_hat: np.ndarray
    d_hat: np.ndarray
    f_hat: np.ndarray
    f_d: np.ndarray
    released: np.ndarray
    release_time: float | None = None
    kind: str = ""
    estimator: str = ""

    def to_csv(self, path):
        """Write the run in the fixed column schema, 9 significant digits."""
        with open(path, "w") as fh:
            fh.write(",".join(CSV_COLUMNS) + "\n")
            for i in range(self.t.shape[0]):
                row = [self.t[i], *self.p_v[i], *self.p_r[i], *self.e_p[i],
                       *self.delta[i], *self.nu[i], self.thrust[i],
                       self.k_hat[i], self.d_hat[i], *self.f_hat[i],
                       *self.f_d[i]]
                fh.write(",".join(f"{x:.9g}" for x in row))
                fh.write(f",{int(self.released[i])}\n")

    @classmethod
    def from_csv(cls, path) -> "RunLog":
        """Rebuild a log from the CSV schema.

        Velocity, attitude, and reference velocity are not serialized;
        they come back as NaN.
        """
        with open(path) as fh:
            header = fh.readline().strip().split(",")
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise ValueError(f"CSV is missing columns: {', '.join(missing)}")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        col = {name: data[:, header.index(name)] for name in CSV_COLUMNS}
        n = data.shape[0]
        nan3 = np.full((n, 3), math.nan)

        def vec(*names):
            return np.column_stack([col[c] for c in names])

        released = col["released"] > 0.5
        release_time = None
        if released.any():
            release_time = float(col["t"][int(np.argmax(released))])
        return cls(
            t=col["t"], p_v=vec("px", "py", "pz"), v_v=nan3.copy(),
            att=nan3.copy(), p_r=vec("rx", "ry", "rz"), v_r=nan3.copy(),
            e_p=vec("ex", "ey", "ez"),
            delta=vec("dx_cable", "dy_cable", "dz_cable"),
            nu=vec("nu_x", "nu_y", "nu_z"), thrust=col["T"],
            k_hat=col["K_hat"], d_hat=col["d_hat"],
            f_hat=vec("Fhat_x", "Fhat_y", "Fhat_z"),
            f_d=vec("Fd_x", "Fd_y", "Fd_z"), released=released,
            release_time=release_time)


def rk4_step(state, dynamics, dt: float, t: float = 0.0):
    """Classical 4th-order step of state' = dynamics(t, state)."""
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    y = np.asarray(state, dtype=float)
    k1 = np.asarray(dynamics(t, y))
    k2 = np.asarray(dynamics(t + 0.5 * dt, y + 0.5 * dt * k1))
    k3 = np.asarray(dynamics(t + 0.5 * dt, y + 0.5 * dt * k2))
    k4 = np.asarray(dynamics(t + dt, y + dt * k3))
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def make_estimator(cfg: ScenarioConfig):
    """Estimator instance for the configured name; None for the oracle
    (the loop substitutes the true disturbance)."""
    if cfg.estimator == "rdo":
        return RdoEstimator(cfg.rdo, cfg.vehicle)
    if cfg.estimator == "dob":
        return DobEstimator(cfg.dob, cfg.vehicle)
    if cfg.estimator == "eso":
        return EsoEstimator(cfg.eso, cfg.vehicle)
    if cfg.estimator == "oracle":
        return None
    raise ValueError(f"unknown estimator {cfg.estimator!r}")


def _measure(state, params, tether, noise, rng) -> Measurement:
    p = state.p_v.copy()
    v = state.v_v.copy()
    if noise.pos_std > 0.0:
        p += rng.normal(0.0, noise.pos_std, 3)
    if noise.vel_std > 0.0:
        v += rng.normal(0.0, noise.vel_std, 3)
    ext = cable_extension(VehicleState(p, v, state.att), params, tether)
    return Measurement(p, v, ext.delta)


def _interval_rhs(t, y, ctx):
    """Derivative of (p, v, att) as 9 scalars; hot path of the loop."""
    (m, g, thrust, tphi, ttheta, tpsi, inv_tau, k_eff, l0,
     p0x, p0y, p0z, pbx, pby, pbz, has_pb, d0, d1, t_step, has_step) = ctx
    px, py, pz, vx, vy, vz, phi, theta, psi = y
    sph, cph = math.sin(phi), math.cos(phi)
    sth, cth = math.sin(theta), math.cos(theta)
    sps, cps = math.sin(psi), math.cos(psi)
    r13 = cps * sth * cph + sps * sph
    r23 = sps * sth * cph - cps * sph
    r33 = cth * cph
    amag = thrust / m
    ax = -amag * r13
    ay = -amag * r23
    az = -amag * r33 + g
    if has_pb:
        bx = px + cps * cth * pbx + (cps * sth * sph - sps * cph) * pby + r13 * pbz - p0x
        by = py + sps * cth * pbx + (sps * sth * sph + cps * cph) * pby + r23 * pbz - p0y
        bz = pz + (-sth) * pbx + cth * sph * pby + r33 * pbz - p0z
    else:
        bx, by, bz = px - p0x, py - p0y, pz - p0z
    if k_eff > 0.0:
        dist = math.sqrt(bx * bx + by * by + bz * bz)
        stretch = dist - l0
        if stretch > 0.0:
            coef = k_eff * stretch / (dist * m)
            ax -= coef * bx
            ay -= coef * by
            az -= coef * bz
    d = d0 if (not has_step or t < t_step) else d1
    az -= d / m
    if inv_tau > 0.0:
        aphi = (tphi - phi) * inv_tau
        atheta = (ttheta - theta) * inv_tau
        apsi = (tpsi - psi) * inv_tau
    else:
        aphi = atheta = apsi = 0.0
    return (vx, vy, vz, ax, ay, az, aphi, atheta, apsi)


def _integrate_interval(state, cmd, t0, cfg, params, tether) -> VehicleState:
    """RK4 over one control interval with thrust and command held."""
    dt = cfg.dt_plant
    has_pb = bool(np.any(params.p_b != 0.0))
    ctx = (params.m, params.g, cmd.thrust, cmd.phi_d, cmd.theta_d, cmd.psi_d,
           (1.0 / cfg.tau_att) if cfg.tau_att > 0.0 else 0.0,
           tether.stiffness(), tether.l0,
           tether.p0[0], tether.p0[1], tether.p0[2],
           params.p_b[0], params.p_b[1], params.p_b[2], has_pb,
           cfg.disturbance.d0,
           cfg.disturbance.d1 if cfg.disturbance.d1 is not None else 0.0,
           cfg.disturbance.t_step, cfg.disturbance.d1 is not None)
    if cfg.tau_att == 0.0:
        att = (cmd.phi_d, cmd.theta_d, cmd.psi_d)
    else:
        att = tuple(state.att)
    y = (*state.p_v, *state.v_v, *att)
    h2, h6 = 0.5 * dt, dt / 6.0
    for i in range(cfg.n_substeps()):
        t = t0 + i * dt
        k1 = _interval_rhs(t, y, ctx)
        k2 = _interval_rhs(t + h2, tuple(a + h2 * b for a, b in zip(y, k1)), ctx)
        k3 = _interval_rhs(t + h2, tuple(a + h2 * b for a, b in zip(y, k2)), ctx)
        k4 = _interval_rhs(t + dt, tuple(a + dt * b for a, b in zip(y, k3)), ctx)
        y = tuple(a + h6 * (b + 2.0 * c + 2.0 * d + e)
                  for a, b, c, d, e in zip(y, k1, k2, k3, k4))
    return VehicleState(np.array(y[0:3]), np.array(y[3:6]), np.array(y[6:9]))


def run(cfg: ScenarioConfig) -> RunLog:
    """Simulate one scenario; deterministic for a fixed config + seed."""
    cfg.validate()
    params = cfg.vehicle
    tether = replace(cfg.tether)    # local copy: the release latch mutates it
    mech = MechanismModel(f_crit=tether.F_crit, released=tether.released)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.n_steps()
    estimator = make_estimator(cfg)

    ref0 = reference(cfg.kind, 0.0, cfg.reference)
    state = VehicleState(ref0.p_r.copy(), ref0.v_r.copy(),
                         np.array([0.0, 0.0, cfg.psi_d]))

    log_t = np.empty(n + 1)
    log_p = np.empty((n + 1, 3))
    log_v = np.empty((n + 1, 3))
    log_att = np.empty((n + 1, 3))
    log_pr = np.empty((n + 1, 3))
    log_vr = np.empty((n + 1, 3))
    log_e = np.empty((n + 1, 3))
    log_delta = np.empty((n + 1, 3))
    log_nu = np.empty((n + 1, 3))
    log_thrust = np.empty(n + 1)
    log_khat = np.empty(n + 1)
    log_dhat = np.empty(n + 1)
    log_fhat = np.empty((n + 1, 3))
    log_fd = np.empty((n + 1, 3))
    log_rel = np.zeros(n + 1, dtype=bool)

    def true_force(t):
        ext = cable_extension(state, params, tether)
        return ext.delta, disturbance_force(ext.delta, cfg.disturbance.value(t), tether)

    meas = _measure(state, params, tether, cfg.noise, rng)
    if estimator is None:
        _, f_d0 = true_force(0.0)
        est = DisturbanceEstimate(math.nan, math.nan, f_d0)
    else:
        est = estimator.reset(meas)

    for k in range(n + 1):
        t = k * cfg.dt_ctrl
        ref = reference(cfg.kind, t, cfg.reference)
        nu = pd_control(ref.p_r - meas.p_v, ref.v_r - meas.v_v, est.f_hat,
                        cfg.gains, params)
        cmd = allocate(nu, cfg.psi_d)
        delta_true, f_d = true_force(t)
        log_t[k] = t
        log_p[k] = state.p_v
        log_v[k] = state.v_v
        log_att[k] = state.att
        log_pr[k] = ref.p_r
        log_vr[k] = ref.v_r
        log_e[k] = ref.p_r - state.p_v
        log_delta[k] = delta_true
        log_nu[k] = nu
        log_thrust[k] = cmd.thrust
        log_khat[k] = est.K_hat
        log_dhat[k] = est.d_hat
        log_fhat[k] = est.f_hat
        log_fd[k] = f_d
        log_rel[k] = mech.released
        if k == n:
            break

        state = _integrate_interval(state, cmd, t, cfg, params, tether)
        t_next = (k + 1) * cfg.dt_ctrl
        worst = max(np.max(np.abs(state.p_v)), np.max(np.abs(state.v_v)))
        if not math.isfinite(worst) or worst > BLOWUP_LIMIT:
            raise BlowUpError(t_next, f"max |p|,|v| = {worst:g} with "
                              f"estimator {cfg.estimator!r}")
        ext = cable_extension(state, params, tether)
        tension = tether.stiffness() * float(np.linalg.norm(ext.delta))
        if mech.check(tension, t_next):
            tether.released = True
        meas = _measure(state, params, tether, cfg.noise, rng)
        if estimator is None:
            _, f_d_next = true_force(t_next)
            est = DisturbanceEstimate(math.nan, math.nan, f_d_next)
        else:
            est = estimator.step(meas, nu, cfg.dt_ctrl)

    return RunLog(log_t, log_p, log_v, log_att, log_pr, log_vr, log_e,
                  log_delta, log_nu, log_thrust, log_khat, log_dhat,
                  log_fhat, log_fd, log_rel, mech.release_time,
                  cfg.kind, cfg.estimator)
