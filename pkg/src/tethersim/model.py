"""Physical model of a quadrotor on an elastic tether.

Frame convention: right-handed world frame with e3 = [0, 0, 1] pointing
*along gravity* (z-down).  Gravity contributes +g*e3 to the acceleration
and thrust acts along -e3 of the body frame, so hover requires the
vertical virtual force nu_z = -m*g.

Translational dynamics:

    p_ddot = R(phi, theta, psi) @ [0, 0, -T] / m + g*e3 + F_d / m
    F_d    = -d*e3 - K*Delta

where d is a lumped vertical disturbance force and Delta is the vector
extension of the cable beyond its natural length (zero when slack).
"""

from dataclasses import dataclass, field
import math

import numpy as np

E3 = np.array([0.0, 0.0, 1.0])


def _vec3(value) -> np.ndarray:
    v = np.asarray(value, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"expected 3-vector, got shape {v.shape}")
    return v


@dataclass
class VehicleParams:
    """Mass properties and cable attachment geometry of the vehicle."""

    m: float = 1.89            # mass [kg]
    g: float = 9.81            # gravitational acceleration [m/s^2]
    p_b: np.ndarray = field(default_factory=lambda: np.zeros(3))  # attachment offset, body frame [m]

    def __post_init__(self):
        self.p_b = _vec3(self.p_b)
        if self.m <= 0.0:
            raise ValueError("vehicle mass m must be positive")
        if self.g <= 0.0:
            raise ValueError("gravitational acceleration g must be positive")


@dataclass
class TetherConfig:
    """Elastic tether between a fixed anchor and the vehicle.

    F_crit is the release threshold of the overcentre mechanism holding
    the anchor end; math.inf disables the mechanism.  `released` latches
    true once the threshold is exceeded and never returns to false.
    """

    K_true: float = 16.5       # stiffness [N/m]
    l0: float = 1.4            # unstrained length [m]
    p0: np.ndarray = field(default_factory=lambda: np.zeros(3))   # anchor, world frame [m]
    F_crit: float = math.inf   # mechanism release tension [N]
    released: bool = False

    def __post_init__(self):
        self.p0 = _vec3(self.p0)
        if self.K_true < 0.0:
            raise ValueError("tether stiffness K_true must be non-negative")
        if self.l0 <= 0.0:
            raise ValueError("tether natural length l0 must be positive")
        if self.F_crit <= 0.0:
            raise ValueError("mechanism threshold F_crit must be positive")

    def stiffness(self) -> float:
        """Effective stiffness: zero after the mechanism has released."""
        return 0.0 if self.released else self.K_true


@dataclass
class VehicleState:
    """Translational state plus attitude angles (roll, pitch, yaw) [rad]."""

    p_v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    v_v: np.ndarray = field(default_factory=lambda: np.zeros(3))
    att: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        self.p_v = _vec3(self.p_v)
        self.v_v = _vec3(self.v_v)
        self.att = _vec3(self.att)


@dataclass
class CableExtension:
    """Vector extension of the cable; delta = 0 exactly when slack."""

    delta: np.ndarray
    taut: bool


def rotation_matrix(att) -> np.ndarray:
    """Body-to-world rotation for attitude angles (phi, theta, psi).

    Composition order is yaw-pitch-roll: R = Rz(psi) @ Ry(theta) @ Rx(phi).
    Satisfies R.T @ R = I, det R = 1 and R(0, 0, 0) = I.
    """
    phi, theta, psi = float(att[0]), float(att[1]), float(att[2])
    cphi, sphi = math.cos(phi), math.sin(phi)
    cth, sth = math.cos(theta), math.sin(theta)
    cpsi, spsi = math.cos(psi), math.sin(psi)
    return np.array([
        [cth * cpsi, sphi * sth * cpsi - cphi * spsi, cphi * sth * cpsi + sphi * spsi],
        [cth * spsi, sphi * sth * spsi + cphi * cpsi, cphi * sth * spsi - sphi * cpsi],
        [-sth,       sphi * cth,                      cphi * cth],
    ])


def attachment_point(state: VehicleState, params: VehicleParams,
                     tether: TetherConfig) -> np.ndarray:
    """World position of the cable attachment relative to the anchor."""
    return state.p_v + rotation_matrix(state.att) @ params.p_b - tether.p0


def cable_extension(state: VehicleState, params: VehicleParams,
                    tether: TetherConfig) -> CableExtension:
    """Cable extension vector Delta.

    Slack (including the degenerate attachment-on-anchor case and a
    released mechanism) gives Delta = 0; taut gives the radial vector of
    length ||p_b^E|| - l0 along the anchor-to-attachment direction.
    """
    if tether.released:
        return CableExtension(np.zeros(3), False)
    p_be = attachment_point(state, params, tether)
    dist = float(np.linalg.norm(p_be))
    stretch = dist - tether.l0
    if stretch <= 0.0:
        return CableExtension(np.zeros(3), False)
    return CableExtension(stretch / dist * p_be, True)


def disturbance_force(delta, d: float, tether: TetherConfig) -> np.ndarray:
    """Total disturbance force F_d = -d*e3 - K*Delta (K = 0 after release)."""
    return -d * E3 - tether.stiffness() * np.asarray(delta, dtype=float)


def translational_accel(state: VehicleState, thrust: float,
                        tether: TetherConfig, d: float,
                        params: VehicleParams) -> np.ndarray:
    """Acceleration of the vehicle under thrust, gravity and disturbances."""
    if thrust < 0.0:
        raise ValueError("thrust must be non-negative")
    ext = cable_extension(state, params, tether)
    f_d = disturbance_force(ext.delta, d, tether)
    thrust_world = rotation_matrix(state.att) @ np.array([0.0, 0.0, -thrust])
    return thrust_world / params.m + params.g * E3 + f_d / params.m
