"""Tracking controller: PD law with disturbance feed-forward and allocation.

The outer loop commands a world-frame virtual force

    nu = m*(k_p*e_p + k_d*e_p_dot - g*e3) - F_hat_d

which is converted to a thrust magnitude and attitude setpoints by
inverting nu = R(phi, theta, psi) @ [0, 0, -T].  The inner attitude loop
is replaced by a configurable first-order lag.
"""

from dataclasses import dataclass

import numpy as np

from .model import E3, VehicleParams


class AllocationError(ValueError):
    """Commanded virtual force lies in the invalid half-space (nu_z >= 0)."""


@dataclass
class ControllerGains:
    k_p: float = 2.5    # proportional gain [1/s^2]
    k_d: float = 5.0    # derivative gain [1/s]

    def __post_init__(self):
        if self.k_p <= 0.0 or self.k_d <= 0.0:
            raise ValueError("controller gains k_p, k_d must be positive")


@dataclass
class ThrustAttitudeCommand:
    thrust: float
    phi_d: float
    theta_d: float
    psi_d: float


def error_dynamics_matrix(gains: ControllerGains) -> np.ndarray:
    """Per-axis closed-loop error matrix [[0, 1], [-k_p, -k_d]]."""
    return np.array([[0.0, 1.0], [-gains.k_p, -gains.k_d]])


def pd_control(e_p, e_p_dot, f_hat, gains: ControllerGains,
               params: VehicleParams) -> np.ndarray:
    """Virtual force command from tracking errors and the force estimate."""
    e_p = np.asarray(e_p, dtype=float)
    e_p_dot = np.asarray(e_p_dot, dtype=float)
    f_hat = np.asarray(f_hat, dtype=float)
    return params.m * (gains.k_p * e_p + gains.k_d * e_p_dot
                       - params.g * E3) - f_hat


def allocate(nu, psi_d: float = 0.0) -> ThrustAttitudeCommand:
    """Convert a virtual force into thrust and attitude setpoints.

    Exact inverse of nu = R(phi, theta, psi_d) @ [0, 0, -T]: the thrust
    axis -nu/||nu|| is expressed in the yaw-rotated frame, from which
    roll and pitch follow directly.  Requires nu_z < 0 so that the
    commanded tilt stays inside (-pi/2, pi/2).
    """
    nu = np.asarray(nu, dtype=float)
    if nu[2] >= 0.0:
        raise AllocationError(f"virtual force must have nu_z < 0, got nu_z={nu[2]:g}")
    thrust = float(np.linalg.norm(nu))
    u = -nu / thrust
    cpsi, spsi = np.cos(psi_d), np.sin(psi_d)
    a = cpsi * u[0] + spsi * u[1]    # tilt component along yawed x
    b = -spsi * u[0] + cpsi * u[1]   # tilt component along yawed y
    phi_d = -np.arcsin(b)
    theta_d = np.arctan2(a, u[2])
    return ThrustAttitudeCommand(thrust, float(phi_d), float(theta_d), float(psi_d))


def attitude_step(att, command: ThrustAttitudeCommand, tau_att: float,
                  dt: float) -> np.ndarray:
    """Advance the attitude one control period toward the commanded angles.

    First-order lag with time constant tau_att; tau_att = 0 snaps to the
    command (idealised inner loop).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if tau_att < 0.0:
        raise ValueError("tau_att must be non-negative")
    target = np.array([command.phi_d, command.theta_d, command.psi_d])
    if tau_att == 0.0:
        return target
    att = np.asarray(att, dtype=float)
    return att + (dt / tau_att) * (target - att)
