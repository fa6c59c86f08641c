"""Simulation suite for a quadrotor on an elastic tether.

A PD tracking controller with disturbance feed-forward is closed around
a point-mass plant with a spring-like cable force.  Three disturbance
estimators are provided: a stiffness-estimating observer that fuses all
translational channels (rdo), a first-order reduced disturbance
observer (dob), and a 12-state extended state observer (eso).  The
simengine module runs scenario presets (circle, helix, extraction) and
serializes logs to a fixed CSV schema; metrics and cli expose ISE-style
comparisons and a command-line front end.
"""

from .controller import AllocationError, ControllerGains, allocate, pd_control
from .metrics import BatchMetrics, RunMetrics, batch_stats, ise, max_error
from .model import (TetherConfig, VehicleParams, VehicleState,
                    cable_extension, disturbance_force, rotation_matrix,
                    translational_accel)
from .observers import (DisturbanceEstimate, DobConfig, EsoConfig,
                        Measurement, RdoConfig, RdoState, rdo_estimate,
                        rdo_gains, rdo_step)
from .simengine import (BlowUpError, DisturbanceSchedule, MechanismModel,
                        NoiseConfig, ReferenceConfig, RunLog, ScenarioConfig,
                        reference, rk4_step, run)

__version__ = "0.1.0"
