"""Dynamics simulator for a pendulum-driven spherical rolling robot.

The package models a spherical hull rolling without slipping on a flat
floor, steered by an internal yoke-mounted pendulum.  It provides the
full constrained equations of motion, simple pendulum-position and
roll-speed controllers, an adaptive explicit integrator, and analysis
routines for the wobble and precession behavior seen in turning
maneuvers.

A compiled evaluation core is used automatically when the optional
extension module built from _core.pyx is importable; otherwise the pure
NumPy implementation is used.  See spherebot.backend.
"""

__version__ = "0.1.0"

from .params import DEFAULT_PARAMS, RobotParams
from .kinematics import EulerState
from .errors import (
    ConfigError,
    DegenerateGeometryError,
    GimbalLockError,
    SingularDynamicsError,
    SphereBotError,
    StiffnessError,
)

__all__ = [
    "DEFAULT_PARAMS",
    "RobotParams",
    "EulerState",
    "SphereBotError",
    "ConfigError",
    "GimbalLockError",
    "SingularDynamicsError",
    "StiffnessError",
    "DegenerateGeometryError",
    "__version__",
]
