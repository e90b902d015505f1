"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures during integration exit with 1.
"""


class SphereBotError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(SphereBotError):
    """Invalid scenario configuration, parameter set, or schedule."""


class GimbalLockError(SphereBotError):
    """Lateral tilt reached the Euler-angle singularity guard band."""


class StiffnessError(SphereBotError):
    """Adaptive step size collapsed below the underflow floor."""


class SingularDynamicsError(SphereBotError):
    """The saddle system for the accelerations could not be solved."""


class DegenerateGeometryError(SphereBotError):
    """Path-fitting input is degenerate (collinear or spanning too little arc)."""
