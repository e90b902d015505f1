"""Physical parameters of the robot.

The robot is a rolling spherical hull carrying a yoke (half-circle frame
spanning a diameter) and a point-mass pendulum hung from the yoke's
center.  All quantities are SI.  The defaults form a desk-scale reference
set used by the bundled scenarios and the test suite; every field can be
overridden through the scenario config.
"""

from dataclasses import dataclass, field, fields

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class RobotParams:
    """Masses, radii and gravity.

    Attributes:
        m_H: hull mass [kg]
        m_Y: yoke mass [kg]
        m_P: pendulum bob mass [kg]
        R_s: hull (sphere) radius [m]
        R_p: pendulum arm length [m]
        g: gravitational acceleration [m/s^2]
    """

    m_H: float = 1.5
    m_Y: float = 1.0
    m_P: float = 0.5
    R_s: float = 0.15
    R_p: float = 0.10
    g: float = 9.81

    def __post_init__(self):
        self.validate()

    def validate(self):
        """Reject non-physical parameter sets.

        Raises:
            ConfigError: if any field is not strictly positive, if the
                pendulum does not fit inside the hull, or if the pendulum
                angle dynamics are singular (m_P * R_p^2 == 0).
        """
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v) or v <= 0.0:
                if f.name in ("m_P", "R_p") and v == 0.0:
                    raise ConfigError(
                        f"{f.name} = 0 makes the pendulum inertia m_P*R_p^2 "
                        "singular; the pendulum angle has no dynamics to "
                        "integrate"
                    )
                raise ConfigError(f"{f.name} must be finite and > 0, got {v!r}")
        if self.R_p >= self.R_s:
            raise ConfigError(
                f"pendulum arm R_p = {self.R_p} must be shorter than the "
                f"hull radius R_s = {self.R_s}"
            )

    @property
    def total_mass(self) -> float:
        return self.m_H + self.m_Y + self.m_P


#: Reference parameter set used by the bundled scenarios and tests.
DEFAULT_PARAMS = RobotParams()


@dataclass(frozen=True)
class InertiaSet:
    """Body-frame inertia tensors, each about the respective body's COM.

    The hull is a thin spherical shell, the yoke a half circle of radius
    R_s lying in its body y-z plane, and the pendulum a point mass at the
    end of a massless arm (zero inertia about the arm axis).
    """

    I_H: np.ndarray = field(repr=False)
    I_Y: np.ndarray = field(repr=False)
    I_P: np.ndarray = field(repr=False)


def inertia_set(p: RobotParams) -> InertiaSet:
    """Build the three body-frame inertia tensors for a parameter set."""
    I_H = (2.0 / 3.0) * p.m_H * p.R_s**2 * np.eye(3)
    I_Y = 0.25 * np.diag([p.m_Y * p.R_s**2, 2.0 * p.m_Y * p.R_s**2, p.m_Y * p.R_s**2])
    I_P = (1.0 / 3.0) * np.diag([p.m_P * p.R_p**2, 0.0, p.m_P * p.R_p**2])
    return InertiaSet(I_H=I_H, I_Y=I_Y, I_P=I_P)
