"""Pendulum-position and roll-speed controllers plus the setpoint schedule.

Both laws are memoryless: torques depend only on the current state and
setpoints, so they can be re-evaluated freely inside integrator stages.
Gains are chosen high enough that the pendulum tracks its reference
almost rigidly at desk scale, which is what makes the open-loop wobble
of the hull visible in the first place.
"""

from bisect import bisect_right
from dataclasses import dataclass
from math import sin

from .dynamics import SBETA, SBETAD, STHETA
from .errors import ConfigError
from .params import RobotParams


@dataclass(frozen=True)
class PendulumCtrl:
    """PD law on the pendulum angle with optional gravity feedforward.

    Attributes:
        kp: proportional gain [N*m/rad]
        kd: derivative gain [N*m*s/rad]
        feedforward: add the torque that cancels gravity on the bob
        torque_limit: symmetric saturation [N*m]
    """

    kp: float = 20.0
    kd: float = 2.0
    feedforward: bool = True
    torque_limit: float = 50.0

    def __post_init__(self):
        if self.kp < 0.0 or self.kd < 0.0:
            raise ConfigError("pendulum controller gains must be >= 0")
        if self.torque_limit <= 0.0:
            raise ConfigError("pendulum torque_limit must be > 0")


@dataclass(frozen=True)
class SpeedCtrl:
    """Proportional law on the hull spin rate."""

    kp: float = 10.0
    torque_limit: float = 50.0

    def __post_init__(self):
        if self.kp < 0.0:
            raise ConfigError("speed controller gain must be >= 0")
        if self.torque_limit <= 0.0:
            raise ConfigError("speed torque_limit must be > 0")


def _clamp(v: float, lim: float) -> float:
    if v > lim:
        return lim
    if v < -lim:
        return -lim
    return v


def pendulum_torque(cfg: PendulumCtrl, p: RobotParams, beta_ref: float, x) -> float:
    """Torque on the pendulum pivot for a reference swing angle.

    The feedforward term m_P g R_p sin(theta + beta) is the gravity
    torque on the bob about the pivot; adding it makes beta == beta_ref
    with betad == 0 an exact steady state of the closed loop.
    """
    T = cfg.kp * (beta_ref - x[SBETA]) - cfg.kd * x[SBETAD]
    if cfg.feedforward:
        T += p.m_P * p.g * p.R_p * sin(x[STHETA] + x[SBETA])
    return _clamp(T, cfg.torque_limit)


def speed_torque(cfg: SpeedCtrl, psid_ref: float, psid: float) -> float:
    """Torque on the hull about its spin axis tracking a roll-rate setpoint."""
    return _clamp(cfg.kp * (psid_ref - psid), cfg.torque_limit)


@dataclass(frozen=True)
class Segment:
    """One piece of the piecewise-constant setpoint schedule."""

    t_start: float
    beta_ref: float  # rad
    psid_ref: float  # rad/s


class Schedule:
    """Piecewise-constant setpoints, right-continuous at breakpoints."""

    def __init__(self, segments):
        segments = list(segments)
        if not segments:
            raise ConfigError("schedule needs at least one segment")
        if segments[0].t_start != 0.0:
            raise ConfigError(
                f"first schedule segment must start at t=0, got {segments[0].t_start}"
            )
        starts = [s.t_start for s in segments]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ConfigError("schedule segment starts must be strictly increasing")
        self.segments = tuple(segments)
        self._starts = starts

    def lookup(self, t: float):
        """Active (beta_ref, psid_ref) at time t; the new value applies
        exactly at a breakpoint."""
        if t < self._starts[0]:
            raise ConfigError(f"schedule lookup at t={t} before first segment")
        seg = self.segments[bisect_right(self._starts, t) - 1]
        return seg.beta_ref, seg.psid_ref

    def breakpoints(self, t_end: float):
        """Segment boundaries falling strictly inside (0, t_end)."""
        return [s for s in self._starts[1:] if s < t_end]
