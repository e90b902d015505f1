"""Rotation kinematics of the hull / yoke / pendulum chain.

Conventions: the world frame G has y pointing up; the ground is the x-z
plane.  Orientation is parameterized by a heading angle phi about the
world y axis, a lateral tilt theta about the (already headed) x axis, a
forward roll psi about the hull z axis, and the pendulum swing beta,
measured relative to the yoke so that the pendulum tilts by theta + beta
total.  All angles in radians, right-handed.
"""

from dataclasses import dataclass
from math import cos, sin

import numpy as np

from .params import RobotParams

_AXIS_INDEX = {"X": 0, "Y": 1, "Z": 2}


@dataclass(frozen=True)
class EulerState:
    """Orientation angles and their rates. Angles rad, rates rad/s."""

    phi: float = 0.0
    theta: float = 0.0
    psi: float = 0.0
    beta: float = 0.0
    phid: float = 0.0
    thetad: float = 0.0
    psid: float = 0.0
    betad: float = 0.0


def rot_axis(axis: str, alpha: float) -> np.ndarray:
    """Right-handed rotation by alpha about a principal axis ("X", "Y", "Z")."""
    i = _AXIS_INDEX[axis]
    c, s = cos(alpha), sin(alpha)
    R = np.eye(3)
    j, k = (i + 1) % 3, (i + 2) % 3
    R[j, j] = c
    R[k, k] = c
    R[k, j] = s
    R[j, k] = -s
    return R


def frame_rotations(e: EulerState):
    """Rotations taking body coordinates to world coordinates.

    The yoke frame tilts with R_Y(phi) R_X(theta); the pendulum hangs a
    further beta about the same x axis, so its rotation collapses to
    R_Y(phi) R_X(theta + beta); the hull additionally spins by psi about
    the yoke z axis.

    Returns:
        (R_GY, R_GP, R_GH) as 3x3 arrays.
    """
    R_y_phi = rot_axis("Y", e.phi)
    R_GY = R_y_phi @ rot_axis("X", e.theta)
    R_GP = R_y_phi @ rot_axis("X", e.theta + e.beta)
    R_GH = R_GY @ rot_axis("Z", e.psi)
    return R_GY, R_GP, R_GH


def omega_yoke(e: EulerState) -> np.ndarray:
    """Yoke angular velocity in yoke body coordinates."""
    return np.array(
        [e.thetad, e.phid * cos(e.theta), -e.phid * sin(e.theta)]
    )


def omega_pendulum(e: EulerState) -> np.ndarray:
    """Pendulum angular velocity in pendulum body coordinates."""
    sg = e.theta + e.beta
    sgd = e.thetad + e.betad
    return np.array([sgd, e.phid * cos(sg), -e.phid * sin(sg)])


def omega_hull(e: EulerState) -> np.ndarray:
    """Hull angular velocity in hull body coordinates."""
    cp, sp = cos(e.psi), sin(e.psi)
    ct, st = cos(e.theta), sin(e.theta)
    return np.array(
        [
            e.thetad * cp + e.phid * ct * sp,
            e.phid * cp * ct - e.thetad * sp,
            e.psid - e.phid * st,
        ]
    )


def pendulum_com_state(
    e: EulerState,
    X: float,
    Z: float,
    Xd: float,
    Zd: float,
    p: RobotParams,
):
    """World position and velocity of the pendulum bob.

    The bob hangs a distance R_p below the sphere center along the
    pendulum frame's -y axis; the sphere center itself sits at height R_s
    above the contact plane.

    Args:
        e: orientation angles and rates.
        X, Z: sphere center ground-plane position [m].
        Xd, Zd: sphere center ground-plane velocity [m/s].
        p: robot parameters.

    Returns:
        (r, v): bob position and velocity in world coordinates.
    """
    _, R_GP, _ = frame_rotations(e)
    arm_world = R_GP @ np.array([0.0, -p.R_p, 0.0])
    r = np.array([X, p.R_s, Z]) + arm_world
    omega_world = R_GP @ omega_pendulum(e)
    v = np.array([Xd, 0.0, Zd]) + np.cross(omega_world, arm_world)
    return r, v


def skew(v: np.ndarray) -> np.ndarray:
    """Cross-product matrix: skew(v) @ u == cross(v, u)."""
    return np.array(
        [
            [0.0, -v[2], v[1]],
            [v[2], 0.0, -v[0]],
            [-v[1], v[0], 0.0],
        ]
    )


def vee(W: np.ndarray) -> np.ndarray:
    """Inverse of skew for a skew-symmetric 3x3 matrix."""
    return np.array([W[2, 1], W[0, 2], W[1, 0]])
