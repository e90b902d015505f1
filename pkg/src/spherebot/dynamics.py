"""Constrained equations of motion of the rolling robot.

The configuration is q = (X, Z, phi, theta, psi, beta) with the sphere
center at (X, R_s, Z).  Rolling without slipping couples the center
velocity to the angle rates through two Pfaffian constraints A(q) qd = 0,
handled by solving the saddle system

    [ M  A^T ] [ qdd  ]   [ Q - b      ]
    [ A   0  ] [ -lam ] = [ -Adot qd   ]

for the accelerations and constraint impulses together.  M and b come
from machine-derived closed forms (_eom_terms); the energy functions here
are computed independently through the kinematics module so the test
oracles never touch the generated code path.
"""

from math import cos, sin, pi

import numpy as np

from . import _eom_terms
from .errors import GimbalLockError, SingularDynamicsError
from .kinematics import EulerState, frame_rotations, omega_hull, omega_pendulum, omega_yoke, pendulum_com_state
from .params import RobotParams, inertia_set

# generalized-coordinate slots
QX, QZ, QPHI, QTHETA, QPSI, QBETA = range(6)
NQ = 6

# state-vector slots: x = (phi, theta, psi, X, Z, phid, thetad, psid, Xd, Zd, beta, betad)
SPHI, STHETA, SPSI, SX, SZ, SPHID, STHETAD, SPSID, SXD, SZD, SBETA, SBETAD = range(12)
STATE_SIZE = 12

# lateral tilt must stay clear of the Euler singularity at +-pi/2
GIMBAL_MARGIN = 1e-3
TILT_LIMIT = pi / 2 - GIMBAL_MARGIN


def check_tilt(theta: float):
    """Raise GimbalLockError when the tilt enters the guard band."""
    if abs(theta) >= TILT_LIMIT:
        raise GimbalLockError(
            f"lateral tilt |theta| = {abs(theta):.6f} rad reached the "
            f"singularity guard at {TILT_LIMIT:.6f} rad"
        )


def state_to_coords(x):
    """Split a 12-entry state vector into (q, qd)."""
    x = np.asarray(x, dtype=float)
    q = np.array([x[SX], x[SZ], x[SPHI], x[STHETA], x[SPSI], x[SBETA]])
    qd = np.array([x[SXD], x[SZD], x[SPHID], x[STHETAD], x[SPSID], x[SBETAD]])
    return q, qd


def coords_to_state(q, qd):
    """Inverse of state_to_coords."""
    x = np.empty(STATE_SIZE)
    x[SPHI], x[STHETA], x[SPSI] = q[QPHI], q[QTHETA], q[QPSI]
    x[SX], x[SZ] = q[QX], q[QZ]
    x[SPHID], x[STHETAD], x[SPSID] = qd[QPHI], qd[QTHETA], qd[QPSI]
    x[SXD], x[SZD] = qd[QX], qd[QZ]
    x[SBETA], x[SBETAD] = q[QBETA], qd[QBETA]
    return x


def _euler_state(q, qd) -> EulerState:
    return EulerState(
        phi=q[QPHI], theta=q[QTHETA], psi=q[QPSI], beta=q[QBETA],
        phid=qd[QPHI], thetad=qd[QTHETA], psid=qd[QPSI], betad=qd[QBETA],
    )


def kinetic_energy(p: RobotParams, q, qd) -> float:
    """Total kinetic energy, assembled body by body from the kinematics.

    Hull and yoke translate with the sphere center at [Xd, 0, Zd]; the
    pendulum bob velocity comes from pendulum_com_state.  Rotational
    parts use the body-frame inertia tensors.
    """
    check_tilt(q[QTHETA])
    e = _euler_state(q, qd)
    I = inertia_set(p)
    _, v_P = pendulum_com_state(e, q[QX], q[QZ], qd[QX], qd[QZ], p)
    v_c2 = qd[QX] ** 2 + qd[QZ] ** 2
    w_H, w_Y, w_P = omega_hull(e), omega_yoke(e), omega_pendulum(e)
    return (
        0.5 * (p.m_H + p.m_Y) * v_c2
        + 0.5 * p.m_P * float(v_P @ v_P)
        + 0.5 * float(w_H @ I.I_H @ w_H)
        + 0.5 * float(w_Y @ I.I_Y @ w_Y)
        + 0.5 * float(w_P @ I.I_P @ w_P)
    )


def potential_energy(p: RobotParams, q) -> float:
    """Gravitational energy, datum at the sphere-center height.

    Only the bob moves vertically; the yoke COM sits at the datum, so its
    contribution is identically zero and the hull's is constant.
    """
    e = EulerState(phi=q[QPHI], theta=q[QTHETA], psi=q[QPSI], beta=q[QBETA])
    _, R_GP, _ = frame_rotations(e)
    bob_height = (R_GP @ np.array([0.0, -p.R_p, 0.0]))[1]
    return p.m_P * p.g * bob_height + p.m_Y * p.g * 0.0


def mass_matrix(p: RobotParams, q) -> np.ndarray:
    """Symmetric positive-definite 6x6 generalized mass matrix."""
    check_tilt(q[QTHETA])
    M = np.empty(36)
    _eom_terms.fill_mass(M, p.m_H, p.m_Y, p.m_P, p.R_s, p.R_p, q[QPHI], q[QTHETA], q[QBETA])
    return M.reshape(NQ, NQ)


def bias_vector(p: RobotParams, q, qd) -> np.ndarray:
    """Velocity-product and gravity terms b with EOM form M qdd + b = Q + A^T lam."""
    check_tilt(q[QTHETA])
    b = np.empty(NQ)
    _eom_terms.fill_bias(
        b, p.m_H, p.m_Y, p.m_P, p.R_s, p.R_p, p.g,
        q[QPHI], q[QTHETA], q[QBETA],
        qd[QPHI], qd[QTHETA], qd[QPSI], qd[QBETA], qd[QX], qd[QZ],
    )
    return b


def constraint_rows(p: RobotParams, q, qd):
    """Rolling-constraint matrix A(q) and its time derivative Adot(q, qd).

    A qd = 0 encodes that the contact point under the sphere center has
    zero velocity; Adot is needed for the acceleration-level equation
    A qdd + Adot qd = 0.
    """
    sphi, cphi = sin(q[QPHI]), cos(q[QPHI])
    sth, cth = sin(q[QTHETA]), cos(q[QTHETA])
    R = p.R_s
    phid, thetad = qd[QPHI], qd[QTHETA]
    A = np.zeros((2, NQ))
    A[0, QX] = 1.0
    A[0, QTHETA] = -R * sphi
    A[0, QPSI] = R * cphi * cth
    A[1, QZ] = 1.0
    A[1, QTHETA] = -R * cphi
    A[1, QPSI] = -R * sphi * cth
    Adot = np.zeros((2, NQ))
    Adot[0, QTHETA] = -R * cphi * phid
    Adot[0, QPSI] = -R * (sphi * phid * cth + cphi * sth * thetad)
    Adot[1, QTHETA] = R * sphi * phid
    Adot[1, QPSI] = -R * (cphi * phid * cth - sphi * sth * thetad)
    return A, Adot


def generalized_force(T_s: float, T_p: float) -> np.ndarray:
    """Map spin torque (psi slot) and pendulum torque (beta slot) into Q."""
    Q = np.zeros(NQ)
    Q[QPSI] = T_s
    Q[QBETA] = T_p
    return Q


def solve_accelerations(p: RobotParams, q, qd, Q):
    """Solve the saddle system for (qdd, lam).

    One step of iterative refinement keeps the residuals near rounding
    level even when the torque inputs are large.

    Raises:
        SingularDynamicsError: non-finite solution, with a condition
            estimate of the saddle matrix in the message.
    """
    check_tilt(q[QTHETA])
    M = mass_matrix(p, q)
    b = bias_vector(p, q, qd)
    A, Adot = constraint_rows(p, q, qd)
    S = np.zeros((8, 8))
    S[:6, :6] = M
    S[:6, 6:] = A.T
    S[6:, :6] = A
    rhs = np.empty(8)
    rhs[:6] = Q - b
    rhs[6:] = -Adot @ qd
    try:
        sol = np.linalg.solve(S, rhs)
        sol -= np.linalg.solve(S, S @ sol - rhs)
    except np.linalg.LinAlgError:
        sol = np.full(8, np.nan)
    if not np.all(np.isfinite(sol)):
        with np.errstate(all="ignore"):
            cond = float(np.linalg.cond(S))
        raise SingularDynamicsError(
            f"saddle system is singular (condition estimate {cond:.3e})"
        )
    return sol[:6], -sol[6:]


def acceleration_residuals(p: RobotParams, q, qd, qdd, lam, Q):
    """Max-abs residuals of the force and acceleration-constraint equations."""
    M = mass_matrix(p, q)
    b = bias_vector(p, q, qd)
    A, Adot = constraint_rows(p, q, qd)
    r_eom = M @ qdd + b - Q - A.T @ lam
    r_acc = A @ qdd + Adot @ qd
    return float(np.max(np.abs(r_eom))), float(np.max(np.abs(r_acc)))


def state_derivative(p: RobotParams, x, T_s: float, T_p: float) -> np.ndarray:
    """Time derivative of the 12-entry state under the given torques."""
    q, qd = state_to_coords(x)
    qdd, _ = solve_accelerations(p, q, qd, generalized_force(T_s, T_p))
    xd = np.empty(STATE_SIZE)
    xd[SPHI], xd[STHETA], xd[SPSI] = qd[QPHI], qd[QTHETA], qd[QPSI]
    xd[SX], xd[SZ] = qd[QX], qd[QZ]
    xd[SPHID], xd[STHETAD], xd[SPSID] = qdd[QPHI], qdd[QTHETA], qdd[QPSI]
    xd[SXD], xd[SZD] = qdd[QX], qdd[QZ]
    xd[SBETA], xd[SBETAD] = qd[QBETA], qdd[QBETA]
    return xd


def rolling_velocity(p: RobotParams, phi, theta, thetad, psid):
    """Center velocity implied by the rolling constraints.

    Shared by constraint_residual and the integrator's velocity
    projection so a projected state has residual exactly zero.
    """
    sphi, cphi = sin(phi), cos(phi)
    cth = cos(theta)
    Xd = p.R_s * (thetad * sphi - psid * cphi * cth)
    Zd = p.R_s * (thetad * cphi + psid * sphi * cth)
    return Xd, Zd


def constraint_residual(p: RobotParams, x):
    """Velocity-level rolling residual (r_x, r_z); zero on feasible states."""
    Xd_roll, Zd_roll = rolling_velocity(p, x[SPHI], x[STHETA], x[STHETAD], x[SPSID])
    return float(x[SXD] - Xd_roll), float(x[SZD] - Zd_roll)
