"""Shared fixtures and finite-difference helpers for the test suite."""

import numpy as np
import pytest

from spherebot.kinematics import EulerState
from spherebot.params import RobotParams

# Step for first-order central differences on smooth trig expressions.
# Near the eps**(1/3) optimum; gives ~1e-10 absolute accuracy.
FD_STEP = 1e-6


@pytest.fixture
def p0():
    """Reference desk-scale parameter set."""
    return RobotParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20260822)


def random_euler_state(rng, rate_scale=2.0):
    """EulerState with tilt kept clear of the gimbal guard band."""
    phi, psi, beta = rng.uniform(-np.pi, np.pi, size=3)
    theta = rng.uniform(-1.2, 1.2)
    phid, thetad, psid, betad = rng.uniform(-rate_scale, rate_scale, size=4)
    return EulerState(
        phi=phi, theta=theta, psi=psi, beta=beta,
        phid=phid, thetad=thetad, psid=psid, betad=betad,
    )


def advance_euler_state(e, dt):
    """Shift angles along their rates; rates held constant."""
    return EulerState(
        phi=e.phi + e.phid * dt,
        theta=e.theta + e.thetad * dt,
        psi=e.psi + e.psid * dt,
        beta=e.beta + e.betad * dt,
        phid=e.phid, thetad=e.thetad, psid=e.psid, betad=e.betad,
    )


def central_diff(f, h=FD_STEP):
    """d/dt f(t) at t=0 where f maps a scalar shift to arrays."""
    return (np.asarray(f(h)) - np.asarray(f(-h))) / (2.0 * h)


def random_coords(rng, rate_scale=2.0):
    """Random (q, qd) with the tilt kept clear of the gimbal guard."""
    q = np.empty(6)
    q[0], q[1] = rng.uniform(-1.0, 1.0, size=2)  # X, Z
    q[2], q[4] = rng.uniform(-np.pi, np.pi, size=2)  # phi, psi
    q[3] = rng.uniform(-1.2, 1.2)  # theta
    q[5] = rng.uniform(-np.pi, np.pi)  # beta
    qd = rng.uniform(-rate_scale, rate_scale, size=6)
    return q, qd


def lagrangian_fd_lhs(p, q, qd, qdd, h=1e-4):
    """Finite-difference d/dt(dL/dqd) - dL/dq along a quadratic path.

    Evaluates the Lagrangian L = K - V only, never the closed-form mass
    matrix or bias terms, so it is an independent oracle for M qdd + b.
    The mixed second difference in (time, rate) pairs with a first
    difference in position; h near eps**(1/4) balances the second
    difference's truncation against roundoff (1e-6 would drown the
    signal in rounding noise).
    """
    from spherebot.dynamics import kinetic_energy, potential_energy

    def L(qq, qqd):
        return kinetic_energy(p, qq, qqd) - potential_energy(p, qq)

    out = np.empty(6)
    for i in range(6):
        ei = np.zeros(6)
        ei[i] = 1.0
        corners = 0.0
        for s_t in (1.0, -1.0):
            qt = q + s_t * h * qd + 0.5 * h * h * qdd
            qdt = qd + s_t * h * qdd
            for s_d in (1.0, -1.0):
                corners += s_t * s_d * L(qt, qdt + s_d * h * ei)
        dKdqd_dot = corners / (4.0 * h * h)
        dLdq = (L(q + h * ei, qd) - L(q - h * ei, qd)) / (2.0 * h)
        out[i] = dKdqd_dot - dLdq
    return out
