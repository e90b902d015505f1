"""Equations-of-motion checks against energy-based oracles.

The mass matrix is confronted with the polarization identity on the
kinetic energy and the bias vector with a finite-difference evaluation
of the Euler-Lagrange left-hand side; neither oracle touches the
generated closed forms.
"""

import numpy as np
import pytest

from spherebot.dynamics import (
    NQ,
    QBETA,
    QPHI,
    QPSI,
    QTHETA,
    QX,
    QZ,
    SBETA,
    SBETAD,
    SPHI,
    SPSI,
    SPSID,
    STHETA,
    SX,
    SXD,
    SZ,
    SZD,
    acceleration_residuals,
    bias_vector,
    constraint_residual,
    constraint_rows,
    coords_to_state,
    generalized_force,
    kinetic_energy,
    mass_matrix,
    potential_energy,
    rolling_velocity,
    solve_accelerations,
    state_derivative,
    state_to_coords,
)
from spherebot.errors import ConfigError, GimbalLockError
from spherebot.params import RobotParams

from conftest import central_diff, lagrangian_fd_lhs, random_coords

ZERO_Q = np.zeros(NQ)
ZERO_QD = np.zeros(NQ)


class TestEnergies:
    def test_kinetic_zero_state(self, p0):
        assert kinetic_energy(p0, ZERO_Q, ZERO_QD) == 0.0

    def test_kinetic_pure_translation(self, p0):
        qd = np.zeros(NQ)
        qd[QX] = 1.0
        assert np.isclose(kinetic_energy(p0, ZERO_Q, qd), 0.5 * 3.0 * 1.0, atol=1e-14)

    def test_kinetic_pure_spin(self, p0):
        qd = np.zeros(NQ)
        qd[QPSI] = 1.0
        # thin-shell hull spinning in place
        expected = 0.5 * (2.0 / 3.0) * p0.m_H * p0.R_s**2
        assert np.isclose(kinetic_energy(p0, ZERO_Q, qd), expected, atol=1e-15)
        assert np.isclose(expected, 0.01125)

    def test_kinetic_nonnegative(self, p0, rng):
        for _ in range(50):
            q, qd = random_coords(rng)
            assert kinetic_energy(p0, q, qd) >= 0.0

    def test_potential_hanging(self, p0):
        assert np.isclose(potential_energy(p0, ZERO_Q), -0.4905, atol=1e-15)

    def test_potential_horizontal_arm(self, p0):
        q = ZERO_Q.copy()
        q[QBETA] = np.pi / 2
        assert np.isclose(potential_energy(p0, q), 0.0, atol=1e-16)

    def test_potential_depends_on_tilt_sum_only(self, p0, rng):
        for _ in range(20):
            th, be = rng.uniform(-0.7, 0.7, size=2)
            qa = ZERO_Q.copy()
            qa[QTHETA], qa[QBETA] = th, be
            qb = ZERO_Q.copy()
            qb[QTHETA], qb[QBETA] = 0.0, th + be
            assert np.isclose(potential_energy(p0, qa), potential_energy(p0, qb), atol=1e-15)

    def test_potential_translation_invariant(self, p0, rng):
        q = ZERO_Q.copy()
        q[QTHETA] = 0.4
        q2 = q.copy()
        q2[QX], q2[QZ] = rng.uniform(-5, 5, size=2)
        assert potential_energy(p0, q) == potential_energy(p0, q2)


class TestMassMatrix:
    def test_reference_entries_at_rest(self, p0):
        M = mass_matrix(p0, ZERO_Q)
        assert np.isclose(M[QX, QX], 3.0, atol=1e-14)
        assert np.isclose(M[QZ, QZ], 3.0, atol=1e-14)
        assert np.isclose(M[QPSI, QPSI], 0.0225, atol=1e-15)

    def test_polarization_identity(self, p0, rng):
        # K(ei+ej) - K(ei) - K(ej) recovers M_ij exactly for a quadratic form
        for _ in range(25):
            q, _ = random_coords(rng)
            M = mass_matrix(p0, q)
            basis = np.eye(NQ)
            for i in range(NQ):
                for j in range(NQ):
                    mij = (
                        kinetic_energy(p0, q, basis[i] + basis[j])
                        - kinetic_energy(p0, q, basis[i])
                        - kinetic_energy(p0, q, basis[j])
                    )
                    assert abs(M[i, j] - mij) < 1e-12

    def test_symmetric(self, p0, rng):
        for _ in range(50):
            q, _ = random_coords(rng)
            M = mass_matrix(p0, q)
            assert np.max(np.abs(M - M.T)) < 1e-12

    def test_positive_definite(self, p0, rng):
        for _ in range(100):
            q, _ = random_coords(rng)
            assert np.min(np.linalg.eigvalsh(mass_matrix(p0, q))) > 0.0

    def test_translation_and_spin_invariance(self, p0, rng):
        for _ in range(20):
            q, _ = random_coords(rng)
            q2 = q.copy()
            q2[QX], q2[QZ] = rng.uniform(-10, 10, size=2)
            q2[QPSI] = rng.uniform(-np.pi, np.pi)
            assert np.max(np.abs(mass_matrix(p0, q) - mass_matrix(p0, q2))) < 1e-12


class TestBiasVector:
    def test_rest_gravity_only(self, p0):
        q = ZERO_Q.copy()
        q[QPHI] = 0.3
        q[QTHETA] = 0.15
        q[QBETA] = 0.05
        b = bias_vector(p0, q, ZERO_QD)
        grav = p0.m_P * p0.g * p0.R_p * np.sin(0.2)
        assert np.isclose(b[QTHETA], grav, atol=1e-15)
        assert np.isclose(b[QBETA], grav, atol=1e-15)
        others = [i for i in range(NQ) if i not in (QTHETA, QBETA)]
        assert all(b[i] == 0.0 for i in others)

    def test_equilibrium_bias_vanishes(self, p0):
        assert np.allclose(bias_vector(p0, ZERO_Q, ZERO_QD), 0.0)

    def test_euler_lagrange_fd_oracle(self, p0, rng):
        for _ in range(50):
            q, qd = random_coords(rng)
            qdd = rng.uniform(-2, 2, size=NQ)
            lhs_fd = lagrangian_fd_lhs(p0, q, qd, qdd)
            lhs = mass_matrix(p0, q) @ qdd + bias_vector(p0, q, qd)
            scale = max(1.0, float(np.max(np.abs(lhs_fd))))
            assert np.max(np.abs(lhs - lhs_fd)) < 1e-5 * scale

    def test_fd_oracle_perturbed_params(self, rng):
        p = RobotParams(m_H=1.8, m_Y=0.8, m_P=0.6, R_s=0.12, R_p=0.07, g=9.81)
        for _ in range(20):
            q, qd = random_coords(rng)
            qdd = rng.uniform(-2, 2, size=NQ)
            lhs_fd = lagrangian_fd_lhs(p, q, qd, qdd)
            lhs = mass_matrix(p, q) @ qdd + bias_vector(p, q, qd)
            scale = max(1.0, float(np.max(np.abs(lhs_fd))))
            assert np.max(np.abs(lhs - lhs_fd)) < 1e-5 * scale


class TestConstraints:
    def test_rows_at_zero_heading(self, p0):
        A, _ = constraint_rows(p0, ZERO_Q, ZERO_QD)
        expected = np.array(
            [
                [1.0, 0.0, 0.0, 0.0, p0.R_s, 0.0],
                [0.0, 1.0, 0.0, -p0.R_s, 0.0, 0.0],
            ]
        )
        assert np.allclose(A, expected, atol=1e-15)

    def test_rolling_velocity_satisfies_rows(self, p0, rng):
        for _ in range(30):
            q, qd = random_coords(rng)
            qd[QX], qd[QZ] = rolling_velocity(p0, q[QPHI], q[QTHETA], qd[QTHETA], qd[QPSI])
            A, _ = constraint_rows(p0, q, qd)
            assert np.max(np.abs(A @ qd)) < 1e-14

    def test_adot_matches_fd_of_a(self, p0, rng):
        for _ in range(30):
            q, qd = random_coords(rng)
            _, Adot = constraint_rows(p0, q, qd)
            Adot_fd = central_diff(lambda dt: constraint_rows(p0, q + dt * qd, qd)[0])
            assert np.max(np.abs(Adot - Adot_fd)) < 1e-6

    def test_residual_zero_after_rolling_velocity(self, p0, rng):
        q, qd = random_coords(rng)
        qd[QX], qd[QZ] = rolling_velocity(p0, q[QPHI], q[QTHETA], qd[QTHETA], qd[QPSI])
        x = coords_to_state(q, qd)
        assert constraint_residual(p0, x) == (0.0, 0.0)

    def test_residual_reports_slip(self, p0):
        x = np.zeros(12)
        x[SXD] = 0.25
        r_x, r_z = constraint_residual(p0, x)
        assert r_x == 0.25 and r_z == 0.0


class TestGeneralizedForce:
    def test_slots(self):
        Q = generalized_force(0.4, -0.2)
        assert Q[QPSI] == 0.4 and Q[QBETA] == -0.2
        assert np.count_nonzero(Q) == 2

    def test_zero(self):
        assert np.allclose(generalized_force(0.0, 0.0), 0.0)


class TestSolveAccelerations:
    def test_equilibrium(self, p0):
        qdd, lam = solve_accelerations(p0, ZERO_Q, ZERO_QD, np.zeros(NQ))
        assert np.allclose(qdd, 0.0, atol=1e-14)
        assert np.allclose(lam, 0.0, atol=1e-14)

    def test_residuals_random_feasible(self, p0, rng):
        for _ in range(50):
            q, qd = random_coords(rng)
            qd[QX], qd[QZ] = rolling_velocity(p0, q[QPHI], q[QTHETA], qd[QTHETA], qd[QPSI])
            Q = generalized_force(*rng.uniform(-5, 5, size=2))
            qdd, lam = solve_accelerations(p0, q, qd, Q)
            r_eom, r_acc = acceleration_residuals(p0, q, qd, qdd, lam, Q)
            assert r_eom < 1e-10
            assert r_acc < 1e-10

    def test_spin_torque_residual(self, p0):
        Q = generalized_force(0.1, 0.0)
        qdd, lam = solve_accelerations(p0, ZERO_Q, ZERO_QD, Q)
        r_eom, r_acc = acceleration_residuals(p0, ZERO_Q, ZERO_QD, qdd, lam, Q)
        assert r_eom < 1e-10 and r_acc < 1e-10
        assert qdd[QPSI] > 0.0  # positive torque spins forward

    def test_gimbal_guard(self, p0):
        q = ZERO_Q.copy()
        q[QTHETA] = np.pi / 2 - 1e-4
        with pytest.raises(GimbalLockError):
            solve_accelerations(p0, q, ZERO_QD, np.zeros(NQ))


class TestStateDerivative:
    def test_equilibrium_fixed_point(self, p0):
        assert np.allclose(state_derivative(p0, np.zeros(12), 0.0, 0.0), 0.0, atol=1e-14)

    def test_straight_roll_is_steady(self, p0):
        x = np.zeros(12)
        x[SPSID] = 1.0
        x[SXD] = -p0.R_s  # rolling couples forward spin to -x travel
        xd = state_derivative(p0, x, 0.0, 0.0)
        assert np.allclose(xd[SPHI:SX], [0.0, 0.0, 1.0], atol=1e-14)  # angle rates echo
        assert np.isclose(xd[SX], -p0.R_s, atol=1e-15)
        assert np.allclose(xd[5:10], 0.0, atol=1e-13)  # no angular/linear acceleration
        assert xd[SBETA] == 0.0 and np.isclose(xd[SBETAD], 0.0, atol=1e-13)

    def test_position_rates_echo_velocity_entries(self, p0, rng):
        q, qd = random_coords(rng)
        qd[QX], qd[QZ] = rolling_velocity(p0, q[QPHI], q[QTHETA], qd[QTHETA], qd[QPSI])
        x = coords_to_state(q, qd)
        xd = state_derivative(p0, x, 0.3, -0.1)
        assert xd[SPHI] == x[5] and xd[STHETA] == x[6] and xd[SPSI] == x[7]
        assert xd[SX] == x[SXD] and xd[SZ] == x[SZD]
        assert xd[SBETA] == x[SBETAD]


class TestStatePacking:
    def test_roundtrip(self, rng):
        x = rng.uniform(-1, 1, size=12)
        q, qd = state_to_coords(x)
        assert np.array_equal(coords_to_state(q, qd), x)

    def test_slot_mapping(self):
        x = np.arange(12.0)
        q, qd = state_to_coords(x)
        assert q[QPHI] == x[SPHI] and q[QTHETA] == x[STHETA]
        assert q[QX] == x[3] and q[QZ] == x[4] and q[QBETA] == x[SBETA]
        assert qd[QPHI] == x[5] and qd[QBETA] == x[SBETAD]


class TestParamValidation:
    def test_zero_pendulum_mass_rejected(self):
        with pytest.raises(ConfigError, match="m_P"):
            RobotParams(m_P=0.0)

    def test_negative_radius_rejected(self):
        with pytest.raises(ConfigError):
            RobotParams(R_s=-0.1)

    def test_arm_longer_than_hull_rejected(self):
        with pytest.raises(ConfigError, match="R_p"):
            RobotParams(R_p=0.2, R_s=0.15)
