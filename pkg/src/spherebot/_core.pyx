# cython: language_level=3
"""Compiled closed-loop derivative evaluator.

Mirrors backend.PureEvalContext: same state conventions, same saddle
formulation with one iterative-refinement pass, same diagnostics.  The
8x8 saddle solve uses a hand-rolled LU with partial pivoting so the hot
path never re-enters Python.
"""

import numpy as np

from .errors import GimbalLockError, SingularDynamicsError

from libc.math cimport sin, cos, pow, fabs, sqrt

include "_eom_terms.pxi"

# bump when the kernel interface changes; backend.compiled_available gates on it
CORE_BUILD = 1

cdef double TILT_LIMIT = 1.5697963267948966  # pi/2 minus the 1e-3 guard band

cdef enum:
    NQ = 6
    NS = 8  # saddle dimension: 6 coords + 2 constraint rows
    # state vector slots
    SPHI = 0
    STHETA = 1
    SPSI = 2
    SX = 3
    SZ = 4
    SPHID = 5
    STHETAD = 6
    SPSID = 7
    SXD = 8
    SZD = 9
    SBETA = 10
    SBETAD = 11

cdef enum:
    # generalized-coordinate slots (X, Z, phi, theta, psi, beta)
    QX = 0
    QZ = 1
    QPHI = 2
    QTHETA = 3
    QPSI = 4
    QBETA = 5


cdef inline double _clamp(double v, double lim) noexcept nogil:
    if v > lim:
        return lim
    if v < -lim:
        return -lim
    return v


cdef int _lu_factor(double* A, int* piv) noexcept nogil:
    """In-place LU with partial pivoting on an NS x NS row-major matrix.

    Returns the index of a zero pivot, or -1 on success.
    """
    cdef int i, j, k, p
    cdef double big, tmp
    for k in range(NS):
        big = fabs(A[k * NS + k])
        p = k
        for i in range(k + 1, NS):
            if fabs(A[i * NS + k]) > big:
                big = fabs(A[i * NS + k])
                p = i
        if big == 0.0:
            return k
        piv[k] = p
        if p != k:
            for j in range(NS):
                tmp = A[k * NS + j]
                A[k * NS + j] = A[p * NS + j]
                A[p * NS + j] = tmp
        for i in range(k + 1, NS):
            A[i * NS + k] /= A[k * NS + k]
            tmp = A[i * NS + k]
            for j in range(k + 1, NS):
                A[i * NS + j] -= tmp * A[k * NS + j]
    return -1


cdef void _lu_solve(double* LU, int* piv, double* x) noexcept nogil:
    """Back-substitute a factored system; x holds rhs in, solution out."""
    cdef int i, j
    cdef double tmp, acc
    for i in range(NS):
        if piv[i] != i:
            tmp = x[i]
            x[i] = x[piv[i]]
            x[piv[i]] = tmp
    for i in range(NS):
        acc = x[i]
        for j in range(i):
            acc -= LU[i * NS + j] * x[j]
        x[i] = acc
    for i in range(NS - 1, -1, -1):
        acc = x[i]
        for j in range(i + 1, NS):
            acc -= LU[i * NS + j] * x[j]
        x[i] = acc / LU[i * NS + i]


cdef class CompiledEvalContext:
    """Drop-in replacement for the pure evaluator, scalar-parameterized."""

    cdef double m_H, m_Y, m_P, R_s, R_p, g
    cdef double kp, kd, Tlim_p, kp_s, Tlim_s
    cdef bint feedforward
    cdef public long n_evals
    cdef public double max_eom_residual
    cdef public double max_acc_residual

    @property
    def backend_name(self):
        return "compiled"

    def __init__(self, double m_H, double m_Y, double m_P, double R_s,
                 double R_p, double g, double kp, double kd, int ff,
                 double Tlim_p, double kp_s, double Tlim_s):
        self.m_H = m_H
        self.m_Y = m_Y
        self.m_P = m_P
        self.R_s = R_s
        self.R_p = R_p
        self.g = g
        self.kp = kp
        self.kd = kd
        self.feedforward = ff != 0
        self.Tlim_p = Tlim_p
        self.kp_s = kp_s
        self.Tlim_s = Tlim_s
        self.n_evals = 0
        self.max_eom_residual = 0.0
        self.max_acc_residual = 0.0

    def reset_diagnostics(self):
        self.n_evals = 0
        self.max_eom_residual = 0.0
        self.max_acc_residual = 0.0

    cdef inline double _t_pend(self, double beta, double betad, double theta,
                               double beta_ref) noexcept nogil:
        cdef double T = self.kp * (beta_ref - beta) - self.kd * betad
        if self.feedforward:
            T += self.m_P * self.g * self.R_p * sin(theta + beta)
        return _clamp(T, self.Tlim_p)

    cdef inline double _t_spin(self, double psid, double psid_ref) noexcept nogil:
        return _clamp(self.kp_s * (psid_ref - psid), self.Tlim_s)

    def torques(self, x, double beta_ref, double psid_ref):
        cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
        cdef double T_s = self._t_spin(xv[SPSID], psid_ref)
        cdef double T_p = self._t_pend(xv[SBETA], xv[SBETAD], xv[STHETA], beta_ref)
        return T_s, T_p

    def energies(self, x):
        """(kinetic, potential); kinetic via the mass matrix quadratic form."""
        cdef double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
        cdef double M[36]
        cdef double qd[6]
        cdef int i, j
        _fill_mass(&M[0], self.m_H, self.m_Y, self.m_P, self.R_s, self.R_p,
                   xv[SPHI], xv[STHETA], xv[SBETA])
        qd[QX] = xv[SXD]
        qd[QZ] = xv[SZD]
        qd[QPHI] = xv[SPHID]
        qd[QTHETA] = xv[STHETAD]
        qd[QPSI] = xv[SPSID]
        qd[QBETA] = xv[SBETAD]
        cdef double ke = 0.0
        for i in range(NQ):
            for j in range(NQ):
                ke += qd[i] * M[i * NQ + j] * qd[j]
        ke *= 0.5
        cdef double pe = -self.m_P * self.g * self.R_p * cos(xv[STHETA] + xv[SBETA])
        return ke, pe

    def derivative(self, double t, y, double beta_ref, double psid_ref):
        """ydot for the work-augmented vector y = (state, W)."""
        cdef double[::1] yv = np.ascontiguousarray(y, dtype=np.float64)
        cdef double phi = yv[SPHI]
        cdef double theta = yv[STHETA]
        cdef double beta = yv[SBETA]

        if fabs(theta) >= TILT_LIMIT:
            raise GimbalLockError(
                f"lateral tilt |theta| = {fabs(theta):.6f} rad reached the "
                f"singularity guard at {TILT_LIMIT:.6f} rad"
            )

        cdef double qd[6]
        qd[QX] = yv[SXD]
        qd[QZ] = yv[SZD]
        qd[QPHI] = yv[SPHID]
        qd[QTHETA] = yv[STHETAD]
        qd[QPSI] = yv[SPSID]
        qd[QBETA] = yv[SBETAD]

        cdef double T_s = self._t_spin(yv[SPSID], psid_ref)
        cdef double T_p = self._t_pend(beta, yv[SBETAD], theta, beta_ref)

        cdef double M[36]
        cdef double bias[6]
        _fill_mass(&M[0], self.m_H, self.m_Y, self.m_P, self.R_s, self.R_p,
                   phi, theta, beta)
        _fill_bias(&bias[0], self.m_H, self.m_Y, self.m_P, self.R_s, self.R_p,
                   self.g, phi, theta, beta,
                   qd[QPHI], qd[QTHETA], qd[QPSI], qd[QBETA], qd[QX], qd[QZ])

        # rolling-constraint rows and their time derivative
        cdef double sphi = sin(phi)
        cdef double cphi = cos(phi)
        cdef double sth = sin(theta)
        cdef double cth = cos(theta)
        cdef double R = self.R_s
        cdef double A[12]  # 2 x 6 row-major
        cdef double Adot[12]
        cdef int i, j, r
        for i in range(12):
            A[i] = 0.0
            Adot[i] = 0.0
        A[0 * NQ + QX] = 1.0
        A[0 * NQ + QTHETA] = -R * sphi
        A[0 * NQ + QPSI] = R * cphi * cth
        A[1 * NQ + QZ] = 1.0
        A[1 * NQ + QTHETA] = -R * cphi
        A[1 * NQ + QPSI] = -R * sphi * cth
        Adot[0 * NQ + QTHETA] = -R * cphi * qd[QPHI]
        Adot[0 * NQ + QPSI] = -R * (sphi * qd[QPHI] * cth + cphi * sth * qd[QTHETA])
        Adot[1 * NQ + QTHETA] = R * sphi * qd[QPHI]
        Adot[1 * NQ + QPSI] = -R * (cphi * qd[QPHI] * cth - sphi * sth * qd[QTHETA])

        # saddle system [[M, A^T], [A, 0]] [qdd; -lam] = [Q - b; -Adot qd]
        cdef double S[64]
        cdef double LU[64]
        cdef double rhs[8]
        cdef double sol[8]
        cdef double resid[8]
        cdef int piv[8]
        for i in range(64):
            S[i] = 0.0
        for i in range(NQ):
            for j in range(NQ):
                S[i * NS + j] = M[i * NQ + j]
        for r in range(2):
            for j in range(NQ):
                S[j * NS + (NQ + r)] = A[r * NQ + j]
                S[(NQ + r) * NS + j] = A[r * NQ + j]
        for i in range(NQ):
            rhs[i] = -bias[i]
        rhs[QPSI] += T_s
        rhs[QBETA] += T_p
        for r in range(2):
            rhs[NQ + r] = 0.0
            for j in range(NQ):
                rhs[NQ + r] -= Adot[r * NQ + j] * qd[j]

        for i in range(64):
            LU[i] = S[i]
        cdef int bad = _lu_factor(&LU[0], &piv[0])
        if bad >= 0:
            raise SingularDynamicsError(
                f"saddle system is singular (zero pivot in row {bad})"
            )
        for i in range(NS):
            sol[i] = rhs[i]
        _lu_solve(&LU[0], &piv[0], &sol[0])
        # one refinement pass, as in the pure lane
        for i in range(NS):
            resid[i] = -rhs[i]
            for j in range(NS):
                resid[i] += S[i * NS + j] * sol[j]
        _lu_solve(&LU[0], &piv[0], &resid[0])
        for i in range(NS):
            sol[i] -= resid[i]
            if not (sol[i] == sol[i]) or fabs(sol[i]) > 1e300:
                raise SingularDynamicsError(
                    "saddle system is singular (non-finite solution)"
                )

        # residual bookkeeping against the unfactored system
        cdef double r_eom = 0.0
        cdef double r_acc = 0.0
        cdef double acc
        for i in range(NQ):
            acc = -rhs[i]
            for j in range(NS):
                acc += S[i * NS + j] * sol[j]
            if fabs(acc) > r_eom:
                r_eom = fabs(acc)
        for r in range(2):
            acc = -rhs[NQ + r]
            for j in range(NQ):
                acc += S[(NQ + r) * NS + j] * sol[j]
            if fabs(acc) > r_acc:
                r_acc = fabs(acc)
        if r_eom > self.max_eom_residual:
            self.max_eom_residual = r_eom
        if r_acc > self.max_acc_residual:
            self.max_acc_residual = r_acc
        self.n_evals += 1

        out = np.empty(13)
        cdef double[::1] yd = out
        yd[0] = qd[QPHI]
        yd[1] = qd[QTHETA]
        yd[2] = qd[QPSI]
        yd[3] = qd[QX]
        yd[4] = qd[QZ]
        yd[5] = sol[QPHI]
        yd[6] = sol[QTHETA]
        yd[7] = sol[QPSI]
        yd[8] = sol[QX]
        yd[9] = sol[QZ]
        yd[10] = qd[QBETA]
        yd[11] = sol[QBETA]
        yd[12] = T_s * qd[QPSI] + T_p * qd[QBETA]
        return out
