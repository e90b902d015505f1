"""Selection between the pure NumPy evaluator and the compiled core.

The integrator spends nearly all its time evaluating the closed-loop
state derivative, so that evaluation is packaged behind a small context
object with two interchangeable implementations.  The compiled one is
picked automatically at import when the extension built from _core.pyx
is present; SPHEREBOT_BACKEND=pure|compiled|auto overrides.
"""

import os

import numpy as np

from . import _eom_terms
from .control import PendulumCtrl, SpeedCtrl, pendulum_torque, speed_torque
from .dynamics import (
    NQ,
    QBETA,
    QPHI,
    QPSI,
    QTHETA,
    QX,
    QZ,
    SBETAD,
    SPSID,
    STATE_SIZE,
    check_tilt,
    constraint_rows,
    generalized_force,
    kinetic_energy,
    potential_energy,
    state_to_coords,
)
from .errors import ConfigError, SingularDynamicsError
from .params import RobotParams

#: evaluation vector = 12 state entries plus the actuator work integral
EVAL_SIZE = STATE_SIZE + 1


class PureEvalContext:
    """Closed-loop derivative evaluator in plain NumPy.

    Tracks the worst saddle-solution residuals seen since the last
    reset; the integrator reports them as trajectory diagnostics.
    """

    backend_name = "pure"

    def __init__(self, p: RobotParams, pend: PendulumCtrl, speed: SpeedCtrl):
        self.p = p
        self.pend = pend
        self.speed = speed
        self.n_evals = 0
        self.max_eom_residual = 0.0
        self.max_acc_residual = 0.0

    def reset_diagnostics(self):
        self.n_evals = 0
        self.max_eom_residual = 0.0
        self.max_acc_residual = 0.0

    def torques(self, x, beta_ref: float, psid_ref: float):
        T_s = speed_torque(self.speed, psid_ref, x[SPSID])
        T_p = pendulum_torque(self.pend, self.p, beta_ref, x)
        return T_s, T_p

    def derivative(self, t: float, y, beta_ref: float, psid_ref: float):
        """ydot for the work-augmented vector y = (state, W)."""
        p = self.p
        x = y[:STATE_SIZE]
        q, qd = state_to_coords(x)
        check_tilt(q[QTHETA])
        T_s, T_p = self.torques(x, beta_ref, psid_ref)

        M = np.empty(36)
        _eom_terms.fill_mass(M, p.m_H, p.m_Y, p.m_P, p.R_s, p.R_p, q[QPHI], q[QTHETA], q[QBETA])
        M = M.reshape(NQ, NQ)
        b = np.empty(NQ)
        _eom_terms.fill_bias(
            b, p.m_H, p.m_Y, p.m_P, p.R_s, p.R_p, p.g,
            q[QPHI], q[QTHETA], q[QBETA],
            qd[QPHI], qd[QTHETA], qd[QPSI], qd[QBETA], qd[QX], qd[QZ],
        )
        A, Adot = constraint_rows(p, q, qd)
        Q = generalized_force(T_s, T_p)

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
        qdd = sol[:6]
        lam = -sol[6:]

        r_eom = float(np.max(np.abs(M @ qdd + b - Q - A.T @ lam)))
        r_acc = float(np.max(np.abs(A @ qdd + Adot @ qd)))
        if r_eom > self.max_eom_residual:
            self.max_eom_residual = r_eom
        if r_acc > self.max_acc_residual:
            self.max_acc_residual = r_acc
        self.n_evals += 1

        yd = np.empty(EVAL_SIZE)
        yd[0], yd[1], yd[2] = qd[QPHI], qd[QTHETA], qd[QPSI]
        yd[3], yd[4] = qd[QX], qd[QZ]
        yd[5], yd[6], yd[7] = qdd[QPHI], qdd[QTHETA], qdd[QPSI]
        yd[8], yd[9] = qdd[QX], qdd[QZ]
        yd[10], yd[11] = qd[QBETA], qdd[QBETA]
        yd[12] = T_s * qd[QPSI] + T_p * qd[QBETA]  # actuator power
        return yd

    def energies(self, x):
        q, qd = state_to_coords(x)
        return kinetic_energy(self.p, q, qd), potential_energy(self.p, q)


def compiled_available() -> bool:
    try:
        from . import _core
    except ImportError:
        return False
    return getattr(_core, "CORE_BUILD", 0) >= 1


def make_context(p, pend, speed, backend=None):
    """Build an evaluation context.

    backend: None/'auto' picks compiled when available, else 'pure' or
    'compiled' force a lane; the SPHEREBOT_BACKEND environment variable
    supplies the default.
    """
    name = backend or os.environ.get("SPHEREBOT_BACKEND", "auto")
    if name not in ("auto", "pure", "compiled"):
        raise ConfigError(f"unknown backend {name!r}")
    if name == "auto":
        name = "compiled" if compiled_available() else "pure"
    if name == "pure":
        return PureEvalContext(p, pend, speed)
    if not compiled_available():
        raise ConfigError("compiled backend requested but the extension is not built")
    from ._core import CompiledEvalContext

    return CompiledEvalContext(
        p.m_H, p.m_Y, p.m_P, p.R_s, p.R_p, p.g,
        pend.kp, pend.kd, 1 if pend.feedforward else 0, pend.torque_limit,
        speed.kp, speed.torque_limit,
    )
