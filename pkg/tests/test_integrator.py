"""Adaptive integrator: scalar sanity, closed-loop runs, failure modes."""

import numpy as np
import pytest

from spherebot.control import PendulumCtrl, Schedule, Segment, SpeedCtrl
from spherebot.dynamics import (
    SBETA,
    SPHI,
    SPSI,
    SPSID,
    STHETA,
    SX,
    SXD,
    SZD,
    constraint_residual,
)
from spherebot.errors import ConfigError, StiffnessError
from spherebot.integrator import (
    IntegratorConfig,
    advance,
    integrate,
    project_velocities,
    step,
)
from spherebot.params import RobotParams

STRAIGHT = Schedule([Segment(0.0, 0.0, 1.0)])
REST = Schedule([Segment(0.0, 0.0, 0.0)])
TURNING = Schedule(
    [
        Segment(0.0, 0.0, 1.0),
        Segment(5.0, np.deg2rad(15.0), 1.0),
        Segment(20.0, 0.0, 1.0),
    ]
)


def test_step_constant_derivative_is_exact():
    def f(t, x):
        return np.zeros_like(x)

    x0 = np.array([1.0, -2.0])
    x1, err, h_next, _ = step(f, 0.0, x0, 0.5)
    assert np.array_equal(x1, x0)
    assert err <= 1.0
    assert h_next > 0.5  # nothing to resolve, controller should grow


def test_step_linear_decay_accuracy():
    def f(t, x):
        return -x

    # one fixed h=0.1 attempt: truncation-limited, not tolerance-limited
    x1, _, _, _ = step(f, 0.0, np.array([1.0]), 0.1)
    d1 = abs(x1[0] - np.exp(-0.1))
    assert d1 <= 1e-9
    # local error of the fifth-order candidate scales like h^6
    x2, _, _, _ = step(f, 0.0, np.array([1.0]), 0.05)
    d2 = abs(x2[0] - np.exp(-0.05))
    assert d1 / d2 > 30.0


def test_advance_harmonic_oscillator_phase_and_energy():
    # y = (pos, vel); energy pos^2 + vel^2 conserved exactly in truth
    def f(t, y):
        return np.array([y[1], -y[0]])

    cfg = IntegratorConfig(rtol=1e-9, atol=1e-12, h_max=0.1, sample_dt=0.1)
    y_end, stats = advance(f, 0.0, np.array([1.0, 0.0]), 20.0, cfg)
    assert y_end[0] == pytest.approx(np.cos(20.0), abs=1e-6)
    assert y_end[1] == pytest.approx(-np.sin(20.0), abs=1e-6)
    assert y_end[0] ** 2 + y_end[1] ** 2 == pytest.approx(1.0, abs=1e-7)
    assert stats["n_steps"] > 50


def test_advance_tightening_tolerance_reduces_error():
    def f(t, y):
        return np.array([y[1], -y[0]])

    errs = []
    for rtol in (1e-5, 1e-7, 1e-9):
        cfg = IntegratorConfig(rtol=rtol, atol=rtol * 1e-3, h_max=0.5, sample_dt=0.5)
        y_end, _ = advance(f, 0.0, np.array([1.0, 0.0]), 10.0, cfg)
        errs.append(abs(y_end[0] - np.cos(10.0)))
    # each 100x tolerance cut should buy well over one digit
    assert errs[1] < errs[0] / 10
    assert errs[2] < errs[1] / 10


def test_advance_on_step_can_replace_state():
    def f(t, y):
        return np.array([1.0])

    seen = []

    def clamp(t, h, x_old, f_old, x_new, f_new):
        seen.append(t)
        return np.minimum(x_new, 0.35)

    cfg = IntegratorConfig(h_max=0.1, sample_dt=0.1)
    y_end, _ = advance(f, 0.0, np.array([0.0]), 1.0, cfg, on_step=clamp)
    assert y_end[0] == pytest.approx(0.35)
    assert seen  # callback actually ran


def test_project_velocities_zeroes_rolling_residual(p0, rng):
    for _ in range(20):
        x = rng.uniform(-1.0, 1.0, 12)
        x[STHETA] = rng.uniform(-1.2, 1.2)
        xp = project_velocities(p0, x)
        rx, rz = constraint_residual(p0, xp)
        assert rx == 0.0 and rz == 0.0
        # only the center velocity entries may change
        keep = [i for i in range(12) if i not in (SXD, SZD)]
        assert np.array_equal(x[keep], xp[keep])


def test_equilibrium_hold(p0):
    traj = integrate(p0, np.zeros(12), REST, 10.0)
    assert np.max(np.abs(traj.states)) <= 1e-9
    assert np.max(np.abs(traj.E_residual)) <= 1e-9


def test_straight_roll_stays_on_symmetry_manifold(p0):
    traj = integrate(p0, np.zeros(12), STRAIGHT, 10.0)
    t = traj.t
    late = t > 2.0
    # lateral dynamics never wake up
    assert np.all(traj.states[:, SPHI] == 0.0)
    assert np.all(traj.states[:, STHETA] == 0.0)
    assert np.all(traj.states[:, SBETA] == 0.0)
    # speed loop converges and the contact rolls without slip
    assert np.max(np.abs(traj.states[late, SPSID] - 1.0)) <= 0.01
    assert np.max(np.abs(traj.states[late, SXD] + p0.R_s * traj.states[late, SPSID])) <= 1e-6
    assert np.all(traj.r_x == 0.0) and np.all(traj.r_z == 0.0)


def test_sample_grid_and_segment_restarts(p0):
    cfg = IntegratorConfig()
    traj = integrate(p0, np.zeros(12), TURNING, 30.0, cfg=cfg)
    assert len(traj.t) == 3001
    assert np.array_equal(traj.t, np.arange(3001) * 0.01)
    assert traj.states.shape == (3001, 12)
    # setpoint schedule is right-continuous: the t=5 sample already sees
    # beta_ref = 15 deg, so the pendulum torque jumps there
    i5 = 500
    assert traj.T_p[i5 - 1] == pytest.approx(0.0, abs=1e-4)
    assert traj.T_p[i5] > 1.0
    for key in ("n_steps", "n_rejected", "n_evals", "h_min", "backend", "wall_s"):
        assert key in traj.diagnostics


def test_projection_off_still_small_drift(p0):
    cfg = IntegratorConfig(projection=False)
    traj = integrate(p0, np.zeros(12), TURNING, 30.0, cfg=cfg)
    drift = max(np.max(np.abs(traj.r_x)), np.max(np.abs(traj.r_z)))
    assert 0.0 < drift <= 1e-4


def test_dense_output_matches_tight_grid(p0):
    # the 0.01 s samples come from cubic Hermite interpolation; forcing
    # steps no larger than the sample spacing removes the interpolation
    # error, so the two runs must agree to integration accuracy
    loose = integrate(p0, np.zeros(12), TURNING, 12.0)
    tight = integrate(
        p0, np.zeros(12), TURNING, 12.0, cfg=IntegratorConfig(h_max=1e-3)
    )
    diff = np.max(np.abs(loose.states[:, STHETA] - tight.states[:, STHETA]))
    assert diff <= 1e-7


def test_stiff_gains_raise_stiffness_error(p0):
    # absurd servo stiffness: every trial step overshoots so hard that
    # no step size above the floor is accepted, and the controller
    # reports the collapse instead of spinning forever
    pend = PendulumCtrl(kp=1e15, kd=1e12, torque_limit=1e12)
    cfg = IntegratorConfig(rtol=1e-2, atol=1e-4)
    sched = Schedule([Segment(0.0, np.deg2rad(1.0), 0.0)])
    with pytest.raises(StiffnessError):
        integrate(p0, np.zeros(12), sched, 1.0, pend=pend, cfg=cfg)


def test_integrate_rejects_bad_inputs(p0):
    with pytest.raises(ConfigError):
        integrate(p0, np.zeros(11), STRAIGHT, 1.0)
    with pytest.raises(ConfigError):
        integrate(p0, np.zeros(12), STRAIGHT, -1.0)
    with pytest.raises(ConfigError):
        IntegratorConfig(rtol=0.0)
    with pytest.raises(ConfigError):
        IntegratorConfig(h_init=1.0, h_max=0.1)
