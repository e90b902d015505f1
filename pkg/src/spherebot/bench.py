"""Backend comparison: `python -m spherebot.bench`.

Times the closed-loop derivative evaluation in isolation and the full
turning scenario end to end, for each available backend.
"""
from __future__ import annotations

import time

import numpy as np

from .backend import compiled_available, make_context
from .config import bundled_scenario_path, load_scenario
from .control import PendulumCtrl, SpeedCtrl
from .integrator import integrate
from .params import RobotParams


def _time_evals(backend: str, n: int = 5000) -> float:
    ctx = make_context(RobotParams(), PendulumCtrl(), SpeedCtrl(), backend=backend)
    y = np.zeros(13)
    y[7] = 1.0  # rolling forward
    y[1] = 0.1
    ctx.derivative(0.0, y, 0.1, 1.0)  # warm up
    t0 = time.perf_counter()
    for _ in range(n):
        ctx.derivative(0.0, y, 0.1, 1.0)
    return (time.perf_counter() - t0) / n


def _time_scenario(backend: str) -> tuple[float, int]:
    sc = load_scenario(bundled_scenario_path("turning"))
    t0 = time.perf_counter()
    traj = integrate(
        sc.params, sc.initial_state, sc.schedule, sc.t_end,
        pend=sc.pendulum, speed=sc.speed, cfg=sc.integrator, backend=backend,
    )
    return time.perf_counter() - t0, traj.diagnostics["n_evals"]


def main():
    lanes = ["pure"]
    if compiled_available():
        lanes.append("compiled")
    else:
        print("compiled extension not built; timing the pure lane only")

    print(f"{'backend':>9}  {'per-eval':>12}  {'turning 30 s':>13}  {'evals':>6}")
    base = None
    for lane in lanes:
        per = _time_evals(lane)
        wall, n_evals = _time_scenario(lane)
        note = ""
        if base is None:
            base = wall
        elif wall > 0:
            note = f"  ({base / wall:.1f}x faster)"
        print(f"{lane:>9}  {per * 1e6:>9.2f} us  {wall:>11.3f} s  {n_evals:>6}{note}")


if __name__ == "__main__":
    main()
