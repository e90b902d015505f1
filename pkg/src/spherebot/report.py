"""Trajectory CSV and summary JSON: the artifact's on-disk record.

Determinism contract: identical scenario input produces byte-identical
trajectory.csv and summary.json.  Floats are written with 17 significant
digits, which round-trips IEEE doubles exactly, so analysis recomputed
from the CSV reproduces the in-memory results bit for bit.  Anything
that legitimately varies between runs (wall clock, backend, step counts)
goes to a separate run_info.json.
"""
from __future__ import annotations

import json

import numpy as np

from .analysis import PhaseMetrics, analyze_phases
from .config import Scenario
from .errors import ConfigError
from .integrator import Trajectory

SCHEMA_VERSION = 1

CSV_COLUMNS = (
    "t",
    "phi", "theta", "psi", "X", "Z",
    "phid", "thetad", "psid", "Xd", "Zd",
    "beta", "betad",
    "T_s", "T_p", "KE", "PE", "E_residual", "r_x", "r_z",
)


def _csv_matrix(traj: Trajectory) -> np.ndarray:
    return np.column_stack(
        [
            traj.t,
            traj.states,
            traj.T_s,
            traj.T_p,
            traj.KE,
            traj.PE,
            traj.E_residual,
            traj.r_x,
            traj.r_z,
        ]
    )


def write_trajectory_csv(path, traj: Trajectory):
    data = _csv_matrix(traj)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")
        for row in data:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_trajectory_csv(path) -> Trajectory:
    """Parse a trajectory written by write_trajectory_csv.

    Raises ConfigError on header mismatch, ragged rows, or non-numeric
    cells, so the CLI can map schema problems to the validation exit
    code.
    """
    try:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip()
            if header.split(",") != list(CSV_COLUMNS):
                raise ConfigError(f"unexpected CSV header in {path}")
            try:
                data = np.loadtxt(fh, delimiter=",", ndmin=2)
            except ValueError as exc:
                raise ConfigError(f"malformed trajectory CSV {path}: {exc}") from None
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory CSV {path}: {exc}") from None
    if data.size == 0 or data.shape[1] != len(CSV_COLUMNS):
        raise ConfigError(
            f"trajectory CSV {path} has wrong column count "
            f"(expected {len(CSV_COLUMNS)})"
        )
    return Trajectory(
        t=data[:, 0],
        states=data[:, 1:13],
        work=np.zeros(len(data)),  # not stored; E_residual already folds it in
        T_s=data[:, 13],
        T_p=data[:, 14],
        KE=data[:, 15],
        PE=data[:, 16],
        E_residual=data[:, 17],
        r_x=data[:, 18],
        r_z=data[:, 19],
        diagnostics={},
    )


def _phase_dict(m: PhaseMetrics) -> dict:
    d = {
        "label": m.label,
        "window": {"t_start_s": m.t_start, "t_end_s": m.t_end},
        "theta": {
            "mean_rad": m.theta_mean,
            "amp_rad": m.theta_amp,
            "freq_hz": m.theta_freq,  # null when the window has too few swings
        },
        "phid": {"mean_rad_s": m.phid_mean, "osc_amp_rad_s": m.phid_osc_amp},
        "pend_mean_rad": m.pend_mean,
    }
    if m.circle_radius is not None:
        d["path"] = {"circle_radius_m": m.circle_radius, "circle_rms_m": m.circle_rms}
    else:
        d["path"] = {"lateral_rms_m": m.lateral_rms}
    return d


def build_summary(traj: Trajectory, scenario: Scenario) -> dict:
    """Per-phase metrics plus run-global residual maxima.

    Uses only quantities reproducible from the trajectory CSV, so
    simulate and a later analyze of its own CSV emit identical bytes.
    """
    phases = analyze_phases(traj, scenario.schedule)
    return {
        "schema_version": SCHEMA_VERSION,
        "config": scenario.echo,
        "phases": [_phase_dict(m) for m in phases],
        "global": {
            "max_abs_energy_residual_J": float(np.max(np.abs(traj.E_residual))),
            "max_abs_rolling_residual_m_s": float(
                max(np.max(np.abs(traj.r_x)), np.max(np.abs(traj.r_z)))
            ),
        },
    }


def write_json(path, doc: dict):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, sort_keys=True, indent=2, allow_nan=False)
        fh.write("\n")


def run_info(traj: Trajectory) -> dict:
    """Non-deterministic run facts: timing, backend, solver effort."""
    return dict(traj.diagnostics)
