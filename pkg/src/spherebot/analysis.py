"""Phase-wise trajectory metrics: wobble, precession, path geometry.

Works on uniformly sampled trajectories.  Each schedule segment becomes a
phase window, trimmed by a settle margin so transients at the setpoint
steps do not contaminate steady-state statistics.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .control import Schedule
from .errors import ConfigError, DegenerateGeometryError
from .integrator import Trajectory

# Extrema smaller than this prominence (rad) are integrator ripple, not wobble.
PEAK_PROMINENCE = 1e-6

DEFAULT_SETTLE_MARGIN = 1.0


@dataclass(frozen=True)
class PhaseWindow:
    label: str
    t_start: float
    t_end: float
    sl: slice


@dataclass(frozen=True)
class PhaseMetrics:
    label: str
    t_start: float
    t_end: float
    theta_mean: float
    theta_amp: float
    theta_freq: float | None  # Hz; None when too few oscillations
    phid_mean: float
    phid_osc_amp: float
    pend_mean: float  # mean of theta + beta
    # exactly one of the two path descriptions applies
    lateral_rms: float | None
    circle_radius: float | None
    circle_rms: float | None


def segment_phases(
    traj: Trajectory,
    schedule: Schedule,
    settle_margin: float = DEFAULT_SETTLE_MARGIN,
) -> list[PhaseWindow]:
    """One trimmed window per schedule segment.

    Labels encode what the setpoints ask for: 'straight' when beta_ref is
    zero, 'circular' otherwise, suffixed by occurrence number so the
    turning maneuver comes out as straight-1 / circular-1 / straight-2.
    """
    t = traj.t
    if len(t) < 2:
        raise ConfigError("trajectory too short to segment")
    t_end = t[-1]
    starts = [seg.t_start for seg in schedule.segments]
    if starts[0] > t[0] or starts[-1] >= t_end:
        raise ConfigError("schedule breakpoints outside trajectory span")

    counts: dict[str, int] = {}
    windows = []
    for i, seg in enumerate(schedule.segments):
        lo = starts[i] + settle_margin
        hi = starts[i + 1] if i + 1 < len(starts) else t_end
        if lo >= hi:
            raise ConfigError(
                f"settle margin {settle_margin} swallows segment starting at {starts[i]}"
            )
        kind = "straight" if seg.beta_ref == 0.0 else "circular"
        counts[kind] = counts.get(kind, 0) + 1
        label = f"{kind}-{counts[kind]}"
        # half-open [lo, hi) except the last window, which keeps its endpoint
        last = i + 1 == len(starts)
        mask = (t >= lo - 1e-12) & ((t <= hi + 1e-12) if last else (t < hi - 1e-12))
        idx = np.nonzero(mask)[0]
        if len(idx) == 0:
            raise ConfigError(f"empty window for segment starting at {starts[i]}")
        windows.append(PhaseWindow(label, lo, hi, slice(idx[0], idx[-1] + 1)))
    return windows


def _extrema(t: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Indices of prominent peaks and troughs of a sampled signal."""
    peaks, _ = find_peaks(y, prominence=PEAK_PROMINENCE)
    troughs, _ = find_peaks(-y, prominence=PEAK_PROMINENCE)
    return peaks, troughs


def wobble_metrics(t: np.ndarray, theta: np.ndarray) -> tuple[float, float, float | None]:
    """(mean, amplitude, frequency) of the tilt oscillation in one window.

    Amplitude is half the median peak-to-trough distance; frequency comes
    from the median interval between successive peaks.  With fewer than
    four extrema the oscillation is not resolved: amplitude falls back to
    half the total excursion and frequency is None.
    """
    theta = np.asarray(theta, dtype=float)
    mean = float(np.mean(theta))
    peaks, troughs = _extrema(t, theta)
    n_ext = len(peaks) + len(troughs)
    if n_ext < 4:
        return mean, 0.5 * float(np.ptp(theta)), None

    # order all extrema in time, swings are successive peak-trough gaps
    vals = np.concatenate([theta[peaks], theta[troughs]])
    order = np.argsort(np.concatenate([t[peaks], t[troughs]]))
    swings = np.abs(np.diff(vals[order]))
    amp = 0.5 * float(np.median(swings))

    freq = None
    if len(peaks) >= 2:
        period = float(np.median(np.diff(t[peaks])))
        if period > 0.0:
            freq = 1.0 / period
    return mean, amp, freq


def precession_metrics(
    t: np.ndarray, phid: np.ndarray, theta: np.ndarray, beta: np.ndarray
) -> tuple[float, float, float]:
    """Mean heading rate, its oscillation amplitude, and mean pendulum-from-vertical angle."""
    if len(t) == 0:
        raise ValueError("empty window")
    phid_mean = float(np.mean(phid))
    dev = phid - phid_mean
    peaks, troughs = _extrema(t, dev)
    if len(peaks) + len(troughs) >= 4:
        vals = np.concatenate([dev[peaks], dev[troughs]])
        order = np.argsort(np.concatenate([t[peaks], t[troughs]]))
        swings = np.abs(np.diff(vals[order]))
        osc = 0.5 * float(np.median(swings))
    else:
        osc = 0.5 * float(np.ptp(dev))
    pend_mean = float(np.mean(theta + beta))
    return phid_mean, osc, pend_mean


def circle_fit(x: np.ndarray, z: np.ndarray) -> tuple[tuple[float, float], float, float]:
    """Algebraic least-squares circle through ground-plane samples.

    Returns ((cx, cz), radius, rms of radial residuals).  Requires at
    least 10 samples spanning a reasonable arc; collinear or near-degenerate
    point sets raise DegenerateGeometryError.
    """
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if len(x) < 10:
        raise DegenerateGeometryError("circle fit needs at least 10 samples")

    # Coope's linearization: x^2 + z^2 = 2 cx x + 2 cz z + (r^2 - cx^2 - cz^2)
    A = np.column_stack([2.0 * x, 2.0 * z, np.ones_like(x)])
    rhs = x * x + z * z
    sol, _, rank, sv = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < 3 or sv[-1] < 1e-12 * sv[0]:
        raise DegenerateGeometryError("samples are collinear or otherwise degenerate")
    cx, cz, c = sol
    r2 = c + cx * cx + cz * cz
    if r2 <= 0.0:
        raise DegenerateGeometryError("circle fit collapsed to nonpositive radius")
    radius = float(np.sqrt(r2))

    d = np.hypot(x - cx, z - cz)
    arc = _arc_span(x - cx, z - cz)
    if arc < np.deg2rad(30.0):
        raise DegenerateGeometryError(
            f"arc span {np.rad2deg(arc):.1f} deg too small for a reliable fit"
        )
    rms = float(np.sqrt(np.mean((d - radius) ** 2)))
    return (float(cx), float(cz)), radius, rms


def _arc_span(dx: np.ndarray, dz: np.ndarray) -> float:
    """Angular extent of points as seen from the circle center."""
    ang = np.unwrap(np.arctan2(dz, dx))
    return float(np.ptp(ang))


def line_fit_rms(x: np.ndarray, z: np.ndarray) -> float:
    """RMS perpendicular scatter of ground-plane samples about their best-fit line.

    Total least squares, so the answer does not depend on which axis
    the path happens to follow.
    """
    pts = np.column_stack([x, z])
    centered = pts - pts.mean(axis=0)
    if len(pts) < 2:
        return 0.0
    # smallest singular value of the centered cloud; SVD rather than a
    # covariance eigensolve so an exact line comes out at rounding level
    s = np.linalg.svd(centered, compute_uv=False)
    return float(s[-1] / np.sqrt(len(pts)))


def analyze_phases(
    traj: Trajectory,
    schedule: Schedule,
    settle_margin: float = DEFAULT_SETTLE_MARGIN,
) -> list[PhaseMetrics]:
    """Full per-phase metric set for a simulated run."""
    out = []
    for w in segment_phases(traj, schedule, settle_margin):
        sl = w.sl
        t = traj.t[sl]
        th = traj.states[sl, 1]
        phid = traj.states[sl, 5]
        beta = traj.states[sl, 10]
        X = traj.states[sl, 3]
        Z = traj.states[sl, 4]

        th_mean, th_amp, th_freq = wobble_metrics(t, th)
        phid_mean, phid_osc, pend_mean = precession_metrics(t, phid, th, beta)

        lateral = radius = crms = None
        if w.label.startswith("circular"):
            _, radius, crms = circle_fit(X, Z)
        else:
            lateral = line_fit_rms(X, Z)

        out.append(
            PhaseMetrics(
                label=w.label,
                t_start=w.t_start,
                t_end=w.t_end,
                theta_mean=th_mean,
                theta_amp=th_amp,
                theta_freq=th_freq,
                phid_mean=phid_mean,
                phid_osc_amp=phid_osc,
                pend_mean=pend_mean,
                lateral_rms=lateral,
                circle_radius=radius,
                circle_rms=crms,
            )
        )
    return out
