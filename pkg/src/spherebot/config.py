"""Scenario files: schema, validation, and conversion to runtime objects.

A scenario is a single JSON document (conventionally *.config).  Field
names carry their units as suffixes: *_deg entries are converted to
radians on load, *_s entries are seconds.  Unknown keys anywhere in the
document are rejected so a typo cannot silently fall back to a default.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .control import PendulumCtrl, Schedule, Segment, SpeedCtrl
from .errors import ConfigError
from .integrator import IntegratorConfig
from .params import RobotParams

STATE_NAMES = (
    "phi", "theta", "psi", "X", "Z",
    "phid", "thetad", "psid", "Xd", "Zd",
    "beta", "betad",
)

_PARAM_KEYS = {"m_H", "m_Y", "m_P", "R_s", "R_p", "g"}
_SEGMENT_KEYS = {"t_start_s", "beta_ref_deg", "psid_ref_rad_s"}
_PEND_KEYS = {"kp", "kd", "feedforward", "torque_limit"}
_SPEED_KEYS = {"kp", "torque_limit"}
_INTEG_KEYS = {"rtol", "atol", "h_init_s", "h_max_s", "sample_dt_s", "projection"}
_TOP_KEYS = {
    "params", "initial_state", "schedule", "controllers", "integrator", "t_end_s",
}


@dataclass(frozen=True)
class Scenario:
    """A fully validated scenario, ready to hand to the integrator."""

    params: RobotParams
    initial_state: np.ndarray  # (12,)
    schedule: Schedule
    pendulum: PendulumCtrl
    speed: SpeedCtrl
    integrator: IntegratorConfig
    t_end: float
    echo: dict  # normalized document, for deterministic report embedding


def _require_mapping(obj, where: str) -> dict:
    if not isinstance(obj, dict):
        raise ConfigError(f"{where} must be an object, got {type(obj).__name__}")
    return obj


def _reject_unknown(obj: dict, allowed: set, where: str):
    extra = set(obj) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in {where}: {', '.join(sorted(extra))}")


def _number(obj: dict, key: str, where: str, default=None):
    if key not in obj:
        if default is None:
            raise ConfigError(f"missing required key {where}.{key}")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{where}.{key} must be a number, got {v!r}")
    return float(v)


def _flag(obj: dict, key: str, where: str, default: bool) -> bool:
    v = obj.get(key, default)
    if not isinstance(v, bool):
        raise ConfigError(f"{where}.{key} must be true or false, got {v!r}")
    return v


def parse_scenario(doc: dict) -> Scenario:
    """Validate a decoded scenario document and build runtime objects."""
    _require_mapping(doc, "scenario")
    _reject_unknown(doc, _TOP_KEYS, "scenario")
    if "schedule" not in doc:
        raise ConfigError("missing required key scenario.schedule")

    praw = _require_mapping(doc.get("params", {}), "params")
    _reject_unknown(praw, _PARAM_KEYS, "params")
    defaults = RobotParams()
    # RobotParams.validate raises ConfigError itself on bad values
    params = RobotParams(
        **{k: _number(praw, k, "params", getattr(defaults, k)) for k in _PARAM_KEYS}
    )

    sraw = _require_mapping(doc.get("initial_state", {}), "initial_state")
    _reject_unknown(sraw, set(STATE_NAMES), "initial_state")
    x0 = np.array(
        [_number(sraw, name, "initial_state", 0.0) for name in STATE_NAMES]
    )

    segs_raw = doc["schedule"]
    if not isinstance(segs_raw, list) or not segs_raw:
        raise ConfigError("schedule must be a non-empty list of segments")
    segments = []
    for i, seg in enumerate(segs_raw):
        where = f"schedule[{i}]"
        _require_mapping(seg, where)
        _reject_unknown(seg, _SEGMENT_KEYS, where)
        segments.append(
            Segment(
                t_start=_number(seg, "t_start_s", where),
                beta_ref=float(np.deg2rad(_number(seg, "beta_ref_deg", where))),
                psid_ref=_number(seg, "psid_ref_rad_s", where),
            )
        )
    schedule = Schedule(segments)

    craw = _require_mapping(doc.get("controllers", {}), "controllers")
    _reject_unknown(craw, {"pendulum", "speed"}, "controllers")
    praw2 = _require_mapping(craw.get("pendulum", {}), "controllers.pendulum")
    _reject_unknown(praw2, _PEND_KEYS, "controllers.pendulum")
    dflt = PendulumCtrl()
    pendulum = PendulumCtrl(
        kp=_number(praw2, "kp", "controllers.pendulum", dflt.kp),
        kd=_number(praw2, "kd", "controllers.pendulum", dflt.kd),
        feedforward=_flag(praw2, "feedforward", "controllers.pendulum", dflt.feedforward),
        torque_limit=_number(praw2, "torque_limit", "controllers.pendulum", dflt.torque_limit),
    )
    wraw = _require_mapping(craw.get("speed", {}), "controllers.speed")
    _reject_unknown(wraw, _SPEED_KEYS, "controllers.speed")
    sdflt = SpeedCtrl()
    speed = SpeedCtrl(
        kp=_number(wraw, "kp", "controllers.speed", sdflt.kp),
        torque_limit=_number(wraw, "torque_limit", "controllers.speed", sdflt.torque_limit),
    )

    iraw = _require_mapping(doc.get("integrator", {}), "integrator")
    _reject_unknown(iraw, _INTEG_KEYS, "integrator")
    idflt = IntegratorConfig()
    integcfg = IntegratorConfig(
        rtol=_number(iraw, "rtol", "integrator", idflt.rtol),
        atol=_number(iraw, "atol", "integrator", idflt.atol),
        h_init=_number(iraw, "h_init_s", "integrator", idflt.h_init),
        h_max=_number(iraw, "h_max_s", "integrator", idflt.h_max),
        sample_dt=_number(iraw, "sample_dt_s", "integrator", idflt.sample_dt),
        projection=_flag(iraw, "projection", "integrator", idflt.projection),
    )

    t_end = _number(doc, "t_end_s", "scenario")
    if not np.isfinite(t_end) or t_end <= 0.0:
        raise ConfigError(f"t_end_s must be finite and > 0, got {t_end}")
    if segments[-1].t_start >= t_end:
        raise ConfigError("last schedule segment starts at or after t_end_s")

    echo = {
        "params": {k: getattr(params, k) for k in sorted(_PARAM_KEYS)},
        "initial_state": {name: float(v) for name, v in zip(STATE_NAMES, x0)},
        "schedule": [
            {
                "t_start_s": s.t_start,
                "beta_ref_deg": float(np.rad2deg(s.beta_ref)),
                "psid_ref_rad_s": s.psid_ref,
            }
            for s in segments
        ],
        "controllers": {
            "pendulum": {
                "kp": pendulum.kp,
                "kd": pendulum.kd,
                "feedforward": pendulum.feedforward,
                "torque_limit": pendulum.torque_limit,
            },
            "speed": {"kp": speed.kp, "torque_limit": speed.torque_limit},
        },
        "integrator": {
            "rtol": integcfg.rtol,
            "atol": integcfg.atol,
            "h_init_s": integcfg.h_init,
            "h_max_s": integcfg.h_max,
            "sample_dt_s": integcfg.sample_dt,
            "projection": integcfg.projection,
        },
        "t_end_s": t_end,
    }
    return Scenario(
        params=params,
        initial_state=x0,
        schedule=schedule,
        pendulum=pendulum,
        speed=speed,
        integrator=integcfg,
        t_end=t_end,
        echo=echo,
    )


def bundled_scenario_path(name: str):
    """Filesystem path of a scenario shipped with the package.

    Names: turning, straight, equilibrium.
    """
    from importlib.resources import files

    res = files("spherebot") / "scenarios" / f"{name}.config"
    if not res.is_file():
        raise ConfigError(f"no bundled scenario named {name!r}")
    return res


def load_scenario(path) -> Scenario:
    """Read and validate a scenario file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read scenario file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"scenario file {path} is not valid JSON: {exc}") from None
    return parse_scenario(doc)
