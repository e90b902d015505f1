"""Command-line surface: simulate scenarios, analyze stored runs.

Exit codes: 0 success, 2 configuration or schema problem, 1 numerical
failure during integration or analysis.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .config import load_scenario, parse_scenario
from .errors import ConfigError, SphereBotError
from .integrator import integrate
from .report import (
    build_summary,
    read_trajectory_csv,
    run_info,
    write_json,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_NUMERICAL = 1
EXIT_CONFIG = 2


def _fail(msg: str, code: int) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return code


def _run_one(doc: dict, out_dir: Path, backend) -> dict:
    """Simulate one scenario document into out_dir; returns the summary."""
    scenario = parse_scenario(doc)
    traj = integrate(
        scenario.params,
        scenario.initial_state,
        scenario.schedule,
        scenario.t_end,
        pend=scenario.pendulum,
        speed=scenario.speed,
        cfg=scenario.integrator,
        backend=backend,
    )
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / "trajectory.csv", traj)
    summary = build_summary(traj, scenario)
    write_json(out_dir / "summary.json", summary)
    write_json(out_dir / "run_info.json", run_info(traj))
    return summary


def _set_by_path(doc: dict, dotted: str, value: float):
    """Assign doc[a][b][...] = value for a dotted key path, creating
    intermediate objects so sweeps can override keys the base file
    leaves at their defaults."""
    parts = dotted.split(".")
    node = doc
    for part in parts[:-1]:
        nxt = node.setdefault(part, {})
        if not isinstance(nxt, dict):
            raise ConfigError(f"sweep path {dotted} descends into a non-object")
        node = nxt
    node[parts[-1]] = value


def _parse_sweep(spec: str):
    try:
        param, rng = spec.split("=", 1)
        lo_s, hi_s, n_s = rng.split(":")
        lo, hi, n = float(lo_s), float(hi_s), int(n_s)
    except ValueError:
        raise ConfigError(
            f"sweep must look like param.path=min:max:steps, got {spec!r}"
        ) from None
    if n < 2:
        raise ConfigError("sweep needs at least 2 steps")
    if not param:
        raise ConfigError("sweep parameter path is empty")
    step = (hi - lo) / (n - 1)
    return param, [lo + i * step for i in range(n)]


def _cmd_simulate(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario file {args.config} is not valid JSON: {exc}")
    out = Path(args.out)

    if args.sweep is None:
        summary = _run_one(doc, out, args.backend)
        n_phases = len(summary["phases"])
        print(f"wrote {out / 'trajectory.csv'} ({n_phases} phases analyzed)")
        return EXIT_OK

    param, values = _parse_sweep(args.sweep)
    jobs = []
    for i, v in enumerate(values):
        d = copy.deepcopy(doc)
        _set_by_path(d, param, v)
        leaf = param.split(".")[-1]
        jobs.append((d, out / f"{i:03d}_{leaf}={v:.10g}"))
    failures = []
    with ThreadPoolExecutor(max_workers=min(len(jobs), 4)) as pool:
        futs = [pool.submit(_run_one, d, sub, args.backend) for d, sub in jobs]
        for (d, sub), fut in zip(jobs, futs):
            try:
                fut.result()
                print(f"wrote {sub / 'trajectory.csv'}")
            except SphereBotError as exc:
                failures.append((sub, exc))
    for sub, exc in failures:
        print(f"error: {sub.name}: {exc}", file=sys.stderr)
    if failures:
        worst = failures[0][1]
        return EXIT_CONFIG if isinstance(worst, ConfigError) else EXIT_NUMERICAL
    return EXIT_OK


def _cmd_analyze(args) -> int:
    scenario = load_scenario(args.config)
    traj = read_trajectory_csv(args.traj)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary = build_summary(traj, scenario)
    write_json(out / "summary.json", summary)
    print(f"wrote {out / 'summary.json'}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="spherebot",
        description="Pendulum-driven rolling-sphere robot simulator",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run a scenario and export its trajectory")
    sim.add_argument("--config", required=True, help="scenario file (JSON)")
    sim.add_argument("--out", required=True, help="output directory")
    sim.add_argument(
        "--backend",
        choices=("auto", "pure", "compiled"),
        default=None,
        help="derivative evaluator lane (default: auto)",
    )
    sim.add_argument(
        "--sweep",
        metavar="PARAM=MIN:MAX:STEPS",
        default=None,
        help="run a linear parameter sweep, one subdirectory per value",
    )
    sim.set_defaults(func=_cmd_simulate)

    ana = sub.add_parser("analyze", help="recompute the summary from a stored run")
    ana.add_argument("--traj", required=True, help="trajectory.csv from simulate")
    ana.add_argument("--config", required=True, help="scenario file the run used")
    ana.add_argument("--out", required=True, help="output directory")
    ana.set_defaults(func=_cmd_analyze)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except FileNotFoundError as exc:
        return _fail(str(exc), EXIT_CONFIG)
    except SphereBotError as exc:
        return _fail(str(exc), EXIT_NUMERICAL)


if __name__ == "__main__":
    sys.exit(main())
