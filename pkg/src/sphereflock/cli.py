"""Command-line interface.

Subcommands: simulate, check, fit-rate, verify, preset.  Exit codes:
0 success, 1 invariant failure, 2 configuration error, 3 antipodal abort.
The SPHEREFLOCK_THREADS environment variable caps worker counts.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from . import __version__
from .admissibility import check_initial
from .config import build_scenario, load_config, preset_config, save_config
from .diagnostics import fit_decay_rate
from .errors import AntipodalPair, ConfigError, SphereFlockError
from .integrator import SimConfig, simulate
from .output import (_json_default, build_summary, read_frames_csv,
                     write_frames_csv, write_json, write_state_csv)
from .scenarios import PRESETS
from .verify import run_all

EXIT_OK = 0
EXIT_INVARIANT = 1
EXIT_CONFIG = 2
EXIT_ANTIPODAL = 3


def _max_workers() -> int:
    raw = os.environ.get("SPHEREFLOCK_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ConfigError(f"SPHEREFLOCK_THREADS must be an integer, got {raw!r}")


def _resolve_config(args):
    if getattr(args, "config", None):
        if getattr(args, "preset", None):
            raise ConfigError("give either --preset or --config, not both")
        return load_config(args.config)
    return preset_config(args.preset or "paper-sigma1")


def _apply_overrides(cfg, args):
    sim = cfg.sim
    updates = {}
    if args.t_end is not None:
        updates["t_end"] = args.t_end
    if args.dt is not None:
        updates["dt"] = args.dt
    if args.stride is not None:
        updates["frame_stride"] = args.stride
    if updates:
        sim = SimConfig(dt=updates.get("dt", sim.dt),
                        t_end=updates.get("t_end", sim.t_end),
                        projection=sim.projection,
                        frame_stride=updates.get("frame_stride", sim.frame_stride),
                        seed=sim.seed)
    sigma = cfg.sigma if args.sigma is None else args.sigma
    return cfg.__class__(kernel_name=cfg.kernel_name, kernel_params=cfg.kernel_params,
                         sigma=sigma, sim=sim, scenario=cfg.scenario)


def _cmd_simulate(args) -> int:
    cfg = _apply_overrides(_resolve_config(args), args)
    scenario = build_scenario(cfg)
    # the guarantee calculus needs sigma > 0; exploratory runs without
    # bonding still simulate, with the admissibility block omitted
    report = (check_initial(scenario.ensemble, scenario.params)
              if scenario.params.sigma > 0.0 else None)

    start = time.perf_counter()
    try:
        trajectory = simulate(scenario.ensemble, scenario.params, scenario.sim,
                              label=scenario.label)
    except AntipodalPair as exc:
        if exc.partial_trajectory is not None and exc.partial_trajectory.frames:
            write_frames_csv(args.out, exc.partial_trajectory)
            print(f"partial frames up to the abort -> {args.out}", file=sys.stderr)
        raise
    wall = time.perf_counter() - start

    window = tuple(args.fit_window) if args.fit_window else \
        (scenario.sim.t_end / 8.0, scenario.sim.t_end)
    fit = None
    try:
        fit = fit_decay_rate(trajectory.times, trajectory.series("d_x"), window)
    except SphereFlockError as exc:
        print(f"rate fit skipped: {exc}", file=sys.stderr)

    write_frames_csv(args.out, trajectory)
    if args.full_state:
        write_state_csv(str(args.out) + ".state.csv", trajectory)

    n_steps = int(round(scenario.sim.t_end / scenario.sim.dt))
    summary = build_summary(
        scenario.label, trajectory, fit,
        report.as_dict() if report is not None else None,
        runtime={"wall_time_s": wall, "n_steps": n_steps, "dt": scenario.sim.dt,
                 "n_frames": len(trajectory.frames)},
        adjustments={"position": scenario.position_adjustment,
                     "velocity": scenario.velocity_adjustment},
    )
    write_json(args.summary, summary)
    print(f"{scenario.label}: {len(trajectory.frames)} frames -> {args.out}; "
          f"summary -> {args.summary}")
    if fit is not None and report is not None:
        print(f"fitted rate {fit.rate:.6g} (r^2 {fit.r_squared:.6f}); "
              f"guaranteed delta {report.thresholds.delta:.6g}")
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = _resolve_config(args)
    scenario = build_scenario(cfg)
    if scenario.params.sigma <= 0.0:
        raise ConfigError("the admissibility condition is defined for sigma > 0")
    report = check_initial(scenario.ensemble, scenario.params)
    payload = {"label": scenario.label, **report.as_dict()}
    text = json.dumps(payload, indent=2, sort_keys=True, default=_json_default)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def _cmd_fit_rate(args) -> int:
    columns = read_frames_csv(args.csv)
    if args.column not in columns:
        raise ConfigError(f"column {args.column!r} not in CSV (have {list(columns)})")
    t = columns["t"]
    window = tuple(args.window) if args.window else (t[-1] / 8.0, t[-1])
    fit = fit_decay_rate(t, columns[args.column], window)
    print(json.dumps({"column": args.column, "rate": fit.rate,
                      "r_squared": fit.r_squared, "degenerate": fit.degenerate,
                      "n_samples": fit.n_samples, "window": list(fit.window)},
                     indent=2, sort_keys=True, default=_json_default))
    return EXIT_OK


def _cmd_verify(args) -> int:
    workers = min(args.workers, _max_workers()) if args.workers else _max_workers()
    results = run_all(workers=workers)
    passed = sum(r.passed for r in results)
    for r in results:
        print(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}: {r.detail}")
    print(f"{passed}/{len(results)} checks passed")
    return EXIT_OK if passed == len(results) else EXIT_INVARIANT


def _cmd_preset(args) -> int:
    cfg = preset_config(args.name)
    save_config(cfg, args.out)
    print(f"wrote {args.name} config to {args.out}")
    return EXIT_OK


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sphereflock",
        description="Simulate bonded flocking on the unit sphere and check "
                    "the exponential-rendezvous admissibility condition.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a scenario, emit frames CSV + summary JSON")
    sim.add_argument("--preset", choices=PRESETS)
    sim.add_argument("--config", help="path to a config file")
    sim.add_argument("--t-end", type=float, dest="t_end")
    sim.add_argument("--dt", type=float)
    sim.add_argument("--stride", type=int, help="steps between recorded frames")
    sim.add_argument("--sigma", type=float, help="override the bonding rate")
    sim.add_argument("--out", default="frames.csv")
    sim.add_argument("--summary", default="summary.json")
    sim.add_argument("--fit-window", type=float, nargs=2, metavar=("T0", "T1"))
    sim.add_argument("--full-state", action="store_true",
                     help="also dump per-agent positions to <out>.state.csv")
    sim.set_defaults(func=_cmd_simulate)

    chk = sub.add_parser("check", help="evaluate the initial-data admissibility condition")
    chk.add_argument("--preset", choices=PRESETS)
    chk.add_argument("--config")
    chk.add_argument("--out")
    chk.set_defaults(func=_cmd_check)

    fit = sub.add_parser("fit-rate", help="fit an exponential rate from an existing frames CSV")
    fit.add_argument("--csv", required=True)
    fit.add_argument("--window", type=float, nargs=2, metavar=("T0", "T1"))
    fit.add_argument("--column", default="D_x")
    fit.set_defaults(func=_cmd_fit_rate)

    ver = sub.add_parser("verify", help="run the built-in invariant suite")
    ver.add_argument("--workers", type=int, default=0,
                     help="thread count (capped by SPHEREFLOCK_THREADS)")
    ver.set_defaults(func=_cmd_verify)

    pre = sub.add_parser("preset", help="write a named preset as a config file")
    pre.add_argument("--name", required=True, choices=PRESETS)
    pre.add_argument("--out", default="sphereflock.ini")
    pre.set_defaults(func=_cmd_preset)

    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return args.func(args)
    except AntipodalPair as exc:
        where = f" at t = {exc.time:g}" if exc.time is not None else ""
        print(f"antipodal abort{where}: {exc}", file=sys.stderr)
        return EXIT_ANTIPODAL
    except (SphereFlockError, OSError, ValueError) as exc:
        # anything rejected before stepping begins is a configuration problem
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
