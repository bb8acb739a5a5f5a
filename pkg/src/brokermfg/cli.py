"""Command-line entry point: solve, simulate, finite-n, reproduce-example, print-bound.

Every command reads a flat key = value config (flags override keys), writes
its outputs into a fresh run directory named by timestamp and seed, and puts
a manifest there last.  Exit code is zero only when nothing failed.
"""
from __future__ import annotations

import argparse
import sys
import time
from datetime import datetime, timezone
from pathlib import Path

from .errors import BrokerMfgError, ConfigParse
from .finite_game import convergence_study
from .model import (DEFAULT_N_STEPS, TimeGrid, b_admissibility_bound, load_config,
                    params_from_config, parse_config_text, validate)
from .pipeline import (EXAMPLE_CHECK_TOL, EXAMPLE_N_STEPS, RunWriter, example_params,
                       run_example_checks, solve_pipeline, write_check_outputs,
                       write_simulation_outputs, write_solve_outputs)
from .simulate import SimulationConfig


def _apply_overrides(cfg: dict, pairs: list[str]) -> dict:
    for pair in pairs or ():
        if "=" not in pair:
            raise ConfigParse(f"override {pair!r} is not of the form key=value")
        merged = parse_config_text(pair)
        cfg.update(merged)
    return cfg


def _load(args) -> dict:
    cfg = load_config(args.config) if args.config else {}
    return _apply_overrides(cfg, args.set)


def _make_run_dir(base: str, seed: int) -> Path:
    stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")
    path = Path(base) / f"{stamp}-seed{seed}"
    suffix = 0
    while path.exists():
        suffix += 1
        path = Path(base) / f"{stamp}-seed{seed}-{suffix}"
    path.mkdir(parents=True)
    return path


def _sim_config(cfg: dict, args) -> SimulationConfig:
    t_end = float(cfg.get("T", 2.0))
    n_check = 6
    checkpoints = tuple(t_end * k / (n_check - 1) for k in range(n_check))
    return SimulationConfig(
        n_paths=getattr(args, "n_paths", 10_000),
        seed=int(cfg.get("seed", 7)),
        q0_mean=float(cfg.get("q0_mean", 0.0)),
        q0_std=float(cfg.get("q0_std", 0.0)),
        checkpoints=checkpoints,
    )


def cmd_solve(args) -> int:
    cfg = _load(args)
    params = params_from_config(cfg)
    grid = TimeGrid(params.T, int(cfg.get("n_steps", DEFAULT_N_STEPS)))
    result = solve_pipeline(params, grid)
    seed = int(cfg.get("seed", 7))
    writer = RunWriter(_make_run_dir(args.out, seed), seed, config_echo=cfg)
    write_solve_outputs(writer, result)
    if args.with_simulation:
        write_simulation_outputs(writer, result, _sim_config(cfg, args))
    writer.manifest()
    print(f"revelation policy: {result.policy.label()}  "
          f"(reduced objective {result.objective:.6g})")
    print(f"outputs in {writer.directory}")
    return 0


def cmd_simulate(args) -> int:
    cfg = _load(args)
    params = params_from_config(cfg)
    grid = TimeGrid(params.T, int(cfg.get("n_steps", DEFAULT_N_STEPS)))
    result = solve_pipeline(params, grid)
    seed = int(cfg.get("seed", 7))
    writer = RunWriter(_make_run_dir(args.out, seed), seed, config_echo=cfg)
    write_solve_outputs(writer, result)
    write_simulation_outputs(writer, result, _sim_config(cfg, args))
    writer.manifest()
    print(f"simulation outputs in {writer.directory}")
    return 0


def cmd_finite_n(args) -> int:
    cfg = _load(args)
    params = params_from_config(cfg)
    grid = TimeGrid(params.T, int(cfg.get("n_steps", DEFAULT_N_STEPS)))
    ns = [int(x) for x in args.n_list.split(",") if x.strip()]
    result = solve_pipeline(params, grid)
    mu_path = result.policy.mu_path(params)
    seed = int(cfg.get("seed", 7))
    start = time.perf_counter()
    report = convergence_study(params, result.trader, mu_path, ns, args.repeats, seed)
    writer = RunWriter(_make_run_dir(args.out, seed), seed, config_echo=cfg)
    rows = list(report.rows) + [("slope", "", report.slope_e1, report.slope_e2)]
    writer.csv(
        "finite_n.csv",
        "finite-game moment errors per repeat; final row holds fitted log-log slopes",
        ["N", "repeat", "e1", "e2"],
        rows,
    )
    writer.records["finite_n"] = {
        "slope_e1": report.slope_e1,
        "slope_e2": report.slope_e2,
        "e1_by_n": report.e1_by_n,
        "e2_by_n": report.e2_by_n,
        "coefficients_equal_mean_field": params.b == 0.0,
    }
    writer.timings["finite_n"] = time.perf_counter() - start
    writer.manifest()
    print(f"fitted slopes: e1 {report.slope_e1:.3f}, e2 {report.slope_e2:.3f}")
    if params.b == 0.0:
        print("note: b = 0, finite-game coefficients equal the mean-field ones exactly")
    print(f"outputs in {writer.directory}")
    return 0


def cmd_reproduce_example(args) -> int:
    checks, result = run_example_checks(n_steps=args.n_steps, tol=args.tol,
                                        n_paths=args.n_paths, seed=args.seed)
    writer = RunWriter(_make_run_dir(args.out, args.seed), args.seed,
                       config_echo={"n_steps": args.n_steps, "tol": args.tol})
    write_solve_outputs(writer, result)
    write_simulation_outputs(writer, result,
                             SimulationConfig(n_paths=args.n_paths, seed=args.seed))
    write_check_outputs(writer, checks)
    writer.manifest()
    width = max(len(c.name) for c in checks)
    for c in checks:
        print(f"{c.name:<{width}}  {'pass' if c.passed else 'FAIL'}  {c.detail}")
    all_passed = all(c.passed for c in checks)
    print(f"outputs in {writer.directory}")
    return 0 if all_passed else 1


def cmd_print_bound(args) -> int:
    cfg = _load(args)
    params = params_from_config(cfg) if cfg else example_params()
    validate(params)
    bound = b_admissibility_bound(params)
    print(f"{bound:.10g}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brokermfg",
        description="Equilibrium solver for an informed broker facing a mean-field "
                    "crowd of uninformed traders.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, needs_config: bool):
        p.add_argument("--config", required=needs_config, help="flat key = value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--out", default="runs", help="base directory for run outputs")

    p = sub.add_parser("solve", help="compute coefficients and the revelation policy")
    add_common(p, True)
    p.add_argument("--with-simulation", action="store_true",
                   help="also emit trajectory CSVs")
    p.add_argument("--n-paths", type=int, default=10_000)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="solve and emit trajectory CSVs")
    add_common(p, True)
    p.add_argument("--n-paths", type=int, default=10_000)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("finite-n", help="finite-game convergence study")
    add_common(p, True)
    p.add_argument("--n-list", default="100,400,1600",
                   help="comma-separated trader counts")
    p.add_argument("--repeats", type=int, default=64)
    p.set_defaults(func=cmd_finite_n)

    p = sub.add_parser("reproduce-example",
                       help="run the bundled example and verify its known results")
    p.add_argument("--n-steps", type=int, default=EXAMPLE_N_STEPS)
    p.add_argument("--tol", type=float, default=EXAMPLE_CHECK_TOL)
    p.add_argument("--n-paths", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", default="runs")
    p.set_defaults(func=cmd_reproduce_example)

    p = sub.add_parser("print-bound",
                       help="print the permanent-impact admissibility bound")
    p.add_argument("--config", required=False)
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_print_bound)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BrokerMfgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
