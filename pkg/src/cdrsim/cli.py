"""Command-line interface: simulate, convergence, gen-train, gen-test, inspect.

Defaults follow the published setup (L=20, T=1.5, tol=1e-6).  A JSON
config file may supply any long-option value (keys use underscores);
explicit command-line flags override the file.  Every run echoes its
resolved configuration to stdout for provenance.

Exit codes: 0 ok, 2 configuration error, 3 solver failure, 4 dataset
format error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .coefficients import (
    Conditioning,
    SpdViolationError,
    resolve_preset,
    sample_conditioning,
)
from .convergence import run_study, write_loglog_csv, write_report_csv
from .dataset import (
    DatasetFile,
    DatasetFormatError,
    PipelineConfig,
    PipelineError,
    gen_test_set,
    gen_training_set,
    write_simulation,
)
from .grid import make_grid
from .initial import load_hill_csv, reference_ic, render_ic, sample_ic
from .integrate import SolverBlowupError, StepperConfig, integrate_to, write_step_log
from .rng import SplitMix64

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_FORMAT = 4


class ConfigError(Exception):
    pass


def _echo_config(args: argparse.Namespace) -> None:
    resolved = {k: v for k, v in sorted(vars(args).items()) if k != "func"}
    print("resolved-config " + json.dumps(resolved, sort_keys=True, default=str))


def _pipeline_config(args) -> PipelineConfig:
    return PipelineConfig(
        fine_n=args.fine_n,
        length=args.length,
        t_final=args.t_final,
        tol=args.tol,
        dtype="float64" if args.f64 else "float32",
    )


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_simulate(args) -> int:
    if args.out is None:
        raise ConfigError("simulate requires --out")
    grid = make_grid(args.n, args.length)

    if args.ic_fixture:
        ic = load_hill_csv(args.ic_fixture, args.length)
    elif args.ic_seed is not None:
        ic = sample_ic(SplitMix64(args.ic_seed), grid)
    else:
        ic = reference_ic(args.length)

    if args.c is not None:
        c = Conditioning(*args.c)
        preset = c
    elif args.c_seed is not None:
        c = sample_conditioning(SplitMix64(args.c_seed))
        preset = c
    else:
        c = None
        preset = "reference"

    preset_name, coeff_fn = resolve_preset(preset)
    coeff = coeff_fn(grid)
    u0 = render_ic(ic, grid)
    cfg = StepperConfig(tol=args.tol, t_final=args.t_final, dt_init0=args.dt_init0)
    log: list = []
    u_final, stats = integrate_to(u0, coeff, cfg, step_log=log)

    write_simulation(
        args.out,
        u0,
        u_final,
        stats,
        _pipeline_config(args),
        preset_name,
        c,
        args.ic_seed,
        args.c_seed,
    )
    if args.step_log:
        write_step_log(args.step_log, log)
    print(
        f"simulate: n={grid.n} preset={preset_name} t_final={args.t_final} "
        f"steps={stats.steps_accepted}+{stats.steps_rejected}rej "
        f"avg_dt={stats.avg_dt:.6g} max={float(np.max(u_final.values)):.6g}"
    )
    return EXIT_OK


def cmd_convergence(args) -> int:
    ic = load_hill_csv(args.ic_fixture, args.length) if args.ic_fixture else reference_ic(args.length)
    cfg = StepperConfig(tol=args.tol, t_final=args.t_final, dt_init0=args.dt_init0)
    report = run_study(
        ic, "reference", levels=args.levels, n0=args.n0, length=args.length, cfg=cfg
    )
    header = (
        f"{'h/L':>10} {'diff_l2':>12} {'diff_linf':>12} {'eoc_l2':>8} "
        f"{'eoc_linf':>8} {'rel_l2':>12} {'rel_linf':>12} {'avg_dt':>10} {'wall_s':>8}"
    )
    print(header)
    for row in report.rows():
        fmt = lambda v, w: ("/" if v is None else f"{v:.6g}").rjust(w)
        print(
            f"{row['h_over_L']:>10.6g} {fmt(row['diff_l2'],12)} {fmt(row['diff_linf'],12)} "
            f"{fmt(row['eoc_l2'],8)} {fmt(row['eoc_linf'],8)} {fmt(row['rel_l2'],12)} "
            f"{fmt(row['rel_linf'],12)} {row['avg_dt']:>10.4g} {row['wall_seconds']:>8.2f}"
        )
    if args.out:
        write_report_csv(args.out, report)
    if args.loglog:
        write_loglog_csv(args.loglog, report)
    return EXIT_OK


def cmd_gen_train(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "train.cdr")
    manifest = gen_training_set(
        path, n=args.n, seed=args.seed, pipe=_pipeline_config(args), jobs=args.jobs
    )
    print(f"gen-train: wrote {len(manifest['records'])} records to {path}")
    return EXIT_OK


def cmd_gen_test(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "test.cdr")
    manifest = gen_test_set(
        path,
        n_ic=args.nic,
        n_c=args.nc,
        seed=args.seed,
        pipe=_pipeline_config(args),
        jobs=args.jobs,
    )
    print(f"gen-test: wrote {len(manifest['records'])} records to {path}")
    return EXIT_OK


def cmd_inspect(args) -> int:
    with DatasetFile(args.path) as ds:
        m = ds.manifest
        print(f"kind: {m['kind']}")
        print(f"records: {len(ds)}")
        print(
            f"grid: fine {m['grid']['fine_n']} coarse {m['grid']['coarse_n']} "
            f"L={m['grid']['length']}"
        )
        print(f"time: T={m['time']['t_final']} tol={m['time']['tol']}")
        print(f"rng: {m['rng']['algorithm']} seed={m['rng']['master_seed']}")
        print(f"dtype: {m['dtype']} layout: {m['layout']}")
        if "factorial" in m:
            print(
                f"factorial: {m['factorial']['n_ic']} x {m['factorial']['n_c']}"
            )
        box = m.get("conditioning_box")
        for k in range(len(ds)):
            x0, xm, rec = ds.read_record(k)
            c = rec.get("c")
            in_box = (
                "-"
                if c is None or box is None
                else str(all(lo <= v <= hi for v, (lo, hi) in zip(c, box))).lower()
            )
            print(
                f"record {rec['index']}: c={c} in_box={in_box} "
                f"x0=[{x0.min():.4g},{x0.max():.4g}] "
                f"xm=[{xm.min():.4g},{xm.max():.4g}] avg_dt={rec['avg_dt']:.4g}"
            )
        if args.export is not None:
            x0, xm, rec = ds.read_record(args.export)
            with open(args.csv, "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["i", "j", "x0", "xm"])
                m_side = x0.shape[0]
                for i in range(m_side):
                    for j in range(m_side):
                        writer.writerow([i, j, repr(float(x0[i, j])), repr(float(xm[i, j]))])
            print(f"exported record {args.export} to {args.csv}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common_physics(p: argparse.ArgumentParser) -> None:
    p.add_argument("--length", type=float, default=20.0, help="domain edge length L (default 20)")
    p.add_argument("--t-final", type=float, default=1.5, help="final time T (default 1.5)")
    p.add_argument("--tol", type=float, default=1e-6, help="local error tolerance (default 1e-6)")
    p.add_argument("--dt-init0", type=float, default=1e-4, help="first step-size guess (default 1e-4)")


def _add_pipeline(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fine-n", type=int, default=256, help="fine grid nodes per axis (default 256)")
    p.add_argument("--f64", action="store_true", help="store float64 payload instead of float32")
    p.add_argument("--jobs", type=int, default=os.cpu_count() or 1, help="worker processes (default: cores)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cdrsim",
        description=(
            "2-D convection-diffusion-reaction solver (defaults: L=20, T=1.5, "
            "tol=1e-6) with convergence studies and dataset generation"
        ),
    )
    parser.add_argument("--config", help="JSON file with default option values")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="integrate one problem and write the final field")
    p.add_argument("--n", type=int, default=51, help="grid nodes per axis (default 51)")
    _add_common_physics(p)
    _add_pipeline(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--ic-seed", type=int, help="sample the initial condition from this seed")
    g.add_argument("--ic-fixture", help="load hills from CSV (i,H,x_max,y_max,R)")
    g2 = p.add_mutually_exclusive_group()
    g2.add_argument("--c", type=float, nargs=4, metavar=("C1", "C2", "C3", "C4"),
                    help="conditioning vector (default: fixed reference preset)")
    g2.add_argument("--c-seed", type=int, help="sample the conditioning from this seed")
    p.add_argument("--out", help="output field file (.cdr, single record)")
    p.add_argument("--step-log", help="write per-step CSV (step,t,dt,err_inf,accepted)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("convergence", help="mesh-refinement study on nested grids")
    p.add_argument("--levels", type=int, default=4, help="refinement levels (default 4; 5 reproduces the finest published level)")
    p.add_argument("--n0", type=int, default=51, help="coarsest grid nodes per axis (default 51)")
    _add_common_physics(p)
    p.add_argument("--ic-fixture", help="hill CSV (default: packaged study fixture)")
    p.add_argument("--out", help="report CSV path")
    p.add_argument("--loglog", help="(h, error) CSV path for log-log plots")
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("gen-train", help="generate independently sampled training pairs")
    p.add_argument("--n", type=int, default=10000, help="number of pairs (default 10000)")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--out", required=True, help="output directory (writes train.cdr)")
    _add_common_physics(p)
    _add_pipeline(p)
    p.set_defaults(func=cmd_gen_train)

    p = sub.add_parser("gen-test", help="generate the factorial test set")
    p.add_argument("--nic", type=int, default=50, help="initial-condition groups (default 50)")
    p.add_argument("--nc", type=int, default=50, help="conditioning groups (default 50)")
    p.add_argument("--seed", type=int, required=True, help="master seed")
    p.add_argument("--out", required=True, help="output directory (writes test.cdr)")
    _add_common_physics(p)
    _add_pipeline(p)
    p.set_defaults(func=cmd_gen_test)

    p = sub.add_parser("inspect", help="print a dataset summary and per-record stats")
    p.add_argument("path", help="dataset file (.cdr)")
    p.add_argument("--export", type=int, help="record index to export as CSV")
    p.add_argument("--csv", default="record.csv", help="CSV path for --export")
    p.set_defaults(func=cmd_inspect)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Load --config JSON into parser defaults; explicit flags still win."""
    # allow_abbrev would let --c swallow --config's value
    probe = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    probe.add_argument("--config")
    known, _ = probe.parse_known_args(argv)
    if known.config:
        try:
            with open(known.config) as fh:
                values = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config file {known.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError(f"config file {known.config} must hold a JSON object")
        for sub_action in parser._subparsers._group_actions:  # noqa: SLF001
            for sp in sub_action.choices.values():
                sp.set_defaults(**values)
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        _echo_config(args)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DatasetFormatError as exc:
        print(f"format error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except (SolverBlowupError, PipelineError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, SpdViolationError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
