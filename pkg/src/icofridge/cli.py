"""Command-line interface: ``simulate``, ``sweep``, ``verify`` and ``montecarlo``.

Inverse temperatures are given as dimensionless products beta * delta.
Every subcommand accepts ``--config FILE`` holding ``key = value`` lines that
mirror the long flags; flags given on the command line win.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .fridge import (
    CycleParams,
    CycleReport,
    DegenerateCycle,
    AttemptCapExceeded,
    run_cycle_stochastic,
    work_and_cop,
)
from .qcore import ORACLE_TOL
from .verify import run_all

OUTPUT_DIR_ENV = "ICOFRIDGE_OUTPUT_DIR"

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_ARGS = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4

SWEEP_COLUMNS = [
    "beta_c_delta",
    "beta_h_delta",
    "alpha",
    "beta_r_delta",
    "r_c",
    "r_h",
    "q_cold_i",
    "q_hot_ii",
    "q_cold_iii",
    "q_cold_cycle",
    "p_minus",
    "mean_attempts",
    "entropy_nats",
    "work_per_cycle",
    "cop",
    "carnot_cop",
    "prc",
    "skipped",
]

RECORD_COLUMNS = ["trial", "attempts", "q_cold", "q_hot", "work"]


class UsageError(Exception):
    pass


def fmt(x) -> str:
    """17 significant digits, enough to round-trip any double."""
    if isinstance(x, bool):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def _json_num(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def output_path(name: str | None, default: str) -> Path:
    if name:
        return Path(name)
    return Path(os.environ.get(OUTPUT_DIR_ENV, ".")) / default


def make_params(args) -> CycleParams:
    delta = args.delta
    beta_h = args.beta_h / delta
    beta_r = None if args.beta_r is None else args.beta_r / delta
    return CycleParams(args.beta_c / delta, beta_h, delta=delta, beta_r=beta_r, alpha=args.alpha)


def report_fields(rep: CycleReport) -> dict:
    p = rep.params
    lg = rep.ledger
    return {
        "beta_c_delta": p.beta_c * p.delta,
        "beta_h_delta": p.beta_h * p.delta,
        "alpha": p.alpha,
        "beta_r_delta": p.beta_r * p.delta,
        "delta": p.delta,
        "r_c": p.r_c,
        "r_h": p.r_h,
        "q_cold_i": lg.q_cold_i,
        "q_hot_ii": lg.q_hot_ii,
        "q_cold_iii": lg.q_cold_iii,
        "q_cold_cycle": lg.q_cold_cycle,
        "p_minus": rep.p_minus,
        "p_plus": rep.p_plus,
        "mean_attempts": rep.mean_attempts,
        "entropy_nats": rep.entropy_per_measurement,
        "erasure_work": rep.erasure_work,
        "work_per_cycle": rep.work_per_cycle,
        "cop": rep.cop,
        "carnot_cop": rep.carnot_cop,
        "prc": rep.prc_satisfied,
        "analytic": lg.analytic,
    }


def render_text(fields: dict, title: str) -> str:
    lines = [title]
    width = max(len(k) for k in fields)
    for k, v in fields.items():
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, (int, float, np.number)):
            v = fmt(v)
        lines.append(f"  {k:<{width}}  {v}")
    return "\n".join(lines) + "\n"


def render_json(fields: dict) -> str:
    clean = {k: _json_num(float(v)) if isinstance(v, (float, np.floating)) else v for k, v in fields.items()}
    return json.dumps(clean, indent=2) + "\n"


def emit(text: str, args) -> None:
    sys.stdout.write(text)
    if args.output:
        Path(args.output).write_text(text)


def cmd_simulate(args) -> int:
    params = make_params(args)
    rep = work_and_cop(params)
    fields = report_fields(rep)
    text = render_json(fields) if args.json else render_text(fields, "ICO refrigeration cycle")
    emit(text, args)
    return EXIT_OK


def axis(lo: float, hi: float, steps: int, spacing: str) -> np.ndarray:
    if steps < 2:
        raise UsageError("grid axes need at least 2 steps")
    if not lo < hi:
        raise UsageError(f"axis minimum {lo} must be below maximum {hi}")
    if spacing == "log":
        if lo <= 0:
            raise UsageError("log spacing needs a positive minimum")
        return np.geomspace(lo, hi, steps)
    return np.linspace(lo, hi, steps)


def sweep_rows(args) -> list[list[str]]:
    bc_axis = axis(args.bc_min, args.bc_max, args.bc_steps, args.bc_spacing)
    bh_axis = axis(args.bh_min, args.bh_max, args.bh_steps, args.bh_spacing)
    rows = []
    for bc in bc_axis:
        for bh in bh_axis:
            br = bh if args.beta_r is None else args.beta_r
            head = [fmt(bc), fmt(bh), fmt(args.alpha), fmt(br)]
            rep = None
            if bc > bh:
                try:
                    params = CycleParams(bc / args.delta, bh / args.delta, args.delta, br / args.delta, args.alpha)
                    rep = work_and_cop(params)
                except (ValueError, DegenerateCycle):
                    rep = None
            if rep is None:
                rows.append(head + [""] * (len(SWEEP_COLUMNS) - 5) + ["1"])
                continue
            f = report_fields(rep)
            rows.append(head + [fmt(f[c]) for c in SWEEP_COLUMNS[4:-1]] + ["0"])
    return rows


def cmd_sweep(args) -> int:
    rows = sweep_rows(args)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    w.writerows(rows)
    path = output_path(args.output, "sweep.csv")
    path.write_text(buf.getvalue())
    n_skipped = sum(r[-1] == "1" for r in rows)
    summary = {"output": str(path), "rows": len(rows), "skipped": n_skipped}
    sys.stdout.write(json.dumps(summary) + "\n" if args.json else f"wrote {len(rows)} rows ({n_skipped} skipped) to {path}\n")
    return EXIT_OK


def cmd_verify(args) -> int:
    tol = ORACLE_TOL if args.tolerance is None else args.tolerance
    results = run_all(tolerance=tol, trials=args.trials, seed=args.seed)
    if args.json:
        text = json.dumps(
            {
                "seed": args.seed,
                "trials": args.trials,
                "tolerance": tol,
                "checks": [{"name": r.name, "max_deviation": float(r.max_deviation), "passed": r.passed} for r in results],
            },
            indent=2,
        ) + "\n"
    else:
        text = "".join(r.line() + "\n" for r in results)
    emit(text, args)
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stderr.write("verification failed: " + ", ".join(failed) + "\n")
        return EXIT_VERIFY
    return EXIT_OK


def cmd_montecarlo(args) -> int:
    params = make_params(args)
    if args.trials < 1:
        raise UsageError("--trials must be >= 1")
    run = run_cycle_stochastic(params, seed=args.seed, trials=args.trials)
    analytic = work_and_cop(params)
    ma, ma_se = run.mean_attempts
    qc, qc_se = run.mean_q_cold
    qh, qh_se = run.mean_q_hot
    wk, wk_se = run.mean_work
    fields = {
        "seed": args.seed,
        "trials": args.trials,
        "beta_c_delta": params.beta_c * params.delta,
        "beta_h_delta": params.beta_h * params.delta,
        "beta_r_delta": params.beta_r * params.delta,
        "alpha": params.alpha,
        "delta": params.delta,
        "p_minus": run.p_minus,
        "mean_attempts": ma,
        "mean_attempts_se": ma_se,
        "mean_attempts_expected": 1.0 / run.p_minus,
        "mean_q_cold": qc,
        "mean_q_cold_se": qc_se,
        "q_cold_cycle_expected": analytic.ledger.q_cold_cycle,
        "mean_q_hot": qh,
        "mean_q_hot_se": qh_se,
        "mean_work": wk,
        "mean_work_se": wk_se,
        "work_per_cycle_expected": analytic.work_per_cycle,
        "cop": run.cop,
        "failed_attempt_net_heat": run.heats.failed_net,
        "rehomogenize_events": run.rehomogenize_events,
    }
    text = render_json(fields) if args.json else render_text(fields, "ICO refrigerator Monte Carlo")
    emit(text, args)
    if args.records:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(RECORD_COLUMNS)
        for k in range(run.trials):
            w.writerow([k, int(run.attempts[k]), fmt(run.q_cold[k]), fmt(run.q_hot[k]), fmt(run.work[k])])
        Path(args.records).write_text(buf.getvalue())
    return EXIT_OK


def _add_cycle_flags(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--beta-c", type=float, required=required, help="cold reservoir beta * delta")
    p.add_argument("--beta-h", type=float, required=required, help="hot reservoir beta * delta")
    p.add_argument("--delta", type=float, default=1.0, help="energy gap (default 1)")
    p.add_argument("--beta-r", type=float, default=None, help="erasure reservoir beta * delta (default: beta-h)")
    p.add_argument("--alpha", type=float, default=0.5, help="control weight on |0> (default 0.5)")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--output", metavar="PATH", help="also write the report to PATH (sweep: CSV path)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tolerance", type=float, default=None)
    common.add_argument("--config", metavar="FILE", help="flat key = value file mirroring the flags")

    parser = argparse.ArgumentParser(prog="icofridge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="analytic heat flows, work and COP")
    _add_cycle_flags(sim)
    sim.set_defaults(func=cmd_simulate)

    sw = sub.add_parser("sweep", parents=[common], help="CSV over a (beta_c, beta_h) grid")
    for ax, lo, hi in (("bc", 0.1, 10.0), ("bh", 0.05, 5.0)):
        sw.add_argument(f"--{ax}-min", type=float, default=lo)
        sw.add_argument(f"--{ax}-max", type=float, default=hi)
        sw.add_argument(f"--{ax}-steps", type=int, default=50)
        sw.add_argument(f"--{ax}-spacing", choices=["linear", "log"], default="linear")
    sw.add_argument("--delta", type=float, default=1.0)
    sw.add_argument("--alpha", type=float, default=0.5)
    sw.add_argument("--beta-r", type=float, default=None, help="fixed erasure beta * delta (default: each row's beta-h)")
    sw.set_defaults(func=cmd_sweep)

    ver = sub.add_parser("verify", parents=[common], help="run the oracle and invariant checks")
    ver.add_argument("--trials", type=int, default=100)
    ver.set_defaults(func=cmd_verify)

    mc = sub.add_parser("montecarlo", parents=[common], help="stochastic repeat-until-minus cycles")
    _add_cycle_flags(mc)
    mc.add_argument("--trials", type=int, default=100_000)
    mc.add_argument("--records", metavar="PATH", help="per-trial CSV")
    mc.set_defaults(func=cmd_montecarlo)
    return parser


def read_config(path: str) -> dict[str, str]:
    out = {}
    for n, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{n}: expected key = value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("command", nargs="?")
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    cfg = read_config(known.config)
    sub = parser._subparsers._group_actions[0].choices.get(known.command)
    if sub is None:
        return
    actions = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in cfg.items():
        if k not in actions or k in ("config", "help"):
            raise UsageError(f"unknown config key {k!r} for {known.command}")
        act = actions[k]
        if isinstance(act, argparse._StoreTrueAction):
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            # argparse runs string defaults through the flag's type
            defaults[k] = v
            act.required = False
    sub.set_defaults(**defaults)


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        _apply_config(parser, argv)
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as e:
        return int(e.code or 0) if isinstance(e.code, int) else EXIT_ARGS
    except (UsageError, ValueError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_ARGS
    except (DegenerateCycle, AttemptCapExceeded) as e:
        sys.stderr.write(f"degenerate cycle: {e}\n")
        return EXIT_DEGENERATE
    except OSError as e:
        sys.stderr.write(f"I/O error: {e}\n")
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
