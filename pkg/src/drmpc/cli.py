"""Command line front end: ``drmpc {gen,design,solve,simulate,bench}``.

Every subcommand reads an instance either from ``--instance FILE`` or from
``--n/--m/--seed`` (the random family) and writes to ``--out`` or stdout.
Module errors end the process with the error's own exit code and a single
diagnostic line on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

import numpy as np

from . import bench, io
from .deadbeat import synthesize_gains
from .errors import DimensionError, DRMPCError, Infeasible
from .ftocp import StageCost, build_drmpc, build_nominal, solve_ftocp
from .linsys import double_integrator, generate_instance
from .simulate import DisturbanceMode, run_closed_loop, trace_header, trace_rows
from .tightening import tighten

FIXTURES = {"double-integrator": double_integrator}


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.replace(" ", ",").split(",") if v], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma separated vector: {text!r}") from None


def _add_instance_args(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("instance")
    g.add_argument("--instance", metavar="FILE", help="instance document written by 'gen' (default: %(default)s)")
    g.add_argument("--n", type=int, default=None, help="state dimension of a generated instance (default: %(default)s)")
    g.add_argument("--m", type=int, default=None, help="input dimension of a generated instance (default: %(default)s)")
    g.add_argument("--seed", type=int, default=0, help="instance seed; also seeds disturbances (default: %(default)s)")


def _add_design_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--design", metavar="FILE", help="design document written by 'design' (default: recompute)")
    p.add_argument("--horizon", type=int, default=None, help="prediction horizon N >= M (default: M)")


def _add_cost_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--qweight", type=float, default=1.0, help="state weight, Q = q*I (default: %(default)s)")
    p.add_argument("--rweight", type=float, default=1.0, help="input weight, R = r*I (default: %(default)s)")


def _add_out(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", metavar="FILE", default=None, help="output path (default: stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="drmpc", description="Deadbeat robust MPC toolkit.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a random or fixture instance",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_instance_args(p)
    p.add_argument("--fixture", choices=sorted(FIXTURES), default=None, help="named fixture instead of a random draw")
    _add_out(p)

    p = sub.add_parser("design", help="deadbeat gains and tightened sets",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_instance_args(p)
    p.add_argument("--horizon", type=int, default=None, help="prediction horizon N >= M (default: M)")
    _add_out(p)

    p = sub.add_parser("solve", help="one FTOCP at a given initial state",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_instance_args(p)
    _add_design_args(p)
    _add_cost_args(p)
    p.add_argument("--x0", type=_vector, required=True, help="initial state, comma separated")
    p.add_argument("--nominal", action="store_true", help="solve the untightened problem instead")
    _add_out(p)

    p = sub.add_parser("simulate", help="closed-loop receding-horizon run",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_instance_args(p)
    _add_design_args(p)
    _add_cost_args(p)
    p.add_argument("--x0", type=_vector, default=None, help="initial state, comma separated (default: origin)")
    p.add_argument("--steps", type=int, default=50, help="number of closed-loop steps")
    p.add_argument("--mode", choices=["zero", "uniform", "vertex"], default="vertex", help="disturbance mode")
    p.add_argument("--zero-after", type=int, default=None, help="switch disturbances off from this step on")
    p.add_argument("--no-timing", action="store_true", help="omit the solve_ms column")
    _add_out(p)

    p = sub.add_parser("bench", help="offline setup benchmark over an (n, m) grid",
                       formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--n", type=int, nargs="+", default=list(bench.DESK_N), help="state dimensions")
    p.add_argument("--m", type=int, nargs="+", default=list(bench.DESK_M), help="input dimensions")
    p.add_argument("--full", action="store_true", help="use the full-scale grid (takes hours)")
    p.add_argument("--runs", type=int, default=10, help="runs per cell")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--workers", type=int, default=bench.default_workers(),
                   help=f"worker processes (environment: {bench.WORKERS_ENV})")
    p.add_argument("--no-timing", action="store_true", help="omit timing fields")
    p.add_argument("--rows", metavar="FILE", default=None, help="delimited rows output (default: stdout)")
    _add_out(p)
    return ap


def _load_instance(args):
    if args.instance:
        return io.instance_from_dict(io.read_json(args.instance))
    if args.n is None or args.m is None:
        raise DimensionError("give --instance FILE or both --n and --m")
    return generate_instance(args.n, args.m, args.seed)


def _load_design(args, inst):
    if getattr(args, "design", None):
        policy, tight = io.design_from_dict(io.read_json(args.design))
        if args.horizon is not None:
            tight = tight.with_horizon(args.horizon)
        return policy, tight
    policy = synthesize_gains(inst.sys)
    return policy, tighten(inst, policy, N=args.horizon)


def _emit(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_gen(args) -> int:
    if args.fixture:
        inst = FIXTURES[args.fixture]()
    else:
        inst = _load_instance(args)
    _emit(io.dumps(io.instance_to_dict(inst)), args.out)
    return 0


def cmd_design(args) -> int:
    inst = _load_instance(args)
    policy, tight = _load_design(args, inst)
    _emit(io.dumps(io.design_to_dict(policy, tight)), args.out)
    return 0


def cmd_solve(args) -> int:
    inst = _load_instance(args)
    policy, tight = _load_design(args, inst)
    cost = StageCost.identity(inst.n, inst.m, args.qweight, args.rweight)
    if args.nominal:
        spec = build_nominal(inst, cost, args.x0, tight.N)
    else:
        spec = build_drmpc(inst, tight, cost, args.x0)
    plan = solve_ftocp(spec)
    if not plan.feasible:
        raise Infeasible(f"{spec.kind} FTOCP at x0 = {spec.x0.tolist()}: {plan.status.value}")
    doc = {
        "kind": spec.kind,
        "N": spec.N,
        "counts": dict(zip(("vars", "eq", "ineq"), spec.counts())),
        "objective": plan.objective,
        "u": plan.u.tolist(),
        "x": plan.x.tolist(),
    }
    _emit(io.dumps(doc), args.out)
    return 0


def cmd_simulate(args) -> int:
    import csv
    import io as _io

    inst = _load_instance(args)
    _, tight = _load_design(args, inst)
    cost = StageCost.identity(inst.n, inst.m, args.qweight, args.rweight)
    x0 = np.zeros(inst.n) if args.x0 is None else args.x0
    mode = DisturbanceMode(args.mode, zero_after=args.zero_after)
    trace = run_closed_loop(inst, tight, cost, x0, args.steps, mode, seed=args.seed)
    timing = not args.no_timing
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(trace_header(inst.n, inst.m, timing))
    w.writerows(trace_rows(trace, timing))
    _emit(buf.getvalue(), args.out)
    if not trace.all_feasible:
        raise Infeasible(f"closed loop infeasible at step {trace.infeasible_step} {trace.message}".rstrip())
    return 0


def cmd_bench(args) -> int:
    if args.full:
        grid = bench.full_grid()
    else:
        grid = [(n, m) for m in args.m for n in args.n]
    result = bench.run_sweep(grid, args.runs, args.seed, workers=args.workers)
    table, rows = bench.report(result, timing=not args.no_timing)
    if not args.no_timing:
        env = ", ".join(f"{k}={v}" for k, v in result.environment.items())
        table += f"\n{env}\n"
    _emit(table, args.out)
    _emit(rows, args.rows)
    return 0


COMMANDS = {
    "gen": cmd_gen,
    "design": cmd_design,
    "solve": cmd_solve,
    "simulate": cmd_simulate,
    "bench": cmd_bench,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except DRMPCError as exc:
        print(f"drmpc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, json.JSONDecodeError, KeyError) as exc:
        print(f"drmpc {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
