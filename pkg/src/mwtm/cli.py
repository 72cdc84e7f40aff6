"""Command line entry point: ``mwtm {gen,solve,reduce,bench}``.

Exit codes: 0 success, 1 bad input, 2 infeasible (or non-E3 input for
``reduce`` without ``--pad``), 3 solver limit hit, 64 usage error.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from . import io as mio
from .boa import bottom_up_assignment
from .core import InfeasibleInstanceError, MWTMError, check_feasibility
from .exact import BudgetExceeded, DEFAULT_NODE_LIMIT, solve_brute_force, solve_ilp
from .lp import build_lp_relaxation, format_lp, solve_lp

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_LIMIT, EXIT_USAGE = 0, 1, 2, 3, 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _seed(args) -> int:
    env = os.environ.get("MWTM_SEED")
    if env is not None and env.strip():
        return int(env)
    return args.seed


def _write_text(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def cmd_gen(args) -> int:
    from .gen import GenParams, generate_instance
    try:
        params = GenParams(args.nodes, args.degree, args.ratio, args.dist, _seed(args))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    g = generate_instance(params)
    _write_text(mio.dumps_instance(g.instance), args.out)
    print(f"nodes={g.instance.node_count} tasks={g.instance.task_count} feasible={str(g.feasible).lower()}",
          file=sys.stderr)
    return EXIT_OK


def cmd_solve(args) -> int:
    try:
        inst = mio.read_instance(args.input)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        print(f"error: cannot read instance: {exc}", file=sys.stderr)
        return EXIT_INPUT

    if args.dump_lp:
        try:
            Path(args.dump_lp).write_text(format_lp(build_lp_relaxation(inst)))
        except MWTMError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT

    if not check_feasibility(inst):
        result = {"status": "infeasible", "objective": None, "assignment": []}
        _emit_result(result, args.out)
        print("infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE

    code = EXIT_OK
    try:
        if args.method == "boa":
            r = bottom_up_assignment(inst)
            result = {"status": "ok", "objective": r.objective, "assignment": r.assignment.to_json(),
                      "lp_calls": r.lp_calls}
            if args.trace:
                mio.write_json(r.trace_records(), args.trace)
        elif args.method == "ilp":
            r = solve_ilp(inst, node_limit=args.node_limit, time_limit=args.time_limit)
            result = {"status": r.status, "objective": r.objective, "assignment": r.assignment.to_json(),
                      "explored_nodes": r.explored_nodes}
            if not r.optimal:
                code = EXIT_LIMIT
        elif args.method == "brute":
            r = solve_brute_force(inst)
            result = {"status": r.status, "objective": r.objective, "assignment": r.assignment.to_json()}
        else:
            sol = solve_lp(build_lp_relaxation(inst))
            result = {"status": sol.status, "objective": sol.objective,
                      "x": [[i, j, v] for (i, j), v in sorted(sol.support().items())]}
    except BudgetExceeded as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except InfeasibleInstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except MWTMError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    _emit_result(result, args.out)
    print(f"{result['objective']:g}" if result["objective"] is not None else "none")
    return code


def _emit_result(result: dict, path: str | None) -> None:
    if path:
        mio.write_json(result, path)


def cmd_reduce(args) -> int:
    from .reduction import (CNFFormula, DecodeError, DimacsError, ReductionMeta, count_satisfied,
                            decode_truth_assignment, e3sat_to_mwtm, maxe3sat_to_mwtm, parse_dimacs,
                            threesat_to_e3sat)
    if args.decode:
        if not args.meta:
            print("error: --decode needs --meta", file=sys.stderr)
            return EXIT_USAGE
        try:
            meta = ReductionMeta.from_dict(mio.read_json(args.meta))
            result = mio.read_json(args.decode)
            a = mio.assignment_from_json(result["assignment"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INPUT
        try:
            truth = decode_truth_assignment(meta, a)
        except DecodeError as exc:
            print(f"unsatisfiable: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        f = CNFFormula(meta.variable_count, meta.clauses)
        sat = count_satisfied(f, truth)
        print(" ".join(f"{v if t else -v}" for v, t in enumerate(truth, 1)) + " 0")
        print(f"satisfied {sat}/{f.clause_count}", file=sys.stderr)
        return EXIT_OK

    if not args.cnf or not args.out:
        print("error: --cnf and --out are required unless --decode is given", file=sys.stderr)
        return EXIT_USAGE
    try:
        f = parse_dimacs(Path(args.cnf).read_text())
    except (OSError, DimacsError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if f.flavor != "e3sat":
        if not args.pad:
            print(f"error: clauses are not all of width 3 ({f.flavor}); use --pad", file=sys.stderr)
            return EXIT_INFEASIBLE
        if f.flavor == "cnf":
            print("error: clauses wider than 3 cannot be padded", file=sys.stderr)
            return EXIT_INFEASIBLE
        f = threesat_to_e3sat(f)
    inst, meta = (maxe3sat_to_mwtm if args.max else e3sat_to_mwtm)(f)
    mio.write_instance(inst, args.out)
    if args.meta:
        mio.write_json(meta.to_dict(), args.meta)
    print(f"nodes={inst.node_count} tasks={inst.task_count}", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import emit_report, run_grid, summarize
    from .gen import default_grid, mini_grid
    grid = default_grid() if args.grid == "default" else mini_grid()
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    try:
        records = run_grid(grid, args.trials, methods, args.timeout, _seed(args), args.workers)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    _write_text(emit_report(summarize(records), args.format), args.out)
    if args.records:
        mio.write_json([{"cell": list(r.params.cell()), "seed": r.params.seed, "trial": r.trial,
                         "method": r.method, "status": r.status, "objective": r.objective,
                         "runtime": r.runtime, "lp_calls": r.lp_calls, "upper_bound": r.upper_bound}
                        for r in records], args.records)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mwtm", description="Maximum weight tree matching: generate, solve, reduce, benchmark.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a random instance")
    g.add_argument("--nodes", type=int, required=True, help="number of tree nodes")
    g.add_argument("--degree", type=float, required=True, help="mean children per internal node")
    g.add_argument("--ratio", type=float, required=True, help="tasks per node")
    g.add_argument("--dist", choices=("increasing", "decreasing", "random"), required=True,
                   help="weight distribution over depths")
    g.add_argument("--seed", type=int, default=0, help="RNG seed (MWTM_SEED overrides)")
    g.add_argument("--out", default="-", help="instance path (default: stdout)")
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", help="solve an instance")
    s.add_argument("--input", required=True, help="instance JSON")
    s.add_argument("--method", choices=("boa", "ilp", "lp", "brute"), default="boa")
    s.add_argument("--out", help="write result JSON here")
    s.add_argument("--trace", help="boa only: write per-iteration trace JSON here")
    s.add_argument("--dump-lp", help="write the root relaxation in LP text format here")
    s.add_argument("--node-limit", type=int, default=DEFAULT_NODE_LIMIT, help="ilp branch-and-bound node cap")
    s.add_argument("--time-limit", type=float, default=None, help="ilp wall-clock cap in seconds")
    s.set_defaults(func=cmd_solve)

    r = sub.add_parser("reduce", help="reduce a DIMACS CNF formula to an instance, or decode a result")
    r.add_argument("--cnf", help="DIMACS input")
    r.add_argument("--out", help="instance output path")
    r.add_argument("--meta", help="numbering sidecar JSON (written, or read with --decode)")
    r.add_argument("--max", action="store_true", help="MAX-E3-SAT variant")
    r.add_argument("--pad", action="store_true", help="pad clauses of width 1 or 2 to width 3 first")
    r.add_argument("--decode", metavar="RESULT", help="print the truth assignment of a solve result")
    r.set_defaults(func=cmd_reduce)

    b = sub.add_parser("bench", help="run the experiment grid")
    b.add_argument("--grid", choices=("default", "mini"), default="default")
    b.add_argument("--trials", type=int, default=20)
    b.add_argument("--methods", default="ilp,boa,lp", help="comma list of ilp,boa,lp,brute")
    b.add_argument("--timeout", type=float, default=60.0, help="per-solve ILP wall-clock cap")
    b.add_argument("--seed", type=int, default=42, help="master seed (MWTM_SEED overrides)")
    b.add_argument("--out", default="-", help="report path (default: stdout)")
    b.add_argument("--format", choices=("csv", "markdown"), default="csv")
    b.add_argument("--workers", type=int, default=None, help="worker processes")
    b.add_argument("--records", help="also write every raw record as JSON here")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
