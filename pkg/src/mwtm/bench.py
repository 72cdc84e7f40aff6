"""Experiment grid: generate instances, run the solvers, summarize, and emit tables."""

from __future__ import annotations

import csv
import io
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .boa import bottom_up_assignment
from .exact import solve_brute_force, solve_ilp, BudgetExceeded
from .gen import GenParams, generate_instance, trial_seed
from .lp import build_lp_relaxation, solve_lp

METHODS = ("ilp", "boa", "lp", "brute")
DEFAULT_TIMEOUT = 60.0
REPORT_COLUMNS = ("node_count", "avg_degree", "task_ratio", "weight_dist", "method",
                  "mean_objective", "mean_runtime", "mean_lp_calls", "nan_flag", "inf_flag")
EXTRA_COLUMNS = ("ok_trials", "trials", "gap", "gap_to_bound")


@dataclass(frozen=True)
class ExperimentRecord:
    params: GenParams
    trial: int
    method: str
    status: str  # ok | infeasible | timeout
    objective: float | None
    runtime: float
    lp_calls: int | None = None
    # for a timed-out ILP: the first relaxation bound, used as optimum surrogate
    upper_bound: float | None = None

    def key(self) -> tuple:
        """Everything except the runtime, for reproducibility checks."""
        return (self.params, self.trial, self.method, self.status, self.objective,
                self.lp_calls, self.upper_bound)


def _run_method(method: str, inst, timeout: float) -> tuple[str, float | None, int | None, float | None]:
    if method == "boa":
        r = bottom_up_assignment(inst)
        return "ok", r.objective, r.lp_calls, None
    if method == "lp":
        sol = solve_lp(build_lp_relaxation(inst))
        return ("ok", sol.objective, None, None) if sol.optimal else ("infeasible", None, None, None)
    if method == "ilp":
        r = solve_ilp(inst, time_limit=timeout)
        if r.optimal:
            return "ok", r.objective, None, None
        bound = r.root_bound
        if math.isnan(bound):
            bound = solve_lp(build_lp_relaxation(inst)).objective
        return "timeout", None, None, bound
    if method == "brute":
        try:
            r = solve_brute_force(inst)
        except BudgetExceeded:
            return "timeout", None, None, None
        return "ok", r.objective, None, None
    raise ValueError(f"unknown method {method!r}")


def run_trial(params: GenParams, trial: int, methods: Sequence[str],
              timeout: float = DEFAULT_TIMEOUT) -> list[ExperimentRecord]:
    """All methods on one generated instance; ``params.seed`` selects the instance."""
    g = generate_instance(params)
    out = []
    for method in methods:
        if not g.feasible:
            out.append(ExperimentRecord(params, trial, method, "infeasible", None, 0.0))
            continue
        t0 = time.perf_counter()
        status, obj, calls, bound = _run_method(method, g.instance, timeout)
        out.append(ExperimentRecord(params, trial, method, status, obj,
                                    time.perf_counter() - t0, calls, bound))
    return out


def _job(args):
    return run_trial(*args)


def run_grid(grid: Sequence[GenParams], trials: int = 20, methods: Sequence[str] = ("ilp", "boa", "lp"),
             timeout: float = DEFAULT_TIMEOUT, master_seed: int = 0,
             workers: int | None = None) -> list[ExperimentRecord]:
    """Records ordered by (cell, trial, method) regardless of ``workers``."""
    if timeout <= 0:
        raise ValueError("timeout must be positive")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}")
    jobs = [(p.with_seed(trial_seed(master_seed, c, k)), k, tuple(methods), timeout)
            for c, p in enumerate(grid) for k in range(trials)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            batches = list(pool.map(_job, jobs))
    else:
        batches = [_job(j) for j in jobs]
    return [r for b in batches for r in b]


@dataclass(frozen=True)
class MethodStats:
    mean_objective: float
    mean_runtime: float
    mean_lp_calls: float
    ok_trials: int
    trials: int


@dataclass(frozen=True)
class CellSummary:
    cell: tuple  # (node_count, avg_degree, task_ratio, weight_dist)
    methods: dict[str, MethodStats] = field(default_factory=dict)
    nan_flag: bool = False
    inf_flag: bool = False
    gap: float = math.nan
    gap_to_bound: float = math.nan


def _mean(xs: list[float]) -> float:
    return float(np.mean(xs)) if xs else math.nan


def summarize(records: Iterable[ExperimentRecord]) -> list[CellSummary]:
    """Per-cell means over ok trials, in first-seen cell order.

    ``gap`` is ``(mean ilp - mean boa) / mean ilp`` over trials where both
    finished; ``gap_to_bound`` does the same against the relaxation value
    (the lp method, or a timed-out ILP's bound).
    """
    cells: dict[tuple, list[ExperimentRecord]] = {}
    for r in records:
        cells.setdefault(r.params.cell(), []).append(r)
    out = []
    for cell, recs in cells.items():
        by_method: dict[str, list[ExperimentRecord]] = {}
        for r in recs:
            by_method.setdefault(r.method, []).append(r)
        stats = {}
        for method, rs in by_method.items():
            ok = [r for r in rs if r.status == "ok"]
            calls = [r.lp_calls for r in ok if r.lp_calls is not None]
            stats[method] = MethodStats(_mean([r.objective for r in ok]), _mean([r.runtime for r in ok]),
                                        _mean(calls), len(ok), len(rs))
        nan_flag = all(r.status == "infeasible" for r in recs)
        inf_flag = any(r.method == "ilp" and r.status == "timeout" for r in recs)

        per_trial: dict[int, dict[str, ExperimentRecord]] = {}
        for r in recs:
            per_trial.setdefault(r.trial, {})[r.method] = r
        opt, heur, bnd, heur_b = [], [], [], []
        for t in per_trial.values():
            boa = t.get("boa")
            if boa is None or boa.status != "ok":
                continue
            ilp = t.get("ilp")
            if ilp is not None and ilp.status == "ok":
                opt.append(ilp.objective)
                heur.append(boa.objective)
            lp = t.get("lp")
            bound = lp.objective if lp is not None and lp.status == "ok" else (
                ilp.upper_bound if ilp is not None and ilp.status == "timeout" else None)
            if bound is not None:
                bnd.append(bound)
                heur_b.append(boa.objective)
        gap = (np.mean(opt) - np.mean(heur)) / np.mean(opt) if opt and np.mean(opt) > 0 else math.nan
        gtb = (np.mean(bnd) - np.mean(heur_b)) / np.mean(bnd) if bnd and np.mean(bnd) > 0 else math.nan
        out.append(CellSummary(cell, stats, nan_flag, inf_flag, float(gap), float(gtb)))
    return out


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.6g}"
    return str(v)


def report_rows(summaries: Sequence[CellSummary], extra: bool = True) -> list[list[str]]:
    rows = []
    for s in summaries:
        for method, st in s.methods.items():
            row = list(s.cell) + [method, st.mean_objective, st.mean_runtime, st.mean_lp_calls,
                                  s.nan_flag, s.inf_flag]
            if extra:
                row += [st.ok_trials, st.trials, s.gap, s.gap_to_bound]
            rows.append([_fmt(v) for v in row])
    return rows


def emit_report(summaries: Sequence[CellSummary], fmt: str = "csv", extra: bool = True) -> str:
    header = list(REPORT_COLUMNS) + (list(EXTRA_COLUMNS) if extra else [])
    rows = report_rows(summaries, extra)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    if fmt == "markdown":
        lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
        lines += ["| " + " | ".join(r) + " |" for r in rows]
        return "\n".join(lines) + "\n"
    raise ValueError(f"unsupported format {fmt!r}")
