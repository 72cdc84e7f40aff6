"""Bottom-up assignment: iterative LP relaxation with leaf-first rounding.

Each iteration solves the relaxation of the residual problem, then sweeps
the current leaves in non-increasing order of their fractional values,
fixing a pair whenever the leaf and the task are both still free.  When a
sweep runs dry the unused leaves are pruned so their ancestors can take a
turn, but only while the number of assignable leaves stays at least the
number of open tasks; otherwise a fresh LP call starts the next iteration.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import (ROOT, Assignment, Instance, InfeasibleInstanceError, MWTMError,
                   TreeTopology, assignment_weight, check_feasibility, delete_nodes,
                   leaves, path_to_root, require_zero_root)
from .lp import LPFailure, LPSolution, build_lp_relaxation, solve_lp

EPS_ZERO = 1e-9
# x-values are compared after rounding to this many decimals so that simplex
# round-off does not override the node-then-task tie-break.
KEY_DECIMALS = 9

LPOracle = Callable[[Instance, Assignment], LPSolution]


class InvariantViolation(MWTMError, AssertionError):
    """Internal consistency check failed; indicates a bug, not bad input."""


def default_lp(instance: Instance, fixed: Assignment) -> LPSolution:
    return solve_lp(build_lp_relaxation(instance, fixed))


@dataclass(frozen=True)
class Pick:
    node: int
    task: int
    x: float
    sweep: int


@dataclass(frozen=True)
class IterationTrace:
    fixed_before: Assignment
    tasks_left: frozenset[int]
    nodes_left: frozenset[int]
    lp_objective: float
    leaf_picks: tuple[Pick, ...]
    sweeps: int
    # done | no-mass | invariant
    exit_reason: str

    def to_dict(self) -> dict:
        return {
            "fixed_before": self.fixed_before.to_json(),
            "tasks_left": sorted(self.tasks_left),
            "nodes_left": sorted(self.nodes_left),
            "lp_objective": self.lp_objective,
            "leaf_picks": [[p.node, p.task, p.x, p.sweep] for p in self.leaf_picks],
            "sweeps": self.sweeps,
            "exit_reason": self.exit_reason,
        }


@dataclass(frozen=True)
class BOAResult:
    assignment: Assignment
    objective: float
    lp_calls: int
    iterations: tuple[IterationTrace, ...] = field(default=())
    # relaxation of the unfixed problem, kept so exact search can reuse it
    root_lp: LPSolution | None = field(default=None, repr=False, compare=False)

    @property
    def first_lp_objective(self) -> float | None:
        return self.iterations[0].lp_objective if self.iterations else None

    def trace_records(self) -> list[dict]:
        return [dict(iteration=k, **it.to_dict()) for k, it in enumerate(self.iterations, 1)]


def effective_leaves(tree: TreeTopology, x: LPSolution, eligible, open_tasks) -> set[int]:
    """Eligible nodes carrying mass on an open task with no such descendant."""
    open_tasks = list(open_tasks)

    def massive(u: int) -> bool:
        return any(x.value(u, j) > EPS_ZERO for j in open_tasks)

    heavy = {u for u in tree.nodes if massive(u)}
    out = set()
    for u in eligible:
        if u in heavy and not any(d in heavy for d in tree.descendants(u)):
            out.add(u)
    return out


def _single_task(instance: Instance) -> BOAResult:
    node = int(np.argmax(instance.weights[:, 0])) + 1
    a = Assignment.of([(node, 1)])
    return BOAResult(a, assignment_weight(instance, a), 0, ())


def _sweep(x: LPSolution, candidates: set[int], tasks_left: set[int],
           nodes_left: set[int], sweep: int, tree: TreeTopology):
    """Greedy pass over ``candidates`` (current leaves); mutates the two left-sets.

    One max-heap per open task holds the candidate leaves with mass on that
    task; stale entries are discarded lazily when they reach the top.
    """
    heaps: dict[int, list[tuple[float, int]]] = {}
    for j in tasks_left:
        h = []
        for i in candidates:
            if i in nodes_left:
                v = x.value(i, j)
                if v > EPS_ZERO:
                    h.append((-round(v, KEY_DECIMALS), i))
        if h:
            heapq.heapify(h)
            heaps[j] = h

    live = candidates & nodes_left
    picks: list[Pick] = []
    while True:
        best = None
        for j, h in heaps.items():
            if j not in tasks_left:
                continue
            while h and h[0][1] not in live:
                heapq.heappop(h)
            if h:
                key = (h[0][0], h[0][1], j)
                if best is None or key < best:
                    best = key
        if best is None:
            return picks
        _, i, j = best
        picks.append(Pick(i, j, x.value(i, j), sweep))
        tasks_left.discard(j)
        live.discard(i)
        for k in path_to_root(tree, i):
            nodes_left.discard(k)


def bottom_up_assignment(instance: Instance, *, lp: LPOracle = default_lp) -> BOAResult:
    """Run the bottom-up heuristic; returns a complete feasible assignment.

    ``lp`` maps ``(instance, fixed_pairs)`` to a relaxation solution and is
    only replaced in tests.

    Raises:
        InfeasibleInstanceError: fewer leaves than tasks.
        RootWeightError: non-zero root weights with more than one task.
        LPFailure: the relaxation could not be solved.
    """
    tree = instance.tree
    m = instance.task_count
    if not check_feasibility(instance):
        raise InfeasibleInstanceError(f"{len(leaves(tree))} leaves cannot host {m} tasks")
    if m == 1:
        return _single_task(instance)
    require_zero_root(instance)

    alpha: list[tuple[int, int]] = []
    tasks_left = set(range(1, m + 1))
    nodes_left = set(tree.nodes)
    traces: list[IterationTrace] = []
    lp_calls = 0

    while True:
        fixed = Assignment.of(alpha)
        residual = delete_nodes(tree, fixed.nodes)
        assignable = leaves(residual) & nodes_left
        if len(assignable) < len(tasks_left):
            raise InvariantViolation(
                f"{len(assignable)} assignable leaves for {len(tasks_left)} open tasks before LP call")
        x = lp(instance, fixed)
        lp_calls += 1
        if lp_calls == 1:
            root_lp = x
        if not x.optimal:
            raise LPFailure("residual relaxation infeasible although enough leaves remain")
        snap_tasks, snap_nodes = frozenset(tasks_left), frozenset(nodes_left)

        picks: list[Pick] = []
        sweep = 0
        while True:
            lam = set(leaves(residual))
            if len(lam & nodes_left) < len(tasks_left):
                raise InvariantViolation("feasibility invariant broken at sweep start")
            new = _sweep(x, lam, tasks_left, nodes_left, sweep, tree)
            picks.extend(new)
            alpha.extend((p.node, p.task) for p in new)
            picked = {p.node for p in new}
            if picked:
                residual = delete_nodes(residual, picked)
            if not tasks_left:
                reason = "done"
                break
            before = residual.nodes
            residual = delete_nodes(residual, (lam - picked) - {ROOT})
            leaves_left = nodes_left & leaves(residual)
            in_tree = nodes_left & residual.nodes
            has_mass = any(x.value(i, j) > EPS_ZERO for i in in_tree for j in tasks_left)
            if has_mass and len(leaves_left) >= len(tasks_left) and residual.nodes != before:
                sweep += 1
                continue
            reason = "invariant" if has_mass else "no-mass"
            break

        traces.append(IterationTrace(fixed, snap_tasks, snap_nodes, x.objective,
                                     tuple(picks), sweep + 1, reason))
        if not picks:
            raise InvariantViolation("an iteration made no assignment")
        if reason == "done":
            a = Assignment.of(alpha)
            return BOAResult(a, assignment_weight(instance, a), lp_calls, tuple(traces), root_lp)
