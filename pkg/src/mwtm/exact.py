"""Exact optima: branch-and-bound over the LP relaxation, and an enumeration oracle."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .boa import InvariantViolation, bottom_up_assignment
from .core import (Assignment, Instance, MWTMError, assignment_weight, check_feasibility,
                   path_to_root, require_zero_root)
from .lp import build_lp_relaxation, solve_lp

EPS_INT = 1e-6
EPS_OBJ = 1e-6
DEFAULT_NODE_LIMIT = 10**6
DEFAULT_BRANCH_BUDGET = 10**7


class BudgetExceeded(MWTMError):
    """Enumeration would exceed its branch budget."""


@dataclass(frozen=True)
class ExactResult:
    status: str  # optimal | infeasible | node_limit | time_limit
    assignment: Assignment
    objective: float
    explored_nodes: int
    root_bound: float = math.nan

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"


def solve_brute_force(instance: Instance, *, max_branches: int = DEFAULT_BRANCH_BUDGET) -> ExactResult:
    """Enumerate every injective task-to-node map with pairwise independent nodes.

    Nodes are tried in increasing id for task 1, then task 2, and so on, and
    only strictly better totals replace the incumbent, so among equal optima
    the one whose node sequence is lexicographically smallest is returned.
    """
    tree = instance.tree
    m = instance.task_count
    nodes = sorted(tree.nodes)
    blocks = {u: frozenset(path_to_root(tree, u)) | frozenset(tree.descendants(u)) for u in nodes}
    W = instance.weights

    best_total = -math.inf
    best: tuple[int, ...] | None = None
    chosen: list[int] = []
    branches = 0

    def rec(task: int, total: float) -> None:
        nonlocal best_total, best, branches
        if task > m:
            if total > best_total + 1e-9:
                best_total = total
                best = tuple(chosen)
            return
        for u in nodes:
            if any(u in blocks[v] for v in chosen):
                continue
            branches += 1
            if branches > max_branches:
                raise BudgetExceeded(f"more than {max_branches} partial assignments")
            chosen.append(u)
            rec(task + 1, total + W[u - 1, task - 1])
            chosen.pop()

    rec(1, 0.0)
    if best is None:
        return ExactResult("infeasible", Assignment(), math.nan, branches)
    a = Assignment.of((u, j) for j, u in enumerate(best, 1))
    return ExactResult("optimal", a, assignment_weight(instance, a), branches)


@dataclass(frozen=True)
class _Node:
    ones: tuple[tuple[int, int], ...]
    zeros: frozenset[tuple[int, int]]
    parent_bound: float


def solve_ilp(instance: Instance, *, node_limit: int = DEFAULT_NODE_LIMIT,
              time_limit: float | None = None, warm_start: bool = True,
              integral_prune: bool = True) -> ExactResult:
    """Depth-first branch-and-bound with LP bounds.

    Branches on the most fractional column (ties by node, then task) and
    explores the ``x = 1`` child first.  The incumbent starts from the
    bottom-up heuristic when ``warm_start`` is set.  On hitting either limit
    the best assignment found so far is returned with status ``node_limit``
    or ``time_limit``.
    """
    require_zero_root(instance)
    if not check_feasibility(instance):
        return ExactResult("infeasible", Assignment(), math.nan, 0)
    start = time.perf_counter()
    integral = integral_prune and bool(np.all(instance.weights == np.round(instance.weights)))

    best_total = -math.inf
    best = Assignment()
    cached = None
    if warm_start:
        boa = bottom_up_assignment(instance)
        best_total, best = boa.objective, boa.assignment
        cached = boa.root_lp

    stack = [_Node((), frozenset(), math.inf)]
    explored = 0
    root_bound = math.nan
    while stack:
        if explored >= node_limit:
            return ExactResult("node_limit", best, best_total, explored, root_bound)
        if time_limit is not None and time.perf_counter() - start > time_limit:
            return ExactResult("time_limit", best, best_total, explored, root_bound)
        node = stack.pop()
        explored += 1
        if explored == 1 and cached is not None:
            sol = cached
        else:
            model = build_lp_relaxation(instance, Assignment.of(node.ones)).drop_columns(node.zeros)
            sol = solve_lp(model)
        if not sol.optimal:
            continue
        bound = sol.objective
        if explored == 1:
            root_bound = bound
        if bound > node.parent_bound + EPS_OBJ:
            raise InvariantViolation(f"child bound {bound} exceeds parent bound {node.parent_bound}")
        if bound <= best_total + EPS_OBJ:
            continue
        # integral weights make every integral optimum an integer
        if integral and math.floor(bound + EPS_OBJ) <= best_total + EPS_OBJ:
            continue
        frac = [(abs(v - 0.5), i, j) for (i, j), v in sol.x.items() if EPS_INT < v < 1 - EPS_INT]
        if not frac:
            a = Assignment.of(pair for pair, v in sol.x.items() if v > 0.5)
            best_total, best = assignment_weight(instance, a), a
            continue
        _, i, j = min(frac)
        stack.append(_Node(node.ones, node.zeros | {(i, j)}, bound))
        stack.append(_Node(node.ones + ((i, j),), node.zeros, bound))

    if best_total == -math.inf:
        return ExactResult("infeasible", Assignment(), math.nan, explored, root_bound)
    return ExactResult("optimal", best, best_total, explored, root_bound)
