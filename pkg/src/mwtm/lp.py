"""LP relaxation of the tree matching ILP, with fixed assignments presolved away.

The relaxation has one column per surviving ``(node, task)`` pair and three
row families:

* node rows   ``sum_j x[i, j] <= 1``                 one per surviving node
* task rows   ``sum_i x[i, j]  = 1``                 one per open task
* path rows   ``sum_{i on path(k)} sum_j x[i, j] <= 1``  one per unsaturated leaf ``k``

Fixing ``(i, j)`` to 1 removes task row ``j``, node row ``i``, every path row
through ``i``, and every column of ``i``'s ancestors and descendants.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable

import numpy as np

from . import simplex
from .core import (Assignment, Instance, InvalidInstanceError, MWTMError,
                   path_to_root, require_zero_root, validate_assignment)

FEAS_TOL = 1e-7


class LPFailure(MWTMError):
    """The simplex gave up (pivot limit or numerical breakdown)."""


@dataclass(frozen=True)
class Row:
    kind: str  # node | task | path
    label: int  # node id, task id, or leaf id
    columns: tuple[int, ...]
    sense: str
    rhs: float = 1.0

    @property
    def name(self) -> str:
        return f"{self.kind}_{self.label}"


@dataclass(frozen=True, eq=False)
class LPModel:
    instance: Instance
    fixed: Assignment
    columns: tuple[tuple[int, int], ...]
    objective: np.ndarray = field(repr=False)
    rows: tuple[Row, ...]
    eliminated: frozenset[tuple[int, int]] = field(repr=False)
    removed_rows: tuple[str, ...] = ()
    constant: float = 0.0

    @cached_property
    def index(self) -> dict[tuple[int, int], int]:
        return {col: k for k, col in enumerate(self.columns)}

    def rows_of(self, kind: str) -> list[Row]:
        return [r for r in self.rows if r.kind == kind]

    def open_tasks(self) -> list[int]:
        return [r.label for r in self.rows_of("task")]

    def nodes(self) -> list[int]:
        return sorted({i for i, _ in self.columns})

    def matrix(self) -> np.ndarray:
        A = np.zeros((len(self.rows), len(self.columns)))
        r = np.repeat(np.arange(len(self.rows)), [len(row.columns) for row in self.rows])
        c = np.fromiter((k for row in self.rows for k in row.columns), dtype=np.intp, count=r.size)
        A[r, c] = 1.0
        return A

    def drop_columns(self, cols: Iterable[tuple[int, int]]) -> LPModel:
        """Pin the given columns at zero by removing them from the model."""
        drop = set(cols) & set(self.columns)
        if not drop:
            return self
        keep = [k for k, col in enumerate(self.columns) if col not in drop]
        remap = np.full(len(self.columns), -1, dtype=np.intp)
        remap[keep] = np.arange(len(keep))

        def moved(cols: tuple[int, ...]) -> tuple[int, ...]:
            new = remap[list(cols)] if cols else remap[:0]
            return tuple(new[new >= 0].tolist())

        rows = tuple(Row(r.kind, r.label, moved(r.columns), r.sense, r.rhs) for r in self.rows)
        return LPModel(self.instance, self.fixed, tuple(self.columns[k] for k in keep),
                       self.objective[keep], rows, self.eliminated | frozenset(drop),
                       self.removed_rows, self.constant)


@dataclass(frozen=True, eq=False)
class LPSolution:
    status: str  # optimal | infeasible
    x: dict[tuple[int, int], float] = field(repr=False)
    objective: float
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == "optimal"

    def value(self, node: int, task: int) -> float:
        return self.x.get((node, task), 0.0)

    def support(self, tol: float = 1e-9) -> dict[tuple[int, int], float]:
        return {k: v for k, v in self.x.items() if v > tol}


def build_lp_relaxation(instance: Instance, fixed: Assignment = Assignment()) -> LPModel:
    """Build the relaxation over the residual problem left after ``fixed``."""
    require_zero_root(instance)
    tree = instance.tree
    m = instance.task_count
    for i, j in fixed.pairs:
        if i not in tree or not 1 <= j <= m:
            raise InvalidInstanceError(f"fixed pair ({i}, {j}) is out of range")
    bad = {v.kind for v in validate_assignment(instance, fixed).violations} - {"unassigned-task"}
    if bad:
        raise InvalidInstanceError(f"fixed assignment is not a partial matching: {sorted(bad)}")

    fixed_nodes = fixed.nodes
    dead = set(fixed_nodes)
    for i in fixed_nodes:
        dead.update(tree.descendants(i))
        dead.update(path_to_root(tree, i))
    open_tasks = [j for j in range(1, m + 1) if j not in fixed.tasks]
    alive = [u for u in sorted(tree.nodes) if u not in dead]
    alive_set = set(alive)

    columns = tuple((i, j) for i in alive for j in open_tasks)
    index = {col: k for k, col in enumerate(columns)}
    # columns are laid out node-major, so each node owns a contiguous block
    width = len(open_tasks)
    block = {u: tuple(range(k * width, (k + 1) * width)) for k, u in enumerate(alive)}
    objective = instance.weights[np.ix_([i - 1 for i in alive], [j - 1 for j in open_tasks])].ravel().astype(float)

    rows: list[Row] = []
    removed: list[str] = []
    for i in sorted(tree.nodes):
        if i in alive_set:
            rows.append(Row("node", i, block[i], "<="))
        else:
            removed.append(f"node_{i}")
    for j in range(1, m + 1):
        if j in fixed.tasks:
            removed.append(f"task_{j}")
        else:
            rows.append(Row("task", j, tuple(index[(i, j)] for i in alive), "="))
    for k, path in tree.leaf_paths().items():
        if any(u in fixed_nodes for u in path):
            removed.append(f"path_{k}")
            continue
        cols = tuple(c for u in path if u in alive_set for c in block[u])
        rows.append(Row("path", k, cols, "<="))

    eliminated = frozenset((i, j) for i in dead for j in range(1, m + 1) if (i, j) not in fixed.pairs)
    constant = float(sum(instance.weights[i - 1, j - 1] for i, j in fixed.pairs))
    return LPModel(instance, fixed, columns, objective, tuple(rows), eliminated, tuple(removed), constant)


def _implied_node_rows(model: LPModel, A: np.ndarray | None = None) -> set[int]:
    """Node rows whose columns all sit inside some path row (hence redundant)."""
    A = model.matrix() if A is None else A
    kinds = np.array([r.kind for r in model.rows])
    node_k = np.flatnonzero(kinds == "node")
    path_k = np.flatnonzero(kinds == "path")
    if node_k.size == 0 or path_k.size == 0:
        return set()
    # outside[a, b] counts columns of node row a missing from path row b
    outside = A[node_k] @ (1.0 - A[path_k]).T
    nonempty = A[node_k].any(axis=1)
    return {int(k) for k in node_k[(outside == 0).any(axis=1) & nonempty]}


def _leaf_start(model: LPModel, kept: list[Row]) -> list[int] | None:
    """Starting basis that puts each open task on its own residual leaf.

    Leaves are matched greedily by decreasing weight.  Each task row gets its
    leaf column and every inequality row keeps its slack; the basis is
    triangular and primal feasible because no path holds two leaves.
    """
    index = model.index
    labels = [r.label for r in kept if r.kind == "path"]
    tasks = model.open_tasks()
    cands = sorted((-model.objective[index[(k, j)]], k, j)
                   for k in labels for j in tasks if (k, j) in index)
    used_leaf: set[int] = set()
    chosen: dict[int, int] = {}
    for _, k, j in cands:
        if k not in used_leaf and j not in chosen:
            used_leaf.add(k)
            chosen[j] = index[(k, j)]
    start = []
    for r in kept:
        if r.kind == "task":
            if r.label not in chosen:
                return None
            start.append(chosen[r.label])
        else:
            start.append(-1)
    return start


def solve_lp(model: LPModel, *, presolve: bool = True, crash: bool = True) -> LPSolution:
    """Solve the relaxation with the in-repo simplex.

    With ``presolve`` the node rows implied by path rows are dropped before
    pivoting; the returned solution still satisfies them.  With ``crash`` the
    simplex starts from a leaf-per-task basis instead of running phase 1,
    whenever such a basis exists.
    """
    fixed_x = {pair: 1.0 for pair in model.fixed.pairs}
    if not model.columns:
        if model.rows_of("task"):
            return LPSolution("infeasible", {}, float("nan"))
        return LPSolution("optimal", fixed_x, model.constant)

    A_full = model.matrix()
    skip = _implied_node_rows(model, A_full) if presolve else set()
    keep = [k for k in range(len(model.rows)) if k not in skip]
    kept = [model.rows[k] for k in keep]
    A = A_full[keep]
    try:
        start = _leaf_start(model, kept) if crash else None
        res = simplex.solve(model.objective, A, [r.sense for r in kept], [r.rhs for r in kept],
                            start=start)
    except simplex.SimplexError as exc:
        raise LPFailure(str(exc)) from exc
    if res.status == "infeasible":
        return LPSolution("infeasible", {}, float("nan"), res.pivots)
    if res.status != "optimal":
        raise LPFailure(f"relaxation reported {res.status}")
    x = dict(fixed_x)
    x.update(zip(model.columns, np.clip(res.x, 0.0, 1.0).tolist()))
    objective = model.constant + float(model.objective @ res.x)
    return LPSolution("optimal", x, objective, res.pivots)


def max_residual(model: LPModel, sol: LPSolution) -> float:
    """Largest constraint violation of ``sol`` on ``model`` (all rows, including implied ones)."""
    v = np.array([sol.value(*col) for col in model.columns])
    worst = float(max(0.0, -v.min())) if v.size else 0.0
    for row in model.rows:
        lhs = float(v[list(row.columns)].sum()) if row.columns else 0.0
        if row.sense == "=":
            worst = max(worst, abs(lhs - row.rhs))
        else:
            worst = max(worst, lhs - row.rhs)
    return worst


def format_lp(model: LPModel) -> str:
    """Render the model in CPLEX LP text layout.

    Columns are named ``x_<node>_<task>`` and rows ``node_<i>``, ``task_<j>``
    and ``path_<leaf>``.  Fixed pairs appear only through the objective
    constant, written as a comment.
    """
    def var(k: int) -> str:
        i, j = model.columns[k]
        return f"x_{i}_{j}"

    lines = [f"\\ MWTM relaxation: {len(model.columns)} columns, {len(model.rows)} rows",
             f"\\ fixed pairs: {model.fixed.to_json()} contribute constant {model.constant:g}",
             "Maximize"]
    terms = [f"{c:g} {var(k)}" for k, c in enumerate(model.objective) if c != 0]
    lines.append(" obj: " + (" + ".join(terms) if terms else "0 " + (var(0) if model.columns else "")))
    lines.append("Subject To")
    for row in model.rows:
        lhs = " + ".join(var(k) for k in row.columns) or "0"
        lines.append(f" {row.name}: {lhs} {row.sense} {row.rhs:g}")
    lines.append("Bounds")
    for k in range(len(model.columns)):
        lines.append(f" {var(k)} >= 0")
    lines.append("End")
    return "\n".join(lines) + "\n"
