"""Hardness gadgets: CNF parsing, 3-SAT padding, and SAT to tree matching transforms.

Numbering used by the transforms, for ``n`` variables and ``m`` clauses:

* node 1 is the root;
* nodes ``2i`` and ``2i + 1`` are the variable nodes of ``x_i`` and ``not x_i``;
* node ``1 + 2n + 3(p - 1) + q`` is literal ``q`` of clause ``p`` and hangs
  under the variable node of that literal;
* tasks ``1..m`` are clausal tasks, task ``m + i`` enforces variable ``i``.

The MAX variant additionally hangs ``m`` zero-weight dummy nodes off the root
(numbered after the literal nodes) and gives enforcement pairs weight ``m``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import Assignment, Instance, MWTMError, build_tree, check_feasibility, leaves


class DimacsError(MWTMError, ValueError):
    pass


class FlavorError(MWTMError, ValueError):
    """Formula clause widths do not fit the requested transform."""


class DecodeError(MWTMError, ValueError):
    pass


@dataclass(frozen=True)
class CNFFormula:
    variable_count: int
    clauses: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "clauses", tuple(tuple(int(l) for l in c) for c in self.clauses))
        for k, clause in enumerate(self.clauses, 1):
            if not clause:
                raise DimacsError(f"clause {k} is empty")
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise DimacsError(f"clause {k}: literal {lit} outside 1..{self.variable_count}")

    @property
    def clause_count(self) -> int:
        return len(self.clauses)

    @property
    def flavor(self) -> str:
        """``e3sat`` (all width 3), ``threesat`` (all width <= 3) or ``cnf``."""
        widths = {len(c) for c in self.clauses}
        if widths <= {3}:
            return "e3sat"
        if max(widths) <= 3:
            return "threesat"
        return "cnf"


def evaluate(f: CNFFormula, truth: Sequence[bool]) -> bool:
    """Evaluate ``f`` under ``truth`` where ``truth[i - 1]`` is the value of ``x_i``."""
    return all(any(truth[abs(l) - 1] == (l > 0) for l in c) for c in f.clauses)


def count_satisfied(f: CNFFormula, truth: Sequence[bool]) -> int:
    return sum(any(truth[abs(l) - 1] == (l > 0) for l in c) for c in f.clauses)


def parse_dimacs(text: str) -> CNFFormula:
    """Parse DIMACS CNF text.  Clauses may span lines; ``%`` ends the body."""
    header = None
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if header is not None or len(parts) != 4 or parts[1] != "cnf":
                raise DimacsError(f"line {lineno}: bad problem line {line!r}")
            try:
                header = (int(parts[2]), int(parts[3]))
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad problem line {line!r}") from exc
            continue
        if header is None:
            raise DimacsError(f"line {lineno}: clause before problem line")
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError as exc:
                raise DimacsError(f"line {lineno}: bad token {tok!r}") from exc
            if lit == 0:
                if not current:
                    raise DimacsError(f"line {lineno}: empty clause")
                clauses.append(tuple(current))
                current = []
            else:
                current.append(lit)
    if header is None:
        raise DimacsError("missing 'p cnf' problem line")
    if current:
        clauses.append(tuple(current))
    nvars, nclauses = header
    if len(clauses) != nclauses:
        raise DimacsError(f"header declares {nclauses} clauses, found {len(clauses)}")
    return CNFFormula(nvars, tuple(clauses))


def format_dimacs(f: CNFFormula) -> str:
    lines = [f"p cnf {f.variable_count} {f.clause_count}"]
    lines += [" ".join(map(str, c)) + " 0" for c in f.clauses]
    return "\n".join(lines) + "\n"


def threesat_to_e3sat(f: CNFFormula) -> CNFFormula:
    """Pad every clause to exactly three literals with three fresh variables.

    With ``d1, d2, d3`` numbered ``n + 1 .. n + 3``, a two-literal clause gets
    ``d1`` and a one-literal clause gets ``d1`` and ``d2``.  Seven clauses
    (every sign pattern over the dummies except all-positive) then force all
    three dummies false.
    """
    if f.flavor == "cnf":
        raise FlavorError("clauses wider than three literals cannot be padded")
    if f.flavor == "e3sat":
        return f
    n = f.variable_count
    d1, d2, d3 = n + 1, n + 2, n + 3
    padded = []
    for c in f.clauses:
        if len(c) == 1:
            padded.append((c[0], d1, d2))
        elif len(c) == 2:
            padded.append((c[0], c[1], d1))
        else:
            padded.append(c)
    for s1 in (1, -1):
        for s2 in (1, -1):
            for s3 in (1, -1):
                if (s1, s2, s3) != (1, 1, 1):
                    padded.append((s1 * d1, s2 * d2, s3 * d3))
    return CNFFormula(n + 3, tuple(padded))


@dataclass(frozen=True)
class ReductionMeta:
    variable_count: int
    clauses: tuple[tuple[int, ...], ...]
    max_variant: bool = False
    dummy_nodes: tuple[int, ...] = field(default=())

    @property
    def clause_count(self) -> int:
        return len(self.clauses)

    def variable_node(self, var: int, positive: bool) -> int:
        return 2 * var if positive else 2 * var + 1

    def literal_node(self, clause: int, position: int) -> int:
        return 1 + 2 * self.variable_count + 3 * (clause - 1) + position

    def enforcement_task(self, var: int) -> int:
        return self.clause_count + var

    def clausal_task(self, clause: int) -> int:
        return clause

    @property
    def node_count(self) -> int:
        return 1 + 2 * self.variable_count + 3 * self.clause_count + len(self.dummy_nodes)

    @property
    def task_count(self) -> int:
        return self.variable_count + self.clause_count

    @property
    def enforcement_weight(self) -> int:
        return self.clause_count if self.max_variant else 1

    def pair_weight(self, node: int, task: int) -> int:
        """Weight of ``(node, task)`` implied by the numbering."""
        n, m = self.variable_count, self.clause_count
        if 2 <= node <= 2 * n + 1:
            return self.enforcement_weight if task == m + node // 2 else 0
        if 2 * n + 2 <= node <= 2 * n + 3 * m + 1:
            return 1 if task == (node - 2 * n - 2) // 3 + 1 else 0
        return 0

    def to_dict(self) -> dict:
        n, m = self.variable_count, self.clause_count
        return {
            "variables": n,
            "clauses": [list(c) for c in self.clauses],
            "max_variant": self.max_variant,
            "variable_nodes": {str(i): [2 * i, 2 * i + 1] for i in range(1, n + 1)},
            "literal_nodes": [[self.literal_node(p, q) for q in (1, 2, 3)] for p in range(1, m + 1)],
            "clausal_tasks": list(range(1, m + 1)),
            "enforcement_tasks": {str(i): m + i for i in range(1, n + 1)},
            "dummy_nodes": list(self.dummy_nodes),
        }

    @classmethod
    def from_dict(cls, data: dict) -> ReductionMeta:
        return cls(int(data["variables"]), tuple(tuple(c) for c in data["clauses"]),
                   bool(data.get("max_variant", False)), tuple(data.get("dummy_nodes", ())))


def _build(f: CNFFormula, max_variant: bool) -> tuple[Instance, ReductionMeta]:
    if f.flavor != "e3sat":
        raise FlavorError(f"transform needs exactly three literals per clause, got flavor {f.flavor}")
    n, m = f.variable_count, f.clause_count
    base = 1 + 2 * n + 3 * m
    dummies = tuple(range(base + 1, base + m + 1)) if max_variant else ()
    meta = ReductionMeta(n, f.clauses, max_variant, dummies)

    parents: dict[int, int] = {}
    for i in range(1, n + 1):
        parents[2 * i] = 1
        parents[2 * i + 1] = 1
    for p, clause in enumerate(f.clauses, 1):
        for q, lit in enumerate(clause, 1):
            parents[meta.literal_node(p, q)] = meta.variable_node(abs(lit), lit > 0)
    for d in dummies:
        parents[d] = 1
    total = meta.node_count
    tree = build_tree(parents, total)

    w = np.zeros((total, n + m))
    for i in range(2, 2 * n + 2):
        w[i - 1, m + i // 2 - 1] = meta.enforcement_weight
    for i in range(2 * n + 2, base + 1):
        w[i - 1, (i - 2 * n - 2) // 3] = 1
    inst = Instance(tree, n + m, w)
    if not check_feasibility(inst):
        raise MWTMError(f"reduced instance has only {len(leaves(tree))} leaves for {n + m} tasks")
    return inst, meta


def e3sat_to_mwtm(f: CNFFormula) -> tuple[Instance, ReductionMeta]:
    """Tree matching instance that reaches weight ``n + m`` iff ``f`` is satisfiable."""
    return _build(f, max_variant=False)


def maxe3sat_to_mwtm(f: CNFFormula) -> tuple[Instance, ReductionMeta]:
    """Tree matching instance whose optimum is ``k* + m n`` when at best ``k*`` clauses hold."""
    return _build(f, max_variant=True)


def decode_truth_assignment(meta: ReductionMeta, a: Assignment) -> tuple[bool, ...]:
    """Read variable values off where the enforcement tasks went.

    ``x_i`` is true when its enforcement task sits on the negative node
    ``2i + 1`` (leaving the positive literal nodes free) and false when it
    sits on ``2i``.  For the plain transform the assignment must reach the
    full weight ``n + m``; for the MAX variant every enforcement task must sit
    on one of its variable nodes.
    """
    n, m = meta.variable_count, meta.clause_count
    on = {j: i for i, j in a.pairs}
    if meta.max_variant:
        value = sum(meta.pair_weight(i, j) for i, j in a.pairs)
        if value < m * n:
            raise DecodeError(f"assignment weight {value} is below m*n = {m * n}")
    else:
        value = sum(meta.pair_weight(i, j) for i, j in a.pairs)
        if value < n + m:
            raise DecodeError(f"assignment weight {value} is below n + m = {n + m}; no satisfying assignment")
    truth = []
    for var in range(1, n + 1):
        node = on.get(meta.enforcement_task(var))
        if node == 2 * var + 1:
            truth.append(True)
        elif node == 2 * var:
            truth.append(False)
        else:
            raise DecodeError(f"enforcement task of variable {var} is not on a variable node")
    return tuple(truth)
