"""Tree, instance and assignment data model shared by every solver.

Nodes are numbered ``1..n`` with the root fixed at ``1``; tasks are numbered
``1..m``.  Every object here is immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

ROOT = 1


class MWTMError(Exception):
    """Base class for errors raised by this package."""


class InvalidTreeError(MWTMError, ValueError):
    """Parent links do not describe a rooted tree over the expected ids."""


class InvalidInstanceError(MWTMError, ValueError):
    """Weight matrix is malformed or an id is out of range."""


class RootWeightError(InvalidInstanceError):
    """A multi-task solver was handed a non-zero root weight row."""


class InfeasibleInstanceError(MWTMError):
    """The tree has fewer leaves than there are tasks."""


class TreeTopology:
    """A rooted tree over a set of integer node ids.

    Trees built by :func:`build_tree` cover exactly ``1..n``.  Trees produced
    by :func:`delete_nodes` cover a subset of the original ids but keep the
    same root and parent links.
    """

    __slots__ = ("nodes", "parent", "children", "depth", "_tin", "_tout", "_order", "_leaf_paths")

    def __init__(self, parent: Mapping[int, int], nodes: Iterable[int]):
        nodes = frozenset(nodes)
        if ROOT not in nodes:
            raise InvalidTreeError("root node 1 is missing")
        children: dict[int, list[int]] = {u: [] for u in nodes}
        for child, par in parent.items():
            if child not in nodes or par not in nodes:
                raise InvalidTreeError(f"link {child}->{par} references a node outside the tree")
            children[par].append(child)
        for kids in children.values():
            kids.sort()

        # Iterative DFS from the root; any node not reached is cyclic or orphaned.
        depth = {ROOT: 0}
        tin: dict[int, int] = {}
        tout: dict[int, int] = {}
        order: list[int] = []
        clock = 0
        stack: list[tuple[int, int]] = [(ROOT, 0)]
        while stack:
            u, k = stack.pop()
            if k == 0:
                tin[u] = clock
                clock += 1
                order.append(u)
            if k < len(children[u]):
                stack.append((u, k + 1))
                v = children[u][k]
                depth[v] = depth[u] + 1
                stack.append((v, 0))
            else:
                tout[u] = clock
        if len(order) != len(nodes):
            missing = sorted(nodes - set(order))
            raise InvalidTreeError(f"nodes not connected to the root (cycle or orphan): {missing}")

        self.nodes = nodes
        self.parent = dict(parent)
        self.children = {u: tuple(kids) for u, kids in children.items()}
        self.depth = depth
        self._tin = tin
        self._tout = tout
        self._order = tuple(order)
        self._leaf_paths = None

    @property
    def root(self) -> int:
        return ROOT

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def max_depth(self) -> int:
        return max(self.depth.values())

    def preorder(self) -> tuple[int, ...]:
        return self._order

    def __contains__(self, node: object) -> bool:
        return node in self.nodes

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, TreeTopology):
            return NotImplemented
        return self.nodes == other.nodes and self.parent == other.parent

    def __hash__(self) -> int:
        return hash((self.nodes, frozenset(self.parent.items())))

    def __repr__(self) -> str:
        return f"TreeTopology(nodes={self.node_count}, leaves={len(leaves(self))})"

    def _require(self, node: int) -> None:
        if node not in self.nodes:
            raise InvalidTreeError(f"unknown node id {node}")

    def is_ancestor(self, a: int, b: int) -> bool:
        """True if ``a`` is a proper ancestor of ``b``."""
        self._require(a)
        self._require(b)
        return a != b and self._tin[a] <= self._tin[b] and self._tout[b] <= self._tout[a]

    def descendants(self, node: int) -> list[int]:
        """Proper descendants of ``node`` in preorder."""
        self._require(node)
        lo, hi = self._tin[node], self._tout[node]
        return list(self._order[lo + 1:hi])

    def leaf_paths(self) -> dict[int, tuple[int, ...]]:
        """Leaf id to the sorted node ids on its root path (computed once)."""
        if self._leaf_paths is None:
            self._leaf_paths = {k: tuple(sorted(path_to_root(self, k))) for k in sorted(leaves(self))}
        return self._leaf_paths

    def parent_links(self) -> dict[int, int]:
        return dict(self.parent)


def build_tree(parent_links: Mapping[int, int], n: int) -> TreeTopology:
    """Validate parent links over ids ``1..n`` and build the topology."""
    if n < 1:
        raise InvalidTreeError("a tree needs at least one node")
    links = {int(c): int(p) for c, p in parent_links.items()}
    expected = set(range(2, n + 1))
    keys = set(links)
    if keys != expected:
        outside = sorted(k for k in keys if not 1 <= k <= n)
        if outside or ROOT in keys:
            raise InvalidTreeError(f"parent links defined for ids outside 2..{n}: {sorted(keys - expected)}")
        raise InvalidTreeError(f"nodes without a parent link: {sorted(expected - keys)}")
    bad = sorted(p for p in links.values() if not 1 <= p <= n)
    if bad:
        raise InvalidTreeError(f"parent ids outside 1..{n}: {bad}")
    return TreeTopology(links, range(1, n + 1))


def leaves(tree: TreeTopology) -> frozenset[int]:
    return frozenset(u for u, kids in tree.children.items() if not kids)


def path_to_root(tree: TreeTopology, node: int) -> list[int]:
    """``[node, parent(node), ..., root]``."""
    tree._require(node)
    path = [node]
    while path[-1] != ROOT:
        path.append(tree.parent[path[-1]])
    return path


def paths_independent(tree: TreeTopology, a: int, b: int) -> bool:
    """Neither node lies on the other's root path (so a node is not independent of itself)."""
    return a != b and not (tree.is_ancestor(a, b) or tree.is_ancestor(b, a))


def delete_nodes(tree: TreeTopology, victims: Iterable[int]) -> TreeTopology:
    """Return a copy of ``tree`` with every victim's subtree removed."""
    victims = set(victims)
    if not victims:
        return tree
    if ROOT in victims:
        raise InvalidTreeError("the root cannot be deleted")
    gone: set[int] = set()
    for v in victims:
        if v in gone:
            continue
        tree._require(v)
        gone.add(v)
        gone.update(tree.descendants(v))
    keep = tree.nodes - gone
    return TreeTopology({c: p for c, p in tree.parent.items() if c in keep}, keep)


@dataclass(frozen=True, eq=False)
class Instance:
    """A tree plus an ``n x m`` matrix of non-negative finite weights.

    ``weights[i - 1, j - 1]`` is the weight of giving task ``j`` to node ``i``.
    """

    tree: TreeTopology
    task_count: int
    weights: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.task_count < 1:
            raise InvalidInstanceError("at least one task is required")
        w = np.array(self.weights, dtype=float)
        n = self.tree.node_count
        if w.shape != (n, self.task_count):
            raise InvalidInstanceError(f"weights have shape {w.shape}, expected {(n, self.task_count)}")
        if max(self.tree.nodes) != n:
            raise InvalidInstanceError("instance trees must cover ids 1..n")
        if not np.all(np.isfinite(w)) or np.any(w < 0):
            raise InvalidInstanceError("weights must be finite and non-negative")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    @property
    def node_count(self) -> int:
        return self.tree.node_count

    def weight(self, node: int, task: int) -> float:
        if node not in self.tree or not 1 <= task <= self.task_count:
            raise InvalidInstanceError(f"unknown pair ({node}, {task})")
        return float(self.weights[node - 1, task - 1])

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.tree == other.tree and self.task_count == other.task_count
                and np.array_equal(self.weights, other.weights))

    def __hash__(self) -> int:
        return hash((self.tree, self.task_count, self.weights.tobytes()))


def require_zero_root(instance: Instance) -> None:
    """Multi-task solvers need an all-zero root row."""
    if instance.task_count > 1 and np.any(instance.weights[ROOT - 1] != 0):
        raise RootWeightError("root weights must be zero when there is more than one task")


@dataclass(frozen=True)
class Assignment:
    """A set of ``(node, task)`` pairs."""

    pairs: frozenset[tuple[int, int]] = frozenset()

    @classmethod
    def of(cls, pairs: Iterable[tuple[int, int]]) -> Assignment:
        return cls(frozenset((int(i), int(j)) for i, j in pairs))

    def __iter__(self):
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.pairs)

    def sorted(self) -> list[tuple[int, int]]:
        """Pairs ordered by task, then node."""
        return sorted(self.pairs, key=lambda p: (p[1], p[0]))

    @property
    def nodes(self) -> set[int]:
        return {i for i, _ in self.pairs}

    @property
    def tasks(self) -> set[int]:
        return {j for _, j in self.pairs}

    def union(self, other: Iterable[tuple[int, int]]) -> Assignment:
        return Assignment(self.pairs | frozenset(other))

    def to_json(self) -> list[list[int]]:
        return [[i, j] for i, j in self.sorted()]


@dataclass(frozen=True)
class Violation:
    kind: str  # duplicate-node | duplicate-task | hierarchy | unassigned-task | unknown-id
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[Violation, ...] = ()

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}


def validate_assignment(instance: Instance, a: Assignment) -> ValidationReport:
    """Check that ``a`` is a complete matching satisfying the hierarchy constraint."""
    tree = instance.tree
    m = instance.task_count
    out: list[Violation] = []
    known = []
    for i, j in a.sorted():
        if i not in tree or not 1 <= j <= m:
            out.append(Violation("unknown-id", f"pair ({i}, {j})"))
        else:
            known.append((i, j))

    node_seen: dict[int, int] = {}
    task_seen: dict[int, int] = {}
    for i, j in known:
        if i in node_seen:
            out.append(Violation("duplicate-node", f"node {i} serves tasks {node_seen[i]} and {j}"))
        else:
            node_seen[i] = j
        if j in task_seen:
            out.append(Violation("duplicate-task", f"task {j} served by nodes {task_seen[j]} and {i}"))
        else:
            task_seen[j] = i

    used = sorted(node_seen)
    for x in range(len(used)):
        for y in range(x + 1, len(used)):
            a_, b_ = used[x], used[y]
            if not paths_independent(tree, a_, b_):
                top, bottom = (a_, b_) if tree.is_ancestor(a_, b_) else (b_, a_)
                out.append(Violation("hierarchy", f"node {top} is an ancestor of node {bottom}"))

    for j in range(1, m + 1):
        if j not in task_seen:
            out.append(Violation("unassigned-task", f"task {j}"))
    return ValidationReport(tuple(out))


def assignment_weight(instance: Instance, a: Assignment) -> float:
    return math.fsum(instance.weight(i, j) for i, j in a.pairs)


def check_feasibility(instance: Instance) -> bool:
    """An instance has a solution iff it has at least as many leaves as tasks."""
    return len(leaves(instance.tree)) >= instance.task_count
