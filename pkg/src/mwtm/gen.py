"""Seeded random instances for the benchmark grid.

Trees grow breadth first: every frontier node draws a child count (zero with
probability ``1 - 1/d``, otherwise geometric with mean ``d``, capped at six)
so that the branching factor of internal nodes averages ``d`` and growth
stays near-critical.  Node ids follow creation order, which is level order.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .core import Instance, TreeTopology, build_tree, check_feasibility

NODE_COUNTS = (16, 32, 64, 128)
AVG_DEGREES = (1.5, 2.0, 2.5)
TASK_RATIOS = (0.125, 0.25, 0.5)
WEIGHT_DISTS = ("increasing", "decreasing", "random")

MAX_CHILDREN = 6
DEGREE_SLACK = 0.3
TREE_ATTEMPTS = 50


@dataclass(frozen=True)
class GenParams:
    node_count: int
    avg_degree: float
    task_ratio: float
    weight_dist: str
    seed: int = 0

    def __post_init__(self):
        if self.node_count < 2:
            raise ValueError("node_count must be at least 2")
        if self.avg_degree < 1.0:
            raise ValueError("avg_degree must be at least 1")
        if self.task_ratio <= 0:
            raise ValueError("task_ratio must be positive")
        if self.weight_dist not in WEIGHT_DISTS:
            raise ValueError(f"weight_dist must be one of {WEIGHT_DISTS}")

    @property
    def task_count(self) -> int:
        return max(1, int(round(self.task_ratio * self.node_count)))

    @property
    def weight_range(self) -> int:
        return max(1, self.node_count // 2)

    def cell(self) -> tuple:
        """Parameters without the seed."""
        return (self.node_count, self.avg_degree, self.task_ratio, self.weight_dist)

    def with_seed(self, seed: int) -> GenParams:
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class GeneratedInstance:
    params: GenParams
    instance: Instance
    feasible: bool


def branching_factor(tree: TreeTopology) -> float:
    """Mean number of children over internal nodes."""
    internal = sum(1 for u in tree.nodes if tree.children[u])
    return (tree.node_count - 1) / internal if internal else 0.0


def _grow(n: int, d: float, rng: np.random.Generator) -> dict[int, int]:
    parent: dict[int, int] = {}
    frontier = deque([1])
    count = 1
    p_zero = 1.0 - 1.0 / d
    while count < n:
        if not frontier:
            # frontier died out: the most recent node is a deepest leaf
            frontier.append(count)
            forced = True
        else:
            forced = False
        u = frontier.popleft()
        if forced:
            k = 1
        elif rng.random() >= p_zero:
            k = min(int(rng.geometric(1.0 / d)), MAX_CHILDREN)
        else:
            k = 0
        k = min(k, n - count)
        for _ in range(k):
            count += 1
            parent[count] = u
            frontier.append(count)
    return parent


def generate_tree(n: int, avg_degree: float, rng: np.random.Generator) -> TreeTopology:
    """Random rooted tree on ``n`` nodes, branching factor close to ``avg_degree``."""
    if n < 2:
        raise ValueError("need at least two nodes")
    best, best_err = None, np.inf
    for _ in range(TREE_ATTEMPTS):
        tree = build_tree(_grow(n, avg_degree, rng), n)
        err = abs(branching_factor(tree) - avg_degree)
        if err < best_err:
            best, best_err = tree, err
        if err <= DEGREE_SLACK:
            break
    return best


def depth_band(depth: int, max_depth: int, W: int) -> tuple[int, int]:
    """Inclusive integer sub-range of ``[1, W]`` for band ``depth`` of ``max_depth``."""
    lo = 1 + (depth - 1) * W // max_depth
    hi = max(lo, depth * W // max_depth)
    return lo, hi


def generate_weights(tree: TreeTopology, m: int, dist: str, rng: np.random.Generator,
                     W: int | None = None) -> np.ndarray:
    n = tree.node_count
    W = max(1, n // 2) if W is None else W
    w = np.zeros((n, m))
    D = max(1, tree.max_depth)
    for u in sorted(tree.nodes):
        if u == tree.root:
            continue
        if dist == "random":
            lo, hi = 1, W
        elif dist == "increasing":
            lo, hi = depth_band(tree.depth[u], D, W)
        elif dist == "decreasing":
            lo, hi = depth_band(D + 1 - tree.depth[u], D, W)
        else:
            raise ValueError(f"unknown weight distribution {dist!r}")
        w[u - 1] = rng.integers(lo, hi + 1, size=m)
    return w


def generate_instance(params: GenParams) -> GeneratedInstance:
    rng = np.random.default_rng(params.seed)
    tree = generate_tree(params.node_count, params.avg_degree, rng)
    m = params.task_count
    w = generate_weights(tree, m, params.weight_dist, rng, params.weight_range)
    inst = Instance(tree, m, w)
    return GeneratedInstance(params, inst, check_feasibility(inst))


def trial_seed(master_seed: int, cell: int, trial: int) -> int:
    """64-bit seed for ``trial`` of ``cell``, independent of every other pair."""
    ss = np.random.SeedSequence(master_seed, spawn_key=(cell, trial))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def default_grid(node_counts=NODE_COUNTS) -> list[GenParams]:
    return [GenParams(n, d, r, w)
            for n in node_counts for d in AVG_DEGREES for r in TASK_RATIOS for w in WEIGHT_DISTS]


def mini_grid() -> list[GenParams]:
    return default_grid((16, 32))
