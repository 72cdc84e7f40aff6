from __future__ import annotations

import numpy as np
import pytest

from mwtm.core import Instance, build_tree, leaves
from mwtm.reduction import CNFFormula

# Six nodes, three tasks: root 1 with children {2, 3}, node 2 with children
# {4, 5, 6}.  Rows are nodes 1..6, columns tasks t1..t3; entries not pinned
# down by the worked example are zero.
SIX_NODE_PARENTS = {2: 1, 3: 1, 4: 2, 5: 2, 6: 2}
SIX_NODE_WEIGHTS = [
    [0, 0, 0],
    [0, 0, 8],
    [8, 0, 8],
    [6, 0, 4],
    [0, 4, 0],
    [0, 4, 4],
]

# (p or not q or not p) and (p or r or not s) and (q or r or s), p..s = 1..4
FOUR_VAR_CLAUSES = ((1, -2, -1), (1, 3, -4), (2, 3, 4))


@pytest.fixture
def six_node():
    return Instance(build_tree(SIX_NODE_PARENTS, 6), 3, np.array(SIX_NODE_WEIGHTS, dtype=float))


@pytest.fixture
def four_var_cnf():
    return CNFFormula(4, FOUR_VAR_CLAUSES)


@pytest.fixture
def chain_m2():
    tree = build_tree({2: 1, 3: 2}, 3)
    w = np.array([[0, 0], [1, 1], [2, 2]], dtype=float)
    return Instance(tree, 2, w)


def random_instance(rng: np.random.Generator, n_max: int = 14, m_max: int = 4, w_max: int = 9,
                    feasible: bool = True) -> Instance:
    """Uniform random attachment tree with integer weights and a zero root row."""
    while True:
        n = int(rng.integers(2, n_max + 1))
        parents = {i: int(rng.integers(1, i)) for i in range(2, n + 1)}
        tree = build_tree(parents, n)
        L = len(leaves(tree))
        m = int(rng.integers(1, m_max + 1))
        if feasible and m > L:
            continue
        w = rng.integers(0, w_max + 1, size=(n, m)).astype(float)
        if m > 1:
            w[0] = 0
        return Instance(tree, m, w)


# one PASS/FAIL line per acceptance criterion, printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def criterion():
    def record(number: int, ok: bool, detail: str) -> bool:
        line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
