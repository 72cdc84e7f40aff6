"""Exhaustive enumeration of small E3 formulas up to symmetry.

A clause is a multiset of three literals, so repeated literals such as
``(x1 or x1 or -x2)`` are included.  Two formulas are equivalent when one
turns into the other by permuting variables, flipping variable signs and
reordering clauses.  Equivalent formulas have the same satisfiability, and
their reduced tree matching instances are isomorphic, so checking one
representative per class covers every formula.
"""

from __future__ import annotations

import itertools
from typing import Iterator

import numpy as np

from .reduction import CNFFormula


def clause_types(n: int) -> list[tuple[int, int, int]]:
    """All literal multisets of size three over ``n`` variables, sorted."""
    lits = sorted([v for v in range(1, n + 1)] + [-v for v in range(1, n + 1)])
    return sorted(itertools.combinations_with_replacement(lits, 3))


def _action_table(n: int, types: list[tuple[int, int, int]]) -> np.ndarray:
    """``table[g, c]`` is the index of clause type ``c`` under symmetry ``g``."""
    index = {c: k for k, c in enumerate(types)}
    rows = []
    for perm in itertools.permutations(range(1, n + 1)):
        for signs in itertools.product((1, -1), repeat=n):
            def act(lit: int) -> int:
                v = abs(lit)
                return perm[v - 1] * signs[v - 1] * (1 if lit > 0 else -1)
            rows.append([index[tuple(sorted(act(l) for l in c))] for c in types])
    return np.array(rows, dtype=np.int64)


def canonical_classes(n: int, max_clauses: int) -> Iterator[tuple[int, tuple[int, ...]]]:
    """Yield ``(m, clause-type indices)`` for one representative per class, ``1 <= m <= max_clauses``.

    Orderly generation: a representative is the lexicographically smallest
    sorted tuple in its orbit, and every prefix of a representative is itself
    a representative, so classes of size ``m`` extend those of size ``m - 1``.
    """
    types = clause_types(n)
    table = _action_table(n, types)
    c = len(types)
    # sorted tuples of length <= 4 over c < 2**15 symbols pack into one int64
    shift = 15
    level = [()]
    for m in range(1, max_clauses + 1):
        nxt = []
        for rep in level:
            start = rep[-1] if rep else 0
            cands = np.arange(start, c)
            if rep:
                base = np.broadcast_to(table[:, list(rep)][None], (cands.size, table.shape[0], len(rep)))
                imgs = np.concatenate([base, table[:, cands].T[:, :, None]], axis=2)
            else:
                imgs = table[:, cands].T[:, :, None]
            imgs = np.sort(imgs, axis=2)
            packed = np.zeros(imgs.shape[:2], dtype=np.int64)
            for k in range(m):
                packed = (packed << shift) | imgs[:, :, k]
            own = 0
            for k in range(len(rep)):
                own = (own << shift) | rep[k]
            own_packed = (own << shift) + cands
            keep = packed.min(axis=1) == own_packed
            for cand in cands[keep]:
                new = rep + (int(cand),)
                nxt.append(new)
                yield m, new
        level = nxt


def formula_from_types(n: int, idx: tuple[int, ...], types: list | None = None) -> CNFFormula:
    types = types if types is not None else clause_types(n)
    return CNFFormula(n, tuple(types[k] for k in idx))


def truth_table_satisfiable(f: CNFFormula) -> bool:
    n = f.variable_count
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n)[None, :]) & 1
    ok = np.ones(2 ** n, dtype=bool)
    for clause in f.clauses:
        sat = np.zeros(2 ** n, dtype=bool)
        for lit in clause:
            col = bits[:, abs(lit) - 1].astype(bool)
            sat |= col if lit > 0 else ~col
        ok &= sat
    return bool(ok.any())
