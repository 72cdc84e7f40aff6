from __future__ import annotations

import itertools

from mwtm.reduction import CNFFormula
from mwtm.sat_enum import canonical_classes, clause_types, formula_from_types, truth_table_satisfiable


def _orbit_key(n, clauses):
    """Brute-force canonical form: smallest sorted clause list over all symmetries."""
    best = None
    for perm in itertools.permutations(range(1, n + 1)):
        for signs in itertools.product((1, -1), repeat=n):
            img = sorted(tuple(sorted(perm[abs(l) - 1] * signs[abs(l) - 1] * (1 if l > 0 else -1) for l in c))
                         for c in clauses)
            if best is None or img < best:
                best = img
    return tuple(best)


def test_clause_type_count():
    assert len(clause_types(1)) == 4
    assert len(clause_types(4)) == 120


def test_classes_partition_all_formulas():
    n, max_m = 2, 3
    types = clause_types(n)
    reps = {m: set() for m in range(1, max_m + 1)}
    for m, idx in canonical_classes(n, max_m):
        reps[m].add(_orbit_key(n, formula_from_types(n, idx, types).clauses))
    for m in range(1, max_m + 1):
        orbits = {_orbit_key(n, combo) for combo in itertools.combinations_with_replacement(types, m)}
        assert reps[m] == orbits
        # one representative per orbit
        assert len(reps[m]) == sum(1 for mm, _ in canonical_classes(n, max_m) if mm == m)


def test_known_counts():
    from collections import Counter
    counts = Counter(m for m, _ in canonical_classes(3, 3))
    assert [counts[m] for m in (1, 2, 3)] == [5, 71, 895]


def test_truth_table():
    assert truth_table_satisfiable(CNFFormula(1, ((1, 1, 1),)))
    assert not truth_table_satisfiable(CNFFormula(1, ((1, 1, 1), (-1, -1, -1))))
    assert truth_table_satisfiable(CNFFormula(2, ((1, -1, 2), (-2, -2, -2))))
