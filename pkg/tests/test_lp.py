from __future__ import annotations

import itertools

import numpy as np
import pytest
from scipy.optimize import linprog

from mwtm.boa import effective_leaves
from mwtm.core import Assignment, Instance, InvalidInstanceError, RootWeightError, build_tree, leaves
from mwtm.exact import solve_brute_force
from mwtm.lp import build_lp_relaxation, format_lp, max_residual, solve_lp

from conftest import random_instance


def _highs_objective(model):
    A = model.matrix()
    eq = np.array([r.sense == "=" for r in model.rows])
    res = linprog(-model.objective, A_ub=A[~eq], b_ub=np.ones((~eq).sum()),
                  A_eq=A[eq], b_eq=np.ones(eq.sum()), method="highs")
    return -res.fun + model.constant if res.status == 0 else None


class TestBuild:
    def test_row_counts(self, six_node):
        model = build_lp_relaxation(six_node)
        assert len(model.rows_of("node")) == 6
        assert len(model.rows_of("task")) == 3
        assert len(model.rows_of("path")) == 4
        assert len(model.columns) == 18

    def test_each_column_in_one_node_and_one_task_row(self, six_node):
        model = build_lp_relaxation(six_node)
        for k in range(len(model.columns)):
            assert sum(k in r.columns for r in model.rows_of("node")) == 1
            assert sum(k in r.columns for r in model.rows_of("task")) == 1

    def test_fixing_eliminates(self, six_node):
        model = build_lp_relaxation(six_node, Assignment.of([(3, 1), (5, 2)]))
        assert model.columns == ((4, 3), (6, 3))
        assert model.open_tasks() == [3]
        assert model.nodes() == [4, 6]
        assert {"task_1", "task_2", "node_3", "node_5", "path_3", "path_5"} <= set(model.removed_rows)
        assert model.constant == 12
        assert (2, 3) in model.eliminated

    def test_full_fixing_gives_empty_model(self, six_node):
        fixed = Assignment.of([(4, 1), (5, 2), (3, 3)])
        model = build_lp_relaxation(six_node, fixed)
        assert model.columns == ()
        sol = solve_lp(model)
        assert sol.optimal and sol.objective == 18

    def test_invalid_fixing(self, six_node):
        with pytest.raises(InvalidInstanceError):
            build_lp_relaxation(six_node, Assignment.of([(2, 1), (5, 2)]))
        with pytest.raises(InvalidInstanceError):
            build_lp_relaxation(six_node, Assignment.of([(4, 1), (4, 2)]))
        with pytest.raises(InvalidInstanceError):
            build_lp_relaxation(six_node, Assignment.of([(9, 1)]))

    def test_root_rule(self, six_node):
        w = np.array(six_node.weights)
        w[0, 0] = 1
        with pytest.raises(RootWeightError):
            build_lp_relaxation(Instance(six_node.tree, 3, w))

    def test_drop_columns(self, six_node):
        model = build_lp_relaxation(six_node).drop_columns([(3, 1), (42, 1)])
        assert (3, 1) not in model.columns
        assert (3, 1) in model.eliminated
        assert all(max(r.columns, default=-1) < len(model.columns) for r in model.rows)


class TestSolve:
    def test_six_node_half_integral_vertex(self, six_node):
        sol = solve_lp(build_lp_relaxation(six_node))
        assert sol.objective == pytest.approx(19, abs=1e-6)
        expected = {(3, 1), (4, 1), (5, 2), (6, 2), (2, 3), (3, 3)}
        assert set(sol.support()) == expected
        for pair in expected:
            assert sol.value(*pair) == pytest.approx(0.5)

    def test_chain_infeasible(self, chain_m2):
        assert solve_lp(build_lp_relaxation(chain_m2)).status == "infeasible"

    def test_fixed_pairs_reported(self, six_node):
        sol = solve_lp(build_lp_relaxation(six_node, Assignment.of([(3, 1), (5, 2)])))
        assert sol.value(3, 1) == 1.0 and sol.value(5, 2) == 1.0
        assert sol.objective == pytest.approx(16)

    @pytest.mark.parametrize("seed", range(60))
    def test_random_against_highs_and_enumeration(self, seed):
        rng = np.random.default_rng(seed)
        inst = random_instance(rng, n_max=12, m_max=4)
        if inst.task_count == 1:
            return
        model = build_lp_relaxation(inst)
        sol = solve_lp(model)
        assert sol.optimal
        assert max_residual(model, sol) <= 1e-7
        assert sol.objective == pytest.approx(_highs_objective(model), abs=1e-7)
        assert sol.objective >= solve_brute_force(inst).objective - 1e-6
        for variant in (dict(presolve=False), dict(crash=False), dict(presolve=False, crash=False)):
            assert solve_lp(model, **variant).objective == pytest.approx(sol.objective, abs=1e-7)

    @pytest.mark.parametrize("seed", range(20))
    def test_random_with_fixing(self, seed):
        rng = np.random.default_rng(1000 + seed)
        inst = random_instance(rng, n_max=12, m_max=4)
        if inst.task_count == 1:
            return
        # fix task 1 on some leaf
        leaf = sorted(leaves(inst.tree))[int(rng.integers(len(leaves(inst.tree))))]
        model = build_lp_relaxation(inst, Assignment.of([(leaf, 1)]))
        sol = solve_lp(model)
        ref = _highs_objective(model)
        if ref is None:
            assert not sol.optimal
        else:
            assert sol.objective == pytest.approx(ref, abs=1e-7)
            assert max_residual(model, sol) <= 1e-7

    def test_effective_leaves_cover_open_tasks(self):
        rng = np.random.default_rng(7)
        for _ in range(40):
            inst = random_instance(rng, n_max=12, m_max=4)
            if inst.task_count == 1:
                continue
            sol = solve_lp(build_lp_relaxation(inst))
            eff = effective_leaves(inst.tree, sol, inst.tree.nodes, range(1, inst.task_count + 1))
            assert len(eff) >= inst.task_count


def _all_trees(n):
    for parents in itertools.product(*[range(1, i) for i in range(2, n + 1)]):
        yield build_tree(dict(zip(range(2, n + 1), parents)), n)


def test_lp_feasible_iff_enough_leaves():
    for n in range(2, 7):
        for tree in _all_trees(n):
            for m in range(2, 5):
                inst = Instance(tree, m, np.zeros((n, m)))
                sol = solve_lp(build_lp_relaxation(inst))
                assert sol.optimal == (len(leaves(tree)) >= m)


def test_format_lp(six_node):
    text = format_lp(build_lp_relaxation(six_node, Assignment.of([(3, 1)])))
    assert text.startswith("\\ MWTM relaxation")
    assert "Maximize" in text and "Subject To" in text and text.rstrip().endswith("End")
    assert " task_2: " in text and " path_4: " in text
    assert "x_3_1" not in text.split("Maximize")[1]
    assert "constant 8" in text
    # every column gets a bound line
    assert text.count(" >= 0") == len(build_lp_relaxation(six_node, Assignment.of([(3, 1)])).columns)
