"""Bounded-variable primal simplex against hand-solved LPs and scipy.

The random battery builds LPs whose feasibility is known by construction
(either a witness point was planted or a contradictory row pair was), then
checks status and optimal value against scipy's HiGGS-backed linprog.
"""

from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import linprog

from tap.solve.simplex import (
    LP_INFEASIBLE,
    LP_ITERATION_LIMIT,
    LP_OPTIMAL,
    LP_UNBOUNDED,
    LinearProgram,
    compiled_available,
    solve_lp,
)


def lp(c, a, senses, rhs, lo=None, hi=None):
    c = np.asarray(c, dtype=float)
    n = c.size
    a = np.asarray(a, dtype=float).reshape(len(senses), n) if len(senses) else np.zeros((0, n))
    return LinearProgram(
        c=c,
        a=a,
        senses=tuple(senses),
        rhs=np.asarray(rhs, dtype=float),
        lower=np.zeros(n) if lo is None else np.asarray(lo, dtype=float),
        upper=np.ones(n) if hi is None else np.asarray(hi, dtype=float),
    )


def reference(problem: LinearProgram):
    """scipy's view of the same maximization problem."""
    a_ub, b_ub, a_eq, b_eq = [], [], [], []
    for row, sense, b in zip(problem.a, problem.senses, problem.rhs):
        if sense == "<=":
            a_ub.append(row)
            b_ub.append(b)
        elif sense == ">=":
            a_ub.append(-row)
            b_ub.append(-b)
        else:
            a_eq.append(row)
            b_eq.append(b)
    bounds = [
        (l, None if math.isinf(u) else u)
        for l, u in zip(problem.lower, problem.upper)
    ]
    return linprog(
        -problem.c,
        A_ub=np.array(a_ub) if a_ub else None,
        b_ub=np.array(b_ub) if b_ub else None,
        A_eq=np.array(a_eq) if a_eq else None,
        b_eq=np.array(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )


class TestHandSolved:
    def test_shared_budget(self):
        # max x + y, x + y <= 1.5, boxes [0,1]: value 1.5
        res = solve_lp(lp([1, 1], [[1, 1]], ["<="], [1.5]))
        assert res.status == LP_OPTIMAL
        assert res.objective == pytest.approx(1.5)
        assert res.x.sum() == pytest.approx(1.5)

    def test_pure_bound_flips_no_rows(self):
        # no rows at all: everything with positive weight flips to its top
        res = solve_lp(lp([2, -1, 3], np.zeros((0, 3)), [], []))
        assert res.status == LP_OPTIMAL
        assert res.objective == pytest.approx(5.0)
        assert list(res.x) == [1.0, 0.0, 1.0]

    def test_equality_split(self):
        # max 2x + y with x + y = 1: put everything on x
        res = solve_lp(lp([2, 1], [[1, 1]], ["="], [1.0]))
        assert res.status == LP_OPTIMAL
        assert res.objective == pytest.approx(2.0)
        assert res.x[0] == pytest.approx(1.0)

    def test_lower_bound_row_infeasible(self):
        res = solve_lp(lp([1], [[1]], [">="], [2.0]))
        assert res.status == LP_INFEASIBLE

    def test_conflicting_rows_infeasible(self):
        res = solve_lp(lp([1, 1], [[1, 1], [1, 1]], ["<=", ">="], [0.4, 0.6]))
        assert res.status == LP_INFEASIBLE

    def test_unbounded_ray(self):
        problem = lp([1, 0], [[0, 1]], ["<="], [1.0],
                     lo=[0, 0], hi=[math.inf, 1.0])
        res = solve_lp(problem)
        assert res.status == LP_UNBOUNDED

    def test_negative_objective_stays_home(self):
        res = solve_lp(lp([-1, -2], [[1, 1]], ["<="], [1.0]))
        assert res.status == LP_OPTIMAL
        assert res.objective == pytest.approx(0.0)

    def test_iteration_limit_status(self):
        problem = lp([1, 1, 1], [[1, 1, 1]], ["<="], [1.5])
        res = solve_lp(problem, maxiter=0)
        assert res.status == LP_ITERATION_LIMIT

    def test_equality_forcing_upper(self):
        # x must sit at its top to satisfy the row
        res = solve_lp(lp([0, 1], [[2, 0]], ["="], [2.0]))
        assert res.status == LP_OPTIMAL
        assert res.x[0] == pytest.approx(1.0)
        assert res.x[1] == pytest.approx(1.0)

    def test_mixed_senses(self):
        # max x + 2y + 3z; x + y + z <= 2; y >= 0.5; z = 0.25
        res = solve_lp(
            lp([1, 2, 3],
               [[1, 1, 1], [0, 1, 0], [0, 0, 1]],
               ["<=", ">=", "="],
               [2.0, 0.5, 0.25])
        )
        assert res.status == LP_OPTIMAL
        # z pinned, y to its top (weight 2 beats weight 1), x takes the rest
        assert res.x == pytest.approx([0.75, 1.0, 0.25])
        assert res.objective == pytest.approx(0.75 + 2.0 + 0.75)

    def test_degenerate_vertex_terminates(self):
        # many rows through one point
        res = solve_lp(
            lp([1, 1],
               [[1, 0], [0, 1], [1, 1], [1, -1]],
               ["<=", "<=", "<=", "<="],
               [1.0, 1.0, 1.0, 0.0],
               hi=[5.0, 5.0])
        )
        assert res.status == LP_OPTIMAL
        assert res.objective == pytest.approx(1.0)

    def test_beale_style_cycling_guard(self):
        # the classic cycling layout (stated as a maximization); known
        # optimum 0.05 at (0.04, 0, 1, 0). anti-cycling must break out.
        c = [0.75, -150.0, 0.02, -6.0]
        a = [
            [0.25, -60.0, -1 / 25.0, 9.0],
            [0.5, -90.0, -1 / 50.0, 3.0],
            [0.0, 0.0, 1.0, 0.0],
        ]
        problem = lp(c, a, ["<=", "<=", "<="], [0.0, 0.0, 1.0],
                     lo=[0.0] * 4, hi=[math.inf] * 4)
        res = solve_lp(problem)
        assert res.status == LP_OPTIMAL
        assert res.objective == pytest.approx(0.05, abs=1e-9)
        ref = reference(problem)
        assert res.objective == pytest.approx(-ref.fun, abs=1e-7)


def random_problem(rng, *, force_infeasible=False):
    n = rng.integers(3, 9)
    m = rng.integers(1, 7)
    a = np.round(rng.uniform(-2, 3, size=(m, n)) * rng.integers(0, 2, size=(m, n)), 2)
    # make sure no row is entirely empty
    for i in range(m):
        if not a[i].any():
            a[i, rng.integers(0, n)] = 1.0
    hi = np.round(rng.uniform(0.5, 3.0, size=n), 2)
    witness = np.round(rng.uniform(0, 1, size=n), 2) * hi
    senses, rhs = [], []
    for i in range(m):
        activity = float(a[i] @ witness)
        kind = rng.integers(0, 3)
        if kind == 0:
            senses.append("<=")
            rhs.append(activity + round(rng.uniform(0, 1.5), 2))
        elif kind == 1:
            senses.append(">=")
            rhs.append(activity - round(rng.uniform(0, 1.5), 2))
        else:
            senses.append("=")
            rhs.append(activity)
    if force_infeasible:
        j = rng.integers(0, n)
        row = np.zeros(n)
        row[j] = 1.0
        a = np.vstack([a, row, row])
        senses += ["<=", ">="]
        rhs += [0.25 * hi[j], 0.75 * hi[j]]
    c = np.round(rng.uniform(-2, 2, size=n), 2)
    return lp(c, a, senses, rhs, lo=np.zeros(n), hi=hi)


class TestAgainstScipy:
    @pytest.mark.parametrize("seed", range(60))
    def test_planted_feasible(self, seed):
        rng = np.random.default_rng(seed)
        problem = random_problem(rng)
        res = solve_lp(problem)
        ref = reference(problem)
        assert ref.status == 0, "witness construction should keep these feasible"
        assert res.status == LP_OPTIMAL
        assert res.objective == pytest.approx(-ref.fun, abs=1e-7)
        # the reported point must actually be feasible and worth its objective
        for row, sense, b in zip(problem.a, problem.senses, problem.rhs):
            act = float(row @ res.x)
            if sense == "<=":
                assert act <= b + 1e-7
            elif sense == ">=":
                assert act >= b - 1e-7
            else:
                assert act == pytest.approx(b, abs=1e-7)
        assert float(problem.c @ res.x) == pytest.approx(res.objective, abs=1e-9)

    @pytest.mark.parametrize("seed", range(40))
    def test_planted_infeasible(self, seed):
        rng = np.random.default_rng(1000 + seed)
        problem = random_problem(rng, force_infeasible=True)
        res = solve_lp(problem)
        ref = reference(problem)
        assert ref.status == 2
        assert res.status == LP_INFEASIBLE


@pytest.mark.skipif(not compiled_available(), reason="compiled kernel not built")
class TestKernelParity:
    """The compiled kernel must retrace the numpy kernel exactly.

    Both share numpy's reductions, and the scalar loops round identically,
    so not just values but the entire pivot sequence has to match.
    """

    @pytest.mark.parametrize("seed", range(40))
    def test_identical_pivot_paths(self, seed):
        rng = np.random.default_rng(3000 + seed)
        problem = random_problem(rng, force_infeasible=seed % 4 == 0)
        a = solve_lp(problem, backend="numpy")
        b = solve_lp(problem, backend="cython")
        assert a.status == b.status
        assert a.iterations == b.iterations
        assert list(a.basis) == list(b.basis)
        assert list(a.at_upper) == list(b.at_upper)
        assert a.objective == b.objective  # same bits, not just close
        assert (a.x == b.x).all()

    def test_degenerate_path_parity(self):
        problem = lp([1, 1],
                     [[1, 0], [0, 1], [1, 1], [1, -1]],
                     ["<=", "<=", "<=", "<="],
                     [1.0, 1.0, 1.0, 0.0],
                     hi=[5.0, 5.0])
        a = solve_lp(problem, backend="numpy")
        b = solve_lp(problem, backend="cython")
        assert (a.status, a.iterations, a.objective) == (b.status, b.iterations, b.objective)
        assert (a.x == b.x).all()


class TestWarmStart:
    def test_restart_from_optimal_basis_is_quick(self):
        problem = lp([1, 2, 3, 1], [[1, 1, 1, 1], [1, 0, 1, 0]],
                     ["<=", "<="], [2.5, 1.5])
        cold = solve_lp(problem)
        assert cold.status == LP_OPTIMAL
        again = solve_lp(problem, basis=cold.basis, at_upper=cold.at_upper)
        assert again.status == LP_OPTIMAL
        assert again.objective == pytest.approx(cold.objective)
        assert again.iterations <= 1

    def test_bound_tightening_repair(self):
        # fix the variable the optimum leaned on to zero, warm start
        problem = lp([1, 2, 3, 1], [[1, 1, 1, 1], [1, 0, 1, 0]],
                     ["<=", "<="], [2.5, 1.5])
        cold = solve_lp(problem)
        heavy = int(np.argmax(cold.x))
        hi = problem.upper.copy()
        hi[heavy] = 0.0
        tightened = LinearProgram(
            c=problem.c, a=problem.a, senses=problem.senses, rhs=problem.rhs,
            lower=problem.lower, upper=hi,
        )
        warm = solve_lp(tightened, basis=cold.basis, at_upper=cold.at_upper)
        fresh = solve_lp(tightened)
        assert warm.status == fresh.status == LP_OPTIMAL
        assert warm.objective == pytest.approx(fresh.objective, abs=1e-9)
        assert warm.x[heavy] == 0.0

    @pytest.mark.parametrize("seed", range(20))
    def test_random_bound_fixings_agree_with_scipy(self, seed):
        rng = np.random.default_rng(2000 + seed)
        problem = random_problem(rng)
        base = solve_lp(problem)
        assert base.status == LP_OPTIMAL
        j = int(rng.integers(0, problem.c.size))
        for which in (0.0, None):
            lo = problem.lower.copy()
            hi = problem.upper.copy()
            if which == 0.0:
                hi[j] = 0.0
            else:
                lo[j] = hi[j]
            child = LinearProgram(c=problem.c, a=problem.a, senses=problem.senses,
                                  rhs=problem.rhs, lower=lo, upper=hi)
            warm = solve_lp(child, basis=base.basis, at_upper=base.at_upper)
            ref = reference(child)
            if ref.status == 0:
                assert warm.status == LP_OPTIMAL
                assert warm.objective == pytest.approx(-ref.fun, abs=1e-7)
            else:
                assert warm.status == LP_INFEASIBLE
