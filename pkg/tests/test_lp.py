import random
from fractions import Fraction

import numpy as np
import pytest
from scipy.optimize import linprog

from lexpmsm.lp import solve_constraints, solve_linear, solve_lp
from lexpmsm.poly import Polynomial

V = ["a", "b", "c"]


def random_lp(rng):
    rows = []
    for _ in range(rng.randint(1, 5)):
        coeffs = {v: Fraction(rng.randint(-3, 3)) for v in V}
        rows.append((coeffs, rng.choice(["<=", ">=", "=="]), Fraction(rng.randint(-4, 4))))
    obj = {v: Fraction(rng.randint(-2, 2)) for v in V}
    return rows, obj


def scipy_solve(rows, obj, box):
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for c, s, r in rows:
        vec = [float(c[v]) for v in V]
        if s == "<=":
            A_ub.append(vec); b_ub.append(float(r))
        elif s == ">=":
            A_ub.append([-x for x in vec]); b_ub.append(-float(r))
        else:
            A_eq.append(vec); b_eq.append(float(r))
    res = linprog([-float(obj[v]) for v in V], A_ub=A_ub or None, b_ub=b_ub or None,
                  A_eq=A_eq or None, b_eq=b_eq or None, bounds=[(-box, box)] * 3, method="highs")
    return res


@pytest.mark.parametrize("seed", range(60))
def test_against_scipy(seed):
    rng = random.Random(seed)
    rows, obj = random_lp(rng)
    box = 10
    res = solve_lp(V, rows, obj, {v: Fraction(-box) for v in V}, {v: Fraction(box) for v in V})
    ref = scipy_solve(rows, obj, box)
    assert res.feasible == (ref.status == 0)
    if res.feasible:
        val = sum(obj[v] * res.values[v] for v in V)
        assert abs(float(val) + ref.fun) < 1e-6
        for c, s, r in rows:
            lhs = sum(c[v] * res.values[v] for v in V)
            assert {"<=": lhs <= r, ">=": lhs >= r, "==": lhs == r}[s]


def test_strict_rows():
    x = Polynomial.var("x")
    assert not solve_constraints([(x, ">"), (-x, ">=")], ["x"]).feasible
    r = solve_constraints([(x, ">"), (1 - x, ">")], ["x"])
    assert r.feasible and 0 < r.values["x"] < 1


def test_unbounded_reported():
    x = Polynomial.var("x")
    assert solve_constraints([(x, ">=")], ["x"], objective=x).status == "unbounded"


def test_solve_linear_exact():
    rng = np.random.default_rng(3)
    M = rng.integers(-4, 5, size=(4, 4))
    while round(np.linalg.det(M)) == 0:
        M = rng.integers(-4, 5, size=(4, 4))
    b = rng.integers(-4, 5, size=4)
    sol = solve_linear([[Fraction(int(v)) for v in row] for row in M], [Fraction(int(v)) for v in b])
    assert np.allclose([float(s) for s in sol], np.linalg.solve(M, b))
    for row, rhs in zip(M, b):
        assert sum(Fraction(int(a)) * s for a, s in zip(row, sol)) == rhs
