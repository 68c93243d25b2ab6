from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from mclp.exact import RatVector, SingularError
from mclp.lpcore import LpInstance, Relation, SignClass, Sense, Status, solve_for_basis, solve_lp
from mclp.model import build_test_lp, build_test_lp_dual

from conftest import GOLDEN_DATA, GOLDEN_GOAL


def _check_optimal(inst: LpInstance, out):
    """Primal feasibility, dual sign conditions and equal objectives, all exact."""
    x = out.primal
    for j, cls in enumerate(inst.classes):
        if cls is SignClass.P:
            assert x[j] >= 0
        if cls is SignClass.Z:
            assert x[j] == 0
    for row, rel, r in zip(inst.matrix, inst.relations, inst.rhs):
        lhs = sum(a * v for a, v in zip(row, x))
        assert {Relation.LE: lhs <= r, Relation.GE: lhs >= r, Relation.EQ: lhs == r}[rel]
    obj = sum(c * v for c, v in zip(inst.objective, x))
    assert obj == out.objective
    assert sum(y * r for y, r in zip(out.dual, inst.rhs)) == out.objective


def test_infeasible_trivial():
    out = solve_lp(LpInstance.build([1], [[1]], [-1], ["<="]))
    assert out.status is Status.INFEASIBLE


def test_unbounded_trivial():
    out = solve_lp(LpInstance.build([1], [[-1]], [0], ["<="]))
    assert out.status is Status.UNBOUNDED


def test_small_optimum():
    # max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3
    inst = LpInstance.build([3, 2], [[1, 1], [1, 3], [1, 0]], [4, 6, 3], ["<="] * 3)
    out = solve_lp(inst)
    assert out.status is Status.OPTIMAL
    assert out.objective == 11
    _check_optimal(inst, out)


def test_free_and_zero_classes():
    # min x s.t. x >= -5 with x free; y pinned to zero despite a positive cost
    inst = LpInstance.build([1, -1], [[1, 0], [0, 1]], [-5, 3], [">=", "<="], ["U", "Z"], sense="min")
    out = solve_lp(inst)
    assert out.status is Status.OPTIMAL
    assert out.primal == (Fraction(-5), Fraction(0))


def test_equality_rows():
    inst = LpInstance.build([1, 1], [[1, 2], [1, -1]], [4, 1], ["=", "="])
    out = solve_lp(inst)
    assert out.status is Status.OPTIMAL
    assert out.primal == (Fraction(2), Fraction(1))


def test_golden_test_lps_feasible():
    assert solve_lp(build_test_lp(GOLDEN_DATA, GOLDEN_GOAL)).status is not Status.INFEASIBLE
    assert solve_lp(build_test_lp_dual(GOLDEN_DATA, GOLDEN_GOAL)).status is not Status.INFEASIBLE


def test_instance_shape_checked():
    with pytest.raises(ValueError):
        LpInstance.build([1, 2], [[1]], [1], ["<="])


def test_basis_of_slacks():
    inst = LpInstance.build([1, 1], [[1, 2], [3, 1]], [4, 5], ["<=", "<="])
    sol = solve_for_basis(inst, [2, 3])
    assert sol.primal == RatVector([0, 0])
    assert sol.slacks == RatVector([4, 5])


def test_rates_basis_from_lp():
    # A u + xdot = b with xdot_1 and u_2 basic
    inst = LpInstance.build([0, 0], [[5, 2], [3, 4]], [3, 1], ["<=", "<="])
    sol = solve_for_basis(inst, [2, 1])
    assert sol.primal == RatVector([0, Fraction(1, 4)])
    assert sol.slacks == RatVector([Fraction(5, 2), 0])


def test_dependent_basis_columns():
    inst = LpInstance.build([1, 1], [[1, 2], [2, 4]], [1, 2], ["<=", "<="])
    with pytest.raises(SingularError):
        solve_for_basis(inst, [0, 1])


coef = st.integers(-5, 5)


@settings(max_examples=80, deadline=None)
@given(
    st.integers(1, 4).flatmap(
        lambda n: st.tuples(
            st.lists(coef, min_size=n, max_size=n),
            st.lists(st.lists(coef, min_size=n, max_size=n), min_size=1, max_size=4),
        )
    ),
    st.data(),
)
def test_agrees_with_scipy(shape, data):
    c, A = shape
    b = data.draw(st.lists(st.integers(-3, 8), min_size=len(A), max_size=len(A)))
    rels = data.draw(st.lists(st.sampled_from(["<=", ">="]), min_size=len(A), max_size=len(A)))
    inst = LpInstance.build(c, A, b, rels)
    out = solve_lp(inst)
    sign = np.array([1 if r == "<=" else -1 for r in rels])
    ref = linprog(-np.array(c, float), A_ub=np.array(A, float) * sign[:, None], b_ub=np.array(b, float) * sign,
                  bounds=[(0, None)] * len(c), method="highs")
    assume(ref.status in (0, 2, 3))
    expected = {0: Status.OPTIMAL, 2: Status.INFEASIBLE, 3: Status.UNBOUNDED}[ref.status]
    assert out.status is expected
    if expected is Status.OPTIMAL:
        assert float(out.objective) == pytest.approx(-ref.fun, abs=1e-7)
        _check_optimal(inst, out)
