import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mclp.exact import RatVector
from mclp.model import (
    BoundaryParams,
    DegeneracyError,
    Feasibility,
    ParamLine,
    ProblemData,
    SignError,
    check_nondegenerate,
    feasibility_check,
    perturb,
    single_interval_conditions,
    validate,
)

from conftest import GOLDEN_DATA, GOLDEN_GOAL, GOLDEN_START, random_problem

TINY = ProblemData.build([[1]], [1], [1])
TINY_RHO = BoundaryParams.build([-1], [-1], 1, [0], [0])


def test_golden_data_validates():
    validate(GOLDEN_DATA, GOLDEN_GOAL)


def test_b_equal_to_a_column_is_degenerate():
    data = ProblemData.build([[1, 2], [3, 4]], [1, 3], [1, 1])
    with pytest.raises(DegeneracyError) as err:
        check_nondegenerate(data)
    assert err.value.side == "b"


def test_c_in_small_span_is_degenerate():
    data = ProblemData.build([[1, 2], [3, 4]], [1, 1], [0, 5])
    with pytest.raises(DegeneracyError) as err:
        check_nondegenerate(data)
    assert err.value.side == "c"


@pytest.mark.parametrize(
    "rho",
    [
        BoundaryParams.build([8, 10], [5, 6], 2, [1, 0], [0, 0]),
        BoundaryParams.build([8, 10], [5, 6], 2, [0, 0], [0, -1]),
        BoundaryParams.build([8, 10], [5, 6], 0, [0, 0], [0, 0]),
    ],
)
def test_sign_errors(rho):
    with pytest.raises(SignError):
        validate(GOLDEN_DATA, rho)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        validate(GOLDEN_DATA, BoundaryParams.build([8], [5, 6], 2, [0], [0, 0]))


def test_perturb_is_noop_up_to_eps():
    eps = Fraction(1, 1000)
    out = perturb(GOLDEN_DATA, eps)
    check_nondegenerate(out)
    assert all(abs(x - y) <= eps for x, y in zip(out.b, GOLDEN_DATA.b))
    assert all(abs(x - y) <= eps for x, y in zip(out.c, GOLDEN_DATA.c))


def test_perturb_repairs_column_b():
    data = ProblemData.build([[1, 2], [3, 4]], [1, 3], [1, 1])
    out = perturb(data, Fraction(1, 1000))
    validate(out, BoundaryParams.build([1, 1], [1, 1], 1, [0, 0], [0, 0]))


def test_perturb_rejects_zero():
    with pytest.raises(ValueError):
        perturb(GOLDEN_DATA, 0)


def test_golden_feasible():
    assert feasibility_check(GOLDEN_DATA, GOLDEN_GOAL) is Feasibility.BOTH_FEASIBLE


def test_tiny_primal_infeasible():
    # x(0) = -1 - U(0) < 0 whatever the control
    assert feasibility_check(TINY, TINY_RHO) is Feasibility.PRIMAL_INFEASIBLE


def test_single_interval_start_is_feasible():
    assert single_interval_conditions(GOLDEN_DATA, GOLDEN_START)
    assert feasibility_check(GOLDEN_DATA, GOLDEN_START) is Feasibility.BOTH_FEASIBLE


def test_param_line_endpoints():
    line = ParamLine(GOLDEN_START, GOLDEN_GOAL)
    assert line.at(0) == GOLDEN_START
    assert line.at(1) == GOLDEN_GOAL
    mid = line.at(Fraction(1, 2))
    assert mid.T == Fraction(21, 20)
    assert line.direction.gamma == RatVector([7, 8])


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6), st.fractions(0, 1, max_denominator=50))
def test_param_line_is_affine(seed, theta):
    rng = random.Random(seed)
    _, a = random_problem(rng, 2, 2)
    b = BoundaryParams(a.beta * 2, a.gamma + a.gamma, a.T + 1, a.lam, a.mu * 3)
    line = ParamLine(a, b)
    assert line.at(theta) == a + line.direction * theta


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_feasibility_matches_single_interval(seed):
    # a point meeting the strict one-interval conditions is always feasible on both sides
    rng = random.Random(seed)
    data, goal = random_problem(rng)
    K, J = data.K, data.J
    rho = BoundaryParams.build(
        [2 + abs(v) for v in data.b], [-2 - abs(v) for v in data.c], 1, [-1] * K, [1] * J
    )
    assert single_interval_conditions(data, rho)
    assert feasibility_check(data, rho) is Feasibility.BOTH_FEASIBLE
