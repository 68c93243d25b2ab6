import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mclp.exact import RatVector, SingularError
from mclp.rates import (
    NotAdjacent,
    RatesBasis,
    RatesSolution,
    adjacency,
    admissible_bases,
    is_adjacent,
    is_admissible,
    is_nondegenerate,
    neighbours,
    rates_for_basis,
    rates_objective,
    u,
    xdot,
)

from conftest import GOLDEN_DATA, random_feasible

F = Fraction


def basis(K, J):
    return RatesBasis.of([k - 1 for k in K], [j - 1 for j in J])


def test_full_basis_rates():
    sol = rates_for_basis(GOLDEN_DATA, basis({1, 2}, {1, 2}))
    assert sol.u == RatVector([0, 0])
    assert sol.xdot == GOLDEN_DATA.b
    assert sol.p == RatVector([0, 0])
    assert sol.qdot == -GOLDEN_DATA.c


def test_first_interval_rates():
    sol = rates_for_basis(GOLDEN_DATA, basis({1}, {1}))
    assert sol.u == RatVector([0, F(1, 4)])
    assert sol.xdot == RatVector([F(5, 2), 0])
    assert sol.p == RatVector([0, F(1, 2)])
    assert sol.qdot == RatVector([F(1, 2), 0])


def test_second_interval_rates():
    sol = rates_for_basis(GOLDEN_DATA, basis({1}, {2}))
    assert sol.u == RatVector([F(1, 3), 0])
    assert sol.xdot == RatVector([F(4, 3), 0])
    assert sol.p == RatVector([0, F(1, 3)])
    assert sol.qdot == RatVector([0, F(-2, 3)])


def test_admissibility():
    for K, J in (({1, 2}, {1, 2}), ({1}, {1}), ({1}, {2})):
        assert is_admissible(rates_for_basis(GOLDEN_DATA, basis(K, J)))
    neg = RatesSolution(RatVector([-1]), RatVector([0]), RatVector([0]), RatVector([0]))
    assert not is_admissible(neg)
    zero = RatesSolution(RatVector([0]), RatVector([1]), RatVector([0]), RatVector([1]))
    assert is_admissible(zero)


def test_nondegenerate_for_golden_bases():
    for K, J in (({1, 2}, {1, 2}), ({1}, {1}), ({1}, {2})):
        b = basis(K, J)
        assert is_nondegenerate(b, rates_for_basis(GOLDEN_DATA, b))


def test_objective_decreases_along_golden_sequence():
    values = [rates_objective(GOLDEN_DATA, rates_for_basis(GOLDEN_DATA, basis(K, J)))
              for K, J in (({1}, {1}), ({1}, {2}), ({1, 2}, {1, 2}))]
    assert values == [F(1, 2), F(1, 3), 0]


def test_adjacency_pair():
    leaving, entering = adjacency(basis({1}, {1}), basis({1, 2}, {1, 2}))
    assert leaving == u(1)
    assert entering == xdot(1)


def test_not_adjacent():
    b = basis({1}, {1})
    with pytest.raises(NotAdjacent):
        adjacency(b, b)
    with pytest.raises(NotAdjacent):
        adjacency(basis({1}, {1}), basis({2}, {2}))


def test_basis_size_checked():
    with pytest.raises(ValueError):
        rates_for_basis(GOLDEN_DATA, basis({1}, {1, 2}))


def test_singular_basis():
    data = type(GOLDEN_DATA).build([[1, 2], [2, 4]], [1, 3], [1, 1])
    with pytest.raises(SingularError):
        rates_for_basis(data, basis(set(), set()))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_rates_solve_both_systems(seed):
    ((data, _),) = random_feasible(seed, 1)
    for b in admissible_bases(data):
        sol = rates_for_basis(data, b)
        for k in range(data.K):
            assert data.A.row(k).dot(sol.u) + sol.xdot[k] == data.b[k]
            if k not in b.Kset:
                assert sol.xdot[k] == 0
            else:
                assert sol.p[k] == 0
        for j in range(data.J):
            assert data.A.col(j).dot(sol.p) - sol.qdot[j] == data.c[j]
            if j in b.Jset:
                assert sol.u[j] == 0
            else:
                assert sol.qdot[j] == 0
        assert is_admissible(sol)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10**6))
def test_neighbours_are_adjacent(seed):
    ((data, _),) = random_feasible(seed, 1)
    b = RatesBasis.full(data.K, data.J)
    for nb in neighbours(b, data.K, data.J):
        nb.check(data.K, data.J)
        assert is_adjacent(b, nb) and is_adjacent(nb, b)
        leaving, entering = adjacency(b, nb)
        assert b.swap(leaving, entering) == nb
