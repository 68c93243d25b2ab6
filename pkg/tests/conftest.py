import random
from fractions import Fraction

import pytest

from mclp.rates import RatesBasis
from mclp.structural import BaseSequence
from mclp.model import (
    BoundaryParams,
    DegeneracyError,
    Feasibility,
    ParamLine,
    ProblemData,
    SignError,
    feasibility_check,
    validate,
)

# two-product example used throughout: four iterations from a hand-picked start
GOLDEN_DATA = ProblemData.build([[5, 2], [3, 4]], [3, 1], [1, 2])
GOLDEN_GOAL = BoundaryParams.build([8, 10], [5, 6], 2, [0, 0], [0, 0])
GOLDEN_START = BoundaryParams.build([8, 10], [-2, -2], "1/10", [-1, -1], [1, 1])


def seq(start, bases, end):
    """Base sequence from 1-based index sets, written as they are usually printed."""

    def z(s):
        return {i - 1 for i in s}

    return BaseSequence.of((z(start[0]), z(start[1])), [RatesBasis.of(z(K), z(J)) for K, J in bases],
                           (z(end[0]), z(end[1])))


SEQ1 = BaseSequence.initial(2, 2)
SEQ2 = seq(({1, 2}, {1}), [({1, 2}, {1, 2})], ({1}, {1, 2}))
SEQ3 = seq(({1}, {1}), [({1}, {1}), ({1, 2}, {1, 2})], ({1}, {1, 2}))
SEQ4 = seq(({1}, {1}), [({1}, {1}), ({1}, {2}), ({1, 2}, {1, 2})], ({1}, {1, 2}))


def at_collision(s, theta_lo):
    """Solve ``s`` on the golden line from ``theta_lo`` to the end of its step."""
    from mclp.structural import assemble, ratio_step, solve_structure

    line = ParamLine(GOLDEN_START, GOLDEN_GOAL)
    system = assemble(GOLDEN_DATA, s)
    H, dH = solve_structure(system, line.at(theta_lo), line.direction)
    step, hit = ratio_step(H, dH, system.hp)
    theta_bar = Fraction(theta_lo) + step
    return system, H.shifted(dH, step), hit, theta_bar, line


@pytest.fixture
def golden():
    return GOLDEN_DATA, GOLDEN_GOAL, GOLDEN_START


@pytest.fixture
def golden_line():
    return ParamLine(GOLDEN_START, GOLDEN_GOAL)


def random_problem(rng: random.Random, max_k: int = 3, max_j: int = 3):
    """Small integer instance; may be degenerate or infeasible."""
    K = rng.randint(1, max_k)
    J = rng.randint(1, max_j)
    A = [[rng.randint(-2, 5) for _ in range(J)] for _ in range(K)]
    b = [rng.randint(-4, 4) for _ in range(K)]
    c = [rng.randint(-4, 4) for _ in range(J)]
    goal = BoundaryParams.build(
        [rng.randint(1, 9) for _ in range(K)],
        [rng.randint(-6, 6) for _ in range(J)],
        rng.randint(1, 4),
        [-rng.randint(0, 2) for _ in range(K)],
        [rng.randint(0, 2) for _ in range(J)],
    )
    return ProblemData.build(A, b, c), goal


def random_feasible(seed: int, count: int, max_k: int = 3, max_j: int = 3):
    """``count`` non-degenerate instances with both problems feasible, reproducible from ``seed``."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        data, goal = random_problem(rng, max_k, max_j)
        try:
            validate(data, goal)
        except (DegeneracyError, SignError):
            continue
        if feasibility_check(data, goal) is Feasibility.BOTH_FEASIBLE:
            out.append((data, goal))
    return out


def F(v) -> Fraction:
    return Fraction(v)


# one summary line per acceptance criterion, filled in by test_acceptance
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
