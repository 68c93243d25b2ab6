"""Solve random instances and compare each optimum with the time-discretized LP.

    python3 demos/crosscheck.py [count] [seed]

For every instance the discretized LP on the solver's own breakpoints must
reproduce the optimum exactly, and uniform grids must approach it from below.
"""

import random
import sys
import time

from mclp.cli import oracle_value, uniform_grid
from mclp.driver import RestartExhausted, Status, solve
from mclp.exact import fmt
from mclp.model import BoundaryParams, DegeneracyError, Feasibility, ProblemData, SignError, feasibility_check, validate


def draw(rng):
    K, J = rng.randint(1, 3), rng.randint(1, 3)
    data = ProblemData.build([[rng.randint(-2, 5) for _ in range(J)] for _ in range(K)],
                             [rng.randint(-4, 4) for _ in range(K)], [rng.randint(-4, 4) for _ in range(J)])
    goal = BoundaryParams.build([rng.randint(1, 9) for _ in range(K)], [rng.randint(-6, 6) for _ in range(J)],
                                rng.randint(1, 4), [-rng.randint(0, 2) for _ in range(K)],
                                [rng.randint(0, 2) for _ in range(J)])
    return data, goal


def instances(rng, count):
    found = 0
    while found < count:
        data, goal = draw(rng)
        try:
            validate(data, goal)
        except (DegeneracyError, SignError):
            continue
        if feasibility_check(data, goal) is Feasibility.BOTH_FEASIBLE:
            found += 1
            yield data, goal


def main(argv):
    count = int(argv[1]) if len(argv) > 1 else 10
    rng = random.Random(int(argv[2]) if len(argv) > 2 else 1)
    print(f"{'K':>2} {'J':>2} {'iters':>5} {'restarts':>8} {'optimum':>14} {'n=4':>14} {'n=16':>14}  exact")
    start = time.perf_counter()
    for data, goal in instances(rng, count):
        try:
            result = solve(data, goal)
        except RestartExhausted as exc:
            print(f"{data.K:>2} {data.J:>2}  restart budget exhausted: {exc}")
            continue
        if result.status is not Status.OPTIMAL:
            print(f"{data.K:>2} {data.J:>2}  {result.status.value}")
            continue
        best = result.objective
        exact = oracle_value(data, goal, result.breakpoints()) == best
        coarse = [oracle_value(data, goal, uniform_grid(goal.T, n)) for n in (4, 16)]
        print(f"{data.K:>2} {data.J:>2} {len(result.trace):>5} {result.restarts:>8} {fmt(best):>14} "
              f"{fmt(coarse[0]):>14} {fmt(coarse[1]):>14}  {'yes' if exact else 'NO'}")
    print(f"{time.perf_counter() - start:.1f} s")


if __name__ == "__main__":
    main(sys.argv)
