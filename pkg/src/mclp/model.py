"""Problem data, boundary parameters, the parametric line and validation."""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import Number, RatMatrix, RatVector, rank, rat
from .lpcore import LpInstance, Sense, Status, solve_lp


class DegeneracyError(ValueError):
    """The slope vector lies in the span of too few columns.

    ``side`` is ``"b"`` or ``"c"``; ``subset`` lists the offending columns
    of ``[A I]`` (or ``[A^T I]``) as 0-based indices.
    """

    def __init__(self, side: str, subset: tuple[int, ...]):
        super().__init__(f"{side} is a combination of columns {list(subset)}")
        self.side = side
        self.subset = subset


class SignError(ValueError):
    pass


@dataclass(frozen=True)
class ProblemData:
    A: RatMatrix
    b: RatVector
    c: RatVector

    def __post_init__(self):
        K, J = self.A.shape
        if len(self.b) != K or len(self.c) != J:
            raise ValueError(f"A is {K}x{J} but len(b)={len(self.b)}, len(c)={len(self.c)}")

    @classmethod
    def build(cls, A: Sequence[Sequence[Number]], b: Sequence[Number], c: Sequence[Number]) -> "ProblemData":
        return cls(RatMatrix(A), RatVector(b), RatVector(c))

    @property
    def K(self) -> int:
        return self.A.shape[0]

    @property
    def J(self) -> int:
        return self.A.shape[1]


@dataclass(frozen=True)
class BoundaryParams:
    """The boundary parameters (beta, gamma, T, lambda, mu).

    Construction never raises on signs so that intermediate points and
    directions can be represented; :meth:`check_signs` enforces them.
    """

    beta: RatVector
    gamma: RatVector
    T: Fraction
    lam: RatVector
    mu: RatVector

    @classmethod
    def build(cls, beta, gamma, T, lam, mu) -> "BoundaryParams":
        return cls(RatVector(beta), RatVector(gamma), rat(T), RatVector(lam), RatVector(mu))

    def __add__(self, other: "BoundaryParams") -> "BoundaryParams":
        return BoundaryParams(
            self.beta + other.beta,
            self.gamma + other.gamma,
            self.T + other.T,
            self.lam + other.lam,
            self.mu + other.mu,
        )

    def __sub__(self, other: "BoundaryParams") -> "BoundaryParams":
        return self + other * -1

    def __mul__(self, s: Number) -> "BoundaryParams":
        s = rat(s)
        return BoundaryParams(self.beta * s, self.gamma * s, self.T * s, self.lam * s, self.mu * s)

    __rmul__ = __mul__

    def check_dims(self, data: ProblemData) -> None:
        K, J = data.K, data.J
        if (len(self.beta), len(self.lam), len(self.gamma), len(self.mu)) != (K, K, J, J):
            raise ValueError("boundary parameter lengths do not match K and J")

    def check_signs(self) -> None:
        if self.T <= 0:
            raise SignError(f"T must be positive, got {self.T}")
        if any(v > 0 for v in self.lam):
            raise SignError(f"lambda must be <= 0, got {list(map(str, self.lam))}")
        if any(v < 0 for v in self.mu):
            raise SignError(f"mu must be >= 0, got {list(map(str, self.mu))}")


@dataclass(frozen=True)
class ParamLine:
    start: BoundaryParams
    goal: BoundaryParams

    @property
    def direction(self) -> BoundaryParams:
        return self.goal - self.start

    def at(self, theta: Number) -> BoundaryParams:
        theta = rat(theta)
        if theta == 0:
            return self.start
        if theta == 1:
            return self.goal
        return self.start * (1 - theta) + self.goal * theta


def _in_span(columns: list[list[Fraction]], target: Sequence[Fraction]) -> bool:
    if not columns:
        return all(v == 0 for v in target)
    S = RatMatrix.from_columns(columns)
    return rank(RatMatrix.from_columns(columns + [list(target)])) == rank(S)


def _check_general_position(M: RatMatrix, target: RatVector, side: str) -> None:
    rows, cols = M.shape
    pool = [M.col(j).tuple() for j in range(cols)]
    pool += [tuple(Fraction(int(i == k)) for i in range(rows)) for k in range(rows)]
    for subset in itertools.combinations(range(len(pool)), rows - 1):
        if _in_span([list(pool[j]) for j in subset], target):
            raise DegeneracyError(side, subset)


def check_nondegenerate(data: ProblemData) -> None:
    _check_general_position(data.A, data.b, "b")
    _check_general_position(data.A.T, data.c, "c")


def validate(data: ProblemData, rho: BoundaryParams) -> None:
    """Raise DegeneracyError or SignError; return None when the pair is usable."""
    rho.check_dims(data)
    rho.check_signs()
    check_nondegenerate(data)


def perturb(data: ProblemData, eps: Number) -> ProblemData:
    """Shift b_k by eps^(k+1) and c_j by eps^(K+j+1) until data is non-degenerate."""
    eps = rat(eps)
    if eps <= 0:
        raise ValueError(f"perturbation size must be positive, got {eps}")
    e = min(eps, Fraction(1, 2))
    K, J = data.K, data.J
    for _ in range(64):
        b = RatVector(data.b[k] + e ** (k + 1) for k in range(K))
        c = RatVector(data.c[j] + e ** (K + j + 1) for j in range(J))
        candidate = ProblemData(data.A, b, c)
        try:
            check_nondegenerate(candidate)
        except DegeneracyError:
            e /= 7
            continue
        return candidate
    raise AssertionError("no non-degenerate perturbation found")


class Feasibility(enum.IntEnum):
    BOTH_FEASIBLE = 0
    PRIMAL_INFEASIBLE = 1
    DUAL_INFEASIBLE = 2
    BOTH_INFEASIBLE = 3


def build_test_lp(data: ProblemData, rho: BoundaryParams) -> LpInstance:
    """Static LP over (impulse at 0, total control) whose feasibility decides the primal."""
    A, K, J = data.A, data.K, data.J
    cT = data.c * rho.T
    objective = list(rho.gamma + cT + rho.mu) + list(rho.gamma + cT)
    rows = [list(A.row(k)) + [0] * J for k in range(K)]
    rows += [list(A.row(k)) * 2 for k in range(K)]
    rhs = list(rho.beta) + list(rho.beta + data.b * rho.T + rho.lam)
    return LpInstance.build(objective, rows, rhs, ["<="] * (2 * K), sense=Sense.MAX)


def build_test_lp_dual(data: ProblemData, rho: BoundaryParams) -> LpInstance:
    """Mirror image of :func:`build_test_lp` for the dual problem."""
    At, K, J = data.A.T, data.K, data.J
    bT = data.b * rho.T
    objective = list(rho.beta + bT + rho.lam) + list(rho.beta + bT)
    rows = [list(At.row(j)) + [0] * K for j in range(J)]
    rows += [list(At.row(j)) * 2 for j in range(J)]
    rhs = list(rho.gamma) + list(rho.gamma + data.c * rho.T + rho.mu)
    return LpInstance.build(objective, rows, rhs, [">="] * (2 * J), sense=Sense.MIN)


def feasibility_check(data: ProblemData, rho: BoundaryParams) -> Feasibility:
    primal_ok = solve_lp(build_test_lp(data, rho)).status is not Status.INFEASIBLE
    dual_ok = solve_lp(build_test_lp_dual(data, rho)).status is not Status.INFEASIBLE
    if primal_ok and dual_ok:
        return Feasibility.BOTH_FEASIBLE
    if dual_ok:
        return Feasibility.PRIMAL_INFEASIBLE
    if primal_ok:
        return Feasibility.DUAL_INFEASIBLE
    return Feasibility.BOTH_INFEASIBLE


def single_interval_conditions(data: ProblemData, rho: BoundaryParams) -> bool:
    """Strict inequalities under which U = P = 0 on one interval is optimal."""
    end_x = rho.beta + data.b * rho.T + rho.lam
    end_q = rho.gamma + data.c * rho.T + rho.mu
    return (
        rho.T > 0
        and all(v > 0 for v in rho.beta)
        and all(v < 0 for v in rho.gamma)
        and all(v < 0 for v in rho.lam)
        and all(v > 0 for v in rho.mu)
        and all(v > 0 for v in end_x)
        and all(v < 0 for v in end_q)
    )
