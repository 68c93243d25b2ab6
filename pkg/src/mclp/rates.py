"""Rates of a prescribed basis, admissibility and adjacency."""

from __future__ import annotations

import functools
from itertools import combinations
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .exact import RatMatrix, RatVector, SingularError, solve_linear
from .model import ProblemData


@dataclass(frozen=True, order=True)
class VarId:
    """A tagged 0-based index such as ``VarId("u", 1)`` for u_2."""

    kind: str
    index: int

    def __str__(self) -> str:
        return f"{self.kind}_{self.index + 1}"


def u(j: int) -> VarId:
    return VarId("u", j)


def xdot(k: int) -> VarId:
    return VarId("xdot", k)


def p(k: int) -> VarId:
    return VarId("p", k)


def qdot(j: int) -> VarId:
    return VarId("qdot", j)


class NotAdjacent(ValueError):
    pass


@dataclass(frozen=True)
class RatesBasis:
    """Kset holds the basic xdot indices, Jset the basic qdot indices (0-based)."""

    Kset: frozenset[int]
    Jset: frozenset[int]

    @classmethod
    def of(cls, Kset: Iterable[int], Jset: Iterable[int]) -> "RatesBasis":
        return cls(frozenset(Kset), frozenset(Jset))

    @classmethod
    def full(cls, K: int, J: int) -> "RatesBasis":
        return cls(frozenset(range(K)), frozenset(range(J)))

    def check(self, K: int, J: int) -> None:
        if not (self.Kset <= set(range(K)) and self.Jset <= set(range(J))):
            raise ValueError(f"index out of range in {self}")
        if len(self.Kset) + J - len(self.Jset) != K:
            raise ValueError(f"{self} does not have {K} primal basic variables")

    def primal_basic(self, J: int) -> frozenset[VarId]:
        return frozenset([xdot(k) for k in self.Kset] + [u(j) for j in range(J) if j not in self.Jset])

    def dual_basic(self, K: int) -> frozenset[VarId]:
        return frozenset([p(k) for k in range(K) if k not in self.Kset] + [qdot(j) for j in self.Jset])

    def swap(self, leaving: VarId, entering: VarId) -> "RatesBasis":
        """Primal pivot: ``leaving`` exits the primal basis and ``entering`` joins it."""
        K, J = set(self.Kset), set(self.Jset)
        for var, joins in ((leaving, False), (entering, True)):
            if var.kind == "xdot":
                (K.add if joins else K.discard)(var.index)
            elif var.kind == "u":
                (J.discard if joins else J.add)(var.index)
            else:
                raise ValueError(f"{var} is not a primal rates variable")
        return RatesBasis(frozenset(K), frozenset(J))

    def __str__(self) -> str:
        def fmt(s):
            return "{" + ",".join(str(i + 1) for i in sorted(s)) + "}"

        return f"({fmt(self.Kset)},{fmt(self.Jset)})"


@dataclass(frozen=True)
class RatesSolution:
    u: RatVector
    xdot: RatVector
    p: RatVector
    qdot: RatVector


@functools.lru_cache(maxsize=4096)
def rates_for_basis(data: ProblemData, basis: RatesBasis) -> RatesSolution:
    """Basic solutions of ``A u + xdot = b`` and ``A^T p - qdot = c``."""
    K, J = data.K, data.J
    basis.check(K, J)
    A = data.A
    ucols = [j for j in range(J) if j not in basis.Jset]
    xcols = sorted(basis.Kset)
    cols = [list(A.col(j)) for j in ucols]
    cols += [[Fraction(int(i == k)) for i in range(K)] for k in xcols]
    sol = solve_linear(RatMatrix.from_columns(cols), data.b) if K else RatVector()
    uu = [Fraction(0)] * J
    xd = [Fraction(0)] * K
    for pos, j in enumerate(ucols):
        uu[j] = sol[pos]
    for pos, k in enumerate(xcols):
        xd[k] = sol[len(ucols) + pos]

    pcols = [k for k in range(K) if k not in basis.Kset]
    qcols = sorted(basis.Jset)
    cols = [list(A.row(k)) for k in pcols]
    cols += [[Fraction(-int(i == j)) for i in range(J)] for j in qcols]
    sol = solve_linear(RatMatrix.from_columns(cols), data.c) if J else RatVector()
    pp = [Fraction(0)] * K
    qd = [Fraction(0)] * J
    for pos, k in enumerate(pcols):
        pp[k] = sol[pos]
    for pos, j in enumerate(qcols):
        qd[j] = sol[len(pcols) + pos]
    return RatesSolution(RatVector(uu), RatVector(xd), RatVector(pp), RatVector(qd))


def is_admissible(sol: RatesSolution) -> bool:
    return all(v >= 0 for v in sol.u) and all(v >= 0 for v in sol.p)


def is_nondegenerate(basis: RatesBasis, sol: RatesSolution) -> bool:
    """Every basic value of the primal and the dual is nonzero."""
    K, J = len(sol.p), len(sol.u)
    values = dict(_values(sol))
    return all(values[v] != 0 for v in basis.primal_basic(J) | basis.dual_basic(K))


def _values(sol: RatesSolution) -> Iterator[tuple[VarId, Fraction]]:
    for j, v in enumerate(sol.u):
        yield u(j), v
    for k, v in enumerate(sol.xdot):
        yield xdot(k), v
    for k, v in enumerate(sol.p):
        yield p(k), v
    for j, v in enumerate(sol.qdot):
        yield qdot(j), v


def value_of(sol: RatesSolution, var: VarId) -> Fraction:
    return getattr(sol, var.kind)[var.index]


def rates_objective(data: ProblemData, sol: RatesSolution) -> Fraction:
    return data.c.dot(sol.u)


def adjacency(b1: RatesBasis, b2: RatesBasis) -> tuple[VarId, VarId]:
    """The (leaving, entering) primal pair taking ``b1`` to ``b2``."""
    leaving = [xdot(k) for k in b1.Kset - b2.Kset] + [u(j) for j in b2.Jset - b1.Jset]
    entering = [xdot(k) for k in b2.Kset - b1.Kset] + [u(j) for j in b1.Jset - b2.Jset]
    if len(leaving) != 1 or len(entering) != 1:
        raise NotAdjacent(f"{b1} and {b2} differ by {len(leaving)} leaving variables")
    return leaving[0], entering[0]


def is_adjacent(b1: RatesBasis, b2: RatesBasis) -> bool:
    try:
        adjacency(b1, b2)
    except NotAdjacent:
        return False
    return True


def neighbours(basis: RatesBasis, K: int, J: int) -> Iterator[RatesBasis]:
    """All bases one primal exchange away, in a fixed order."""
    basic = sorted(basis.primal_basic(J))
    nonbasic = sorted(({xdot(k) for k in range(K)} | {u(j) for j in range(J)}) - set(basic))
    for leaving in basic:
        for entering in nonbasic:
            yield basis.swap(leaving, entering)


@functools.lru_cache(maxsize=256)
def admissible_bases(data: ProblemData) -> tuple[RatesBasis, ...]:
    """Every nonsingular admissible basis, in a fixed order (desk scale only)."""
    K, J = data.K, data.J
    found = []
    for nk in range(K + 1):
        for Kset in combinations(range(K), nk):
            njs = J - K + nk
            if not 0 <= njs <= J:
                continue
            for Jset in combinations(range(J), njs):
                b = RatesBasis.of(Kset, Jset)
                try:
                    sol = rates_for_basis(data, b)
                except SingularError:
                    continue
                if is_admissible(sol):
                    found.append(b)
    return tuple(found)
