"""Exact two-phase simplex with Bland's rule.

Variables carry a sign class: fixed at zero (``Z``), nonnegative (``P``) or
unrestricted (``U``).  Unrestricted variables enter the basis like any other
column (with a sign flip when they improve by decreasing) and are never
chosen to leave, so no variable splitting is needed.

The tableau keeps every row as integer numerators over one positive row
denominator.  Pivots stay in the integers and only touch rows with a
nonzero entry in the pivot column.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact import Number, RatMatrix, RatVector, SingularError, rat, solve_linear


class SignClass(enum.Enum):
    Z = "Z"
    P = "P"
    U = "U"


class Relation(enum.Enum):
    LE = "<="
    EQ = "="
    GE = ">="


class Sense(enum.Enum):
    MAX = "max"
    MIN = "min"


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpInstance:
    objective: tuple[Fraction, ...]
    matrix: tuple[tuple[Fraction, ...], ...]
    rhs: tuple[Fraction, ...]
    relations: tuple[Relation, ...]
    classes: tuple[SignClass, ...]
    sense: Sense = Sense.MAX

    def __post_init__(self):
        n = len(self.objective)
        if len(self.classes) != n:
            raise ValueError("one sign class per variable")
        if len(self.rhs) != len(self.matrix) or len(self.relations) != len(self.matrix):
            raise ValueError("one rhs entry and one relation per row")
        if any(len(row) != n for row in self.matrix):
            raise ValueError("every row needs one coefficient per variable")

    @classmethod
    def build(
        cls,
        objective: Sequence[Number],
        matrix: Sequence[Sequence[Number]] | RatMatrix,
        rhs: Sequence[Number],
        relations: Sequence[Relation | str],
        classes: Sequence[SignClass | str] | None = None,
        sense: Sense | str = Sense.MAX,
    ) -> "LpInstance":
        rows = matrix.to_lists() if isinstance(matrix, RatMatrix) else matrix
        n = len(objective)
        return cls(
            objective=tuple(rat(v) for v in objective),
            matrix=tuple(tuple(rat(v) for v in row) for row in rows),
            rhs=tuple(rat(v) for v in rhs),
            relations=tuple(Relation(r) for r in relations),
            classes=tuple(SignClass(c) for c in (classes or [SignClass.P] * n)),
            sense=Sense(sense),
        )

    @property
    def n_vars(self) -> int:
        return len(self.objective)

    @property
    def n_rows(self) -> int:
        return len(self.matrix)


@dataclass(frozen=True)
class LpOutcome:
    """Result of :func:`solve_lp`.

    ``dual`` holds one multiplier per row with ``objective == dual . rhs``
    at an optimum.  For an infeasible instance ``dual`` is the phase-one
    multiplier vector (a Farkas certificate) and ``basis`` the phase-one
    basis.
    """

    status: Status
    basis: tuple[int, ...]
    primal: tuple[Fraction, ...]
    dual: tuple[Fraction, ...]
    objective: Fraction | None


class _Tableau:
    def __init__(self, rows: list[list[int]], dens: list[int], basis: list[int]):
        self.rows = rows
        self.dens = dens
        self.basis = basis

    @staticmethod
    def _reduce(nums: list[int], den: int) -> tuple[list[int], int]:
        g = math.gcd(den, *nums)
        if g > 1:
            return [v // g for v in nums], den // g
        return nums, den

    def pivot(self, r: int, s: int, obj: list[list[int] | int]) -> None:
        prow = self.rows[r]
        ps = prow[s]
        if ps < 0:
            prow = [-v for v in prow]
            ps = -ps
        self.rows[r], self.dens[r] = self._reduce(prow, ps)
        prow = self.rows[r]
        ps = prow[s]
        for i, row in enumerate(self.rows):
            if i == r or not row[s]:
                continue
            a = row[s]
            d = self.dens[i]
            nums = [v * ps - a * w for v, w in zip(row, prow)]
            self.rows[i], self.dens[i] = self._reduce(nums, d * ps)
        for k, (row, d) in enumerate(obj):
            a = row[s]
            if a:
                nums = [v * ps - a * w for v, w in zip(row, prow)]
                obj[k] = list(self._reduce(nums, d * ps))
        self.basis[r] = s


def _scaled(values: Sequence[Fraction]) -> tuple[list[int], int]:
    den = 1
    for v in values:
        den = den * v.denominator // math.gcd(den, v.denominator)
    return [int(v * den) for v in values], den


def solve_lp(inst: LpInstance) -> LpOutcome:
    """Solve ``inst`` exactly; Bland's rule guarantees termination."""
    n, m = inst.n_vars, inst.n_rows
    sign_obj = 1 if inst.sense is Sense.MAX else -1

    live = [j for j in range(n) if inst.classes[j] is not SignClass.Z]
    slack_of = {}
    for i, rel in enumerate(inst.relations):
        if rel is not Relation.EQ:
            slack_of[i] = len(live) + len(slack_of)
    n_struct = len(live) + len(slack_of)
    n_cols = n_struct + m
    free = [inst.classes[j] is SignClass.U for j in live] + [False] * (len(slack_of) + m)

    row_sign = []
    rows = []
    dens = []
    for i in range(m):
        vals = [inst.matrix[i][j] for j in live] + [Fraction(0)] * (len(slack_of) + m + 1)
        if i in slack_of:
            vals[slack_of[i]] = Fraction(1 if inst.relations[i] is Relation.LE else -1)
        vals[n_cols] = inst.rhs[i]
        s = -1 if inst.rhs[i] < 0 else 1
        row_sign.append(s)
        vals = [v * s for v in vals]
        vals[n_struct + i] = Fraction(1)
        nums, den = _scaled(vals)
        rows.append(nums)
        dens.append(den)
    tab = _Tableau(rows, dens, [n_struct + i for i in range(m)])
    flipped = [False] * n_cols
    alive = [True] * m

    def objective_row(costs: list[Fraction]) -> list:
        """Reduced-cost row ``c_j - c_B B^-1 a_j`` with ``-z`` in the rhs slot."""
        vals = list(costs) + [Fraction(0)]
        for i in range(m):
            if not alive[i]:
                continue
            cb = costs[tab.basis[i]]
            if cb:
                for j in range(n_cols + 1):
                    e = tab.rows[i][j]
                    if e:
                        vals[j] -= cb * Fraction(e, tab.dens[i])
        nums, den = _scaled(vals)
        return [nums, den]

    def run(obj: list, allowed: list[bool]) -> bool:
        """Iterate until optimal (True) or unbounded (False)."""
        while True:
            enter = None
            in_basis = set(tab.basis)
            for j in range(n_cols):
                if not allowed[j] or j in in_basis:
                    continue
                d = obj[0][0][j]
                if d > 0:
                    enter = j
                    break
                if d < 0 and free[j]:
                    for row in tab.rows:
                        row[j] = -row[j]
                    obj[0][0][j] = -d
                    flipped[j] = not flipped[j]
                    enter = j
                    break
            if enter is None:
                return True
            leave = None
            best = None
            for i in range(m):
                if not alive[i]:
                    continue
                a = tab.rows[i][enter]
                if a <= 0 or free[tab.basis[i]]:
                    continue
                ratio = Fraction(tab.rows[i][n_cols], a)
                if best is None or ratio < best or (ratio == best and tab.basis[i] < tab.basis[leave]):
                    best, leave = ratio, i
            if leave is None:
                return False
            tab.pivot(leave, enter, obj)

    # phase one: maximize minus the sum of artificials
    phase1_cost = [Fraction(0)] * n_struct + [Fraction(-1)] * m
    obj = [objective_row(phase1_cost)]
    allowed = [True] * n_struct + [False] * m
    run(obj, allowed)
    infeasibility = Fraction(obj[0][0][n_cols], obj[0][1])
    if infeasibility != 0:
        farkas = tuple(
            row_sign[i] * Fraction(obj[0][0][n_struct + i], obj[0][1]) for i in range(m)
        )
        return LpOutcome(Status.INFEASIBLE, tuple(tab.basis), (), farkas, None)

    # drive artificials out of the basis or drop redundant rows
    for i in range(m):
        if tab.basis[i] >= n_struct:
            col = next((j for j in range(n_struct) if tab.rows[i][j]), None)
            if col is None:
                alive[i] = False
            else:
                tab.pivot(i, col, obj)

    costs = [sign_obj * inst.objective[j] for j in live] + [Fraction(0)] * (len(slack_of) + m)
    for j in range(n_cols):
        if flipped[j]:
            costs[j] = -costs[j]
    obj = [objective_row(costs)]
    bounded = run(obj, allowed)

    values = [Fraction(0)] * n_cols
    for i in range(m):
        if alive[i]:
            values[tab.basis[i]] = Fraction(tab.rows[i][n_cols], tab.dens[i])
    for j in range(n_cols):
        if flipped[j]:
            values[j] = -values[j]
    primal = [Fraction(0)] * n
    for pos, j in enumerate(live):
        primal[j] = values[pos]
    basis = tuple(sorted(_original_index(tab.basis[i], live, slack_of, n) for i in range(m) if alive[i]))
    if not bounded:
        return LpOutcome(Status.UNBOUNDED, basis, tuple(primal), (), None)
    # reduced cost of artificial i equals minus the dual of transformed row i
    dual = []
    for i in range(m):
        y = -Fraction(obj[0][0][n_struct + i], obj[0][1]) if alive[i] else Fraction(0)
        dual.append(sign_obj * row_sign[i] * y)
    objective = sum((c * x for c, x in zip(inst.objective, primal)), Fraction(0))
    return LpOutcome(Status.OPTIMAL, basis, tuple(primal), tuple(dual), objective)


def _original_index(col: int, live: list[int], slack_of: dict[int, int], n: int) -> int:
    if col < len(live):
        return live[col]
    for row, pos in slack_of.items():
        if pos == col:
            return n + row
    raise AssertionError("artificial left in basis")


@dataclass(frozen=True)
class BasicSolution:
    primal: RatVector
    slacks: RatVector
    dual: RatVector


def solve_for_basis(inst: LpInstance, basis: Sequence[int]) -> BasicSolution:
    """Basic solution for a prescribed basis; no sign checks are made.

    Basis indices below ``n_vars`` name structural variables; index
    ``n_vars + i`` names the slack of inequality row ``i``.
    """
    n, m = inst.n_vars, inst.n_rows
    basis = list(basis)
    if len(basis) != m or len(set(basis)) != m:
        raise ValueError(f"basis needs {m} distinct indices, got {basis}")

    def column(idx: int) -> list[Fraction]:
        if idx < n:
            return [inst.matrix[i][idx] for i in range(m)]
        row = idx - n
        if not 0 <= row < m or inst.relations[row] is Relation.EQ:
            raise ValueError(f"index {idx} is not a slack column")
        sign = 1 if inst.relations[row] is Relation.LE else -1
        return [Fraction(sign if i == row else 0) for i in range(m)]

    B = RatMatrix.from_columns([column(j) for j in basis])
    xb = solve_linear(B, inst.rhs)
    cb = [inst.objective[j] if j < n else Fraction(0) for j in basis]
    y = solve_linear(B.transpose(), cb)
    primal = [Fraction(0)] * n
    slacks = [Fraction(0)] * m
    for j, v in zip(basis, xb):
        if j < n:
            primal[j] = v
        else:
            slacks[j - n] = v
    return BasicSolution(RatVector(primal), RatVector(slacks), y)


__all__ = [
    "SignClass",
    "Relation",
    "Sense",
    "Status",
    "LpInstance",
    "LpOutcome",
    "BasicSolution",
    "solve_lp",
    "solve_for_basis",
    "SingularError",
]
