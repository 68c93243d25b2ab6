"""Exact rational scalars, dense rational matrices and fraction-free solves.

Every number in the solver is a :class:`fractions.Fraction`.  Fractions are
always stored in lowest terms with a positive denominator, which is the
canonical form the rest of the package relies on for equality tests.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Iterator, Sequence, Union

Rational = Fraction
Number = Union[int, Fraction, str]

ZERO = Fraction(0)
ONE = Fraction(1)


class SingularError(ArithmeticError):
    """Raised when a square system has no unique solution."""

    def __init__(self, rank: int, size: int):
        super().__init__(f"singular matrix: rank {rank} < {size}")
        self.rank = rank
        self.size = size


def rat(value: Number) -> Fraction:
    """Coerce an int, Fraction or ``"p/q"`` string to a Fraction.

    Floats are rejected on purpose: a float has already been rounded.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            n, d = int(num), int(den)
            if d == 0:
                raise ZeroDivisionError(f"zero denominator in {value!r}")
            return Fraction(n, d)
        return Fraction(int(text))
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def fmt(value: Fraction) -> str:
    """Serialize as ``"p/q"``, or ``"p"`` when the value is an integer."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


class RatVector(Sequence[Fraction]):
    """Immutable vector of rationals with elementwise arithmetic."""

    __slots__ = ("_data",)

    def __init__(self, values: Iterable[Number] = ()):
        self._data = tuple(rat(v) for v in values)

    @classmethod
    def zeros(cls, n: int) -> "RatVector":
        return cls([ZERO] * n)

    def __len__(self) -> int:
        return len(self._data)

    def __getitem__(self, i):  # type: ignore[override]
        if isinstance(i, slice):
            return RatVector(self._data[i])
        if not -len(self._data) <= i < len(self._data):
            raise IndexError(f"index {i} out of range for length {len(self._data)}")
        return self._data[i]

    def __iter__(self) -> Iterator[Fraction]:
        return iter(self._data)

    def __eq__(self, other) -> bool:
        if isinstance(other, RatVector):
            return self._data == other._data
        if isinstance(other, (tuple, list)):
            return len(other) == len(self._data) and all(a == b for a, b in zip(self._data, other))
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        return "RatVector([" + ", ".join(fmt(v) for v in self._data) + "])"

    def _check(self, other: "RatVector") -> None:
        if len(other) != len(self):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")

    def __add__(self, other: "RatVector") -> "RatVector":
        self._check(other)
        return RatVector(a + b for a, b in zip(self._data, other))

    def __sub__(self, other: "RatVector") -> "RatVector":
        self._check(other)
        return RatVector(a - b for a, b in zip(self._data, other))

    def __neg__(self) -> "RatVector":
        return RatVector(-a for a in self._data)

    def __mul__(self, scalar: Number) -> "RatVector":
        s = rat(scalar)
        return RatVector(a * s for a in self._data)

    __rmul__ = __mul__

    def dot(self, other: Iterable[Number]) -> Fraction:
        other = list(other)
        if len(other) != len(self._data):
            raise ValueError(f"length mismatch: {len(self)} vs {len(other)}")
        return sum((a * rat(b) for a, b in zip(self._data, other)), ZERO)

    def tuple(self) -> tuple[Fraction, ...]:
        return self._data


class RatMatrix:
    """Immutable dense row-major matrix of rationals."""

    __slots__ = ("rows", "cols", "_data")

    def __init__(self, rows: Iterable[Iterable[Number]]):
        data = tuple(tuple(rat(v) for v in row) for row in rows)
        if not data or not data[0]:
            raise ValueError("matrix must have at least one row and one column")
        width = len(data[0])
        if any(len(r) != width for r in data):
            raise ValueError("ragged rows")
        self.rows = len(data)
        self.cols = width
        self._data = data

    @classmethod
    def identity(cls, n: int) -> "RatMatrix":
        return cls([[ONE if i == j else ZERO for j in range(n)] for i in range(n)])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "RatMatrix":
        return cls([[ZERO] * cols for _ in range(rows)])

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[Number]]) -> "RatMatrix":
        return cls(zip(*columns))

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            raise IndexError(f"entry ({i}, {j}) outside {self.rows}x{self.cols}")
        return self._data[i][j]

    def __eq__(self, other) -> bool:
        if isinstance(other, RatMatrix):
            return self._data == other._data
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self._data)

    def __repr__(self) -> str:
        body = "; ".join(" ".join(fmt(v) for v in row) for row in self._data)
        return f"RatMatrix([{body}])"

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def row(self, i: int) -> RatVector:
        if not 0 <= i < self.rows:
            raise IndexError(f"row {i} outside {self.rows}")
        return RatVector(self._data[i])

    def col(self, j: int) -> RatVector:
        if not 0 <= j < self.cols:
            raise IndexError(f"column {j} outside {self.cols}")
        return RatVector(r[j] for r in self._data)

    def to_lists(self) -> list[list[Fraction]]:
        return [list(r) for r in self._data]

    def transpose(self) -> "RatMatrix":
        return RatMatrix(zip(*self._data))

    @property
    def T(self) -> "RatMatrix":
        return self.transpose()

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "RatMatrix":
        return RatMatrix([[self[i, j] for j in cols] for i in rows])

    def __mul__(self, scalar: Number) -> "RatMatrix":
        s = rat(scalar)
        return RatMatrix([[v * s for v in r] for r in self._data])

    __rmul__ = __mul__

    def __add__(self, other: "RatMatrix") -> "RatMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        return RatMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self._data, other._data)])

    def __sub__(self, other: "RatMatrix") -> "RatMatrix":
        return self + other * -1

    def __neg__(self) -> "RatMatrix":
        return self * -1

    def __matmul__(self, other):
        if isinstance(other, RatMatrix):
            if self.cols != other.rows:
                raise ValueError("shape mismatch")
            cols = list(zip(*other._data))
            return RatMatrix([[sum((a * b for a, b in zip(r, c)), ZERO) for c in cols] for r in self._data])
        vec = list(other)
        if len(vec) != self.cols:
            raise ValueError(f"vector length {len(vec)} != {self.cols} columns")
        return RatVector(sum((a * rat(b) for a, b in zip(r, vec)), ZERO) for r in self._data)


def _integer_row(coeffs: dict[int, Fraction]) -> dict[int, int]:
    """Scale a sparse rational row to a primitive integer row."""
    if not coeffs:
        return {}
    den = 1
    for v in coeffs.values():
        den = den * v.denominator // math.gcd(den, v.denominator)
    ints = {j: int(v * den) for j, v in coeffs.items()}
    g = math.gcd(*ints.values())
    return {j: v // g for j, v in ints.items()} if g > 1 else ints


def _primitive(row: dict[int, int]) -> dict[int, int]:
    g = math.gcd(*row.values()) if row else 1
    if g > 1:
        return {j: v // g for j, v in row.items()}
    return row


def _eliminate(rows: list[dict[int, int]], ncols: int) -> tuple[list[tuple[int, dict[int, int]]], int]:
    """Fraction-free forward elimination over sparse integer rows.

    Each update ``row <- p*row - a*pivot_row`` stays in the integers and the
    row content is divided out afterwards, which keeps entry growth bounded
    by the size of the minors involved.  Pivots are chosen per column by the
    sparsest candidate row to limit fill-in.  Returns the echelon rows as
    ``(pivot column, row)`` pairs and the rank over the first ``ncols``
    columns.
    """
    active = [r for r in rows if r]
    echelon: list[tuple[int, dict[int, int]]] = []
    for col in range(ncols):
        best = None
        for idx, r in enumerate(active):
            if r.get(col):
                if best is None or len(r) < len(active[best]):
                    best = idx
        if best is None:
            continue
        prow = active.pop(best)
        p = prow[col]
        nxt = []
        for r in active:
            a = r.get(col)
            if a:
                new = {j: p * v for j, v in r.items()}
                for j, v in prow.items():
                    w = new.get(j, 0) - a * v
                    if w:
                        new[j] = w
                    else:
                        new.pop(j, None)
                new.pop(col, None)
                r = _primitive(new)
            if r:
                nxt.append(r)
        active = nxt
        echelon.append((col, prow))
    return echelon, len(echelon)


def solve_many(M: RatMatrix, rhs: Sequence[Sequence[Number]]) -> list[RatVector]:
    """Solve ``M h = r`` exactly for every right-hand side in ``rhs``.

    Raises :class:`SingularError` carrying the rank when ``M`` is singular.
    """
    n = M.rows
    if M.cols != n:
        raise ValueError(f"matrix is {M.rows}x{M.cols}, expected square")
    k = len(rhs)
    for r in rhs:
        if len(r) != n:
            raise ValueError(f"right-hand side length {len(r)} != {n}")
    rows = []
    for i in range(n):
        coeffs = {j: M[i, j] for j in range(n) if M[i, j]}
        for t, r in enumerate(rhs):
            v = rat(r[i])
            if v:
                coeffs[n + t] = v
        rows.append(_integer_row(coeffs))
    echelon, rank = _eliminate(rows, n)
    if rank < n:
        raise SingularError(rank, n)
    solutions = [[ZERO] * n for _ in range(k)]
    for col, row in reversed(echelon):
        p = row[col]
        for t in range(k):
            acc = Fraction(row.get(n + t, 0))
            for j, v in row.items():
                if j != col and j < n:
                    acc -= v * solutions[t][j]
            solutions[t][col] = acc / p
    return [RatVector(s) for s in solutions]


def solve_linear(M: RatMatrix, r: Sequence[Number]) -> RatVector:
    """Return the exact solution of ``M h = r`` or raise :class:`SingularError`."""
    return solve_many(M, [r])[0]


def rank(M: RatMatrix) -> int:
    rows = [_integer_row({j: M[i, j] for j in range(M.cols) if M[i, j]}) for i in range(M.rows)]
    return _eliminate(rows, M.cols)[1]


def is_nonsingular(M: RatMatrix) -> bool:
    if M.rows != M.cols:
        raise ValueError("is_nonsingular needs a square matrix")
    return rank(M) == M.rows


def determinant(M: RatMatrix) -> Fraction:
    """Dense Bareiss determinant; used by tests as an independent check."""
    n = M.rows
    if M.cols != n:
        raise ValueError("determinant needs a square matrix")
    den = 1
    for i in range(n):
        for j in range(n):
            den = den * M[i, j].denominator // math.gcd(den, M[i, j].denominator)
    a = [[int(M[i, j] * den) for j in range(n)] for i in range(n)]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return ZERO
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return Fraction(sign * a[n - 1][n - 1], den**n)
