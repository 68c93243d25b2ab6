"""Collision classification and the pivots between neighbouring validity regions.

A collision happens at the end of a parametric step: a set of components
of H_P reaches zero together.  Collisions of kinds A, B and C are resolved
by an internal pivot that edits the chain of rates bases.  Kinds D, E and F
need a boundary pivot: one simplex step in the boundary dictionary, a
static LP over the impulse and boundary-state variables, followed where
needed by an insertion of new bases next to a boundary.

Every candidate sequence produced here is checked by solving its structure
system at the collision point and confirming that it stays valid a little
further along the line; anything that fails that check raises NeedsRestart.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .exact import RatMatrix, RatVector, SingularError, solve_many
from .model import BoundaryParams, ProblemData
from .rates import RatesBasis, VarId, admissible_bases, is_adjacent
from .structural import (
    BaseSequence,
    Comp,
    Decomposition,
    ForwardCheck,
    Layout,
    SolutionH,
    StructureSystem,
    certify_forward,
    decompose,
    zero_components,
)

PRIMAL_KINDS = ("xb", "xN", "u0", "uN")
DUAL_KINDS = ("q0", "pN", "qb", "p0")
_PARTNER = {"u0": "q0", "q0": "u0", "xN": "pN", "pN": "xN", "xb": "p0", "p0": "xb", "uN": "qb", "qb": "uN"}
# boundary component of H -> dictionary variable that carries it
_BOUNDARY_VAR = {"u0": "u0", "uN": "uN", "xN": "xN", "x0": "xb", "pN": "pN", "p0": "p0", "q0": "q0", "qN": "qb"}
_ORDER = {kind: i for i, kind in enumerate(PRIMAL_KINDS + DUAL_KINDS)}


def partner(v: VarId) -> VarId:
    """The complementary variable on the other side of the boundary dictionary."""
    return VarId(_PARTNER[v.kind], v.index)


def is_primal(v: VarId) -> bool:
    return v.kind in PRIMAL_KINDS


def _key(v: VarId) -> tuple[int, int]:
    return _ORDER[v.kind], v.index


class Kind(str, enum.Enum):
    A = "A"
    B = "B"
    C = "C"
    D = "D"
    E = "E"
    F = "F"
    MULTIPLE_PRE = "MultiplePre"
    MULTIPLE_AT = "MultipleAt"
    MULTIPLE_POST = "MultiplePost"


class NeedsRestart(Exception):
    """The pivot rules cannot be applied at this point; the caller should restart."""

    def __init__(self, reason: str, detail: str = ""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


class MultiplePre(NeedsRestart):
    def __init__(self, detail: str = ""):
        super().__init__("multiple collision", detail)


class MultipleAt(NeedsRestart):
    def __init__(self, detail: str = ""):
        super().__init__("tied ratio test", detail)


class MultiplePost(NeedsRestart):
    def __init__(self, detail: str = ""):
        super().__init__("non-unique minimum after pivot", detail)


class SubproblemRequired(NeedsRestart):
    def __init__(self, detail: str = ""):
        super().__init__("insertion needs a longer chain", detail)


class CountingViolation(NeedsRestart):
    def __init__(self, detail: str = ""):
        super().__init__("boundary basis count", detail)


# ---------------------------------------------------------------- collisions


@dataclass(frozen=True)
class Collision:
    """What shrinks at a collision.

    ``span`` is the 1-based range of shrinking intervals (kinds B, C, D, F),
    ``free_var`` the state that stops touching zero (kind D) as
    ``VarId("x", k)`` or ``VarId("q", j)``.
    """

    kind: Kind
    shrinking: frozenset[Comp]
    span: tuple[int, int] | None = None
    free_var: VarId | None = None
    note: str = ""

    def describe(self) -> str:
        return ", ".join(str(c) for c in sorted(self.shrinking))


def _tied(seq: BaseSequence, hz: Iterable[Comp]) -> tuple[frozenset[int], frozenset[int]]:
    hz = set(hz)
    N = seq.N
    K_tied = frozenset(k for k in seq.K0 if any(Comp("x", n, k) in hz for n in range(1, N + 1)))
    J_tied = frozenset(j for j in seq.JN1 if any(Comp("q", n, j) in hz for n in range(N)))
    return K_tied, J_tied


def without_span(seq: BaseSequence, span: tuple[int, int]) -> BaseSequence:
    n1, n2 = span
    return seq.with_bases(seq.bases[: n1 - 1] + seq.bases[n2:])


def _becoming_free(system: StructureSystem, inter: BaseSequence) -> list[VarId]:
    lay = system.layout
    K_v, J_v = _tied(system.seq, system.hz)
    K_i, J_i = _tied(inter, zero_components(inter, Layout(lay.K, lay.J, inter.N)))
    return [VarId("x", k) for k in sorted(K_v - K_i)] + [VarId("q", j) for j in sorted(J_v - J_i)]


def _follows_span(system: StructureSystem, span: tuple[int, int], c: Comp) -> bool:
    """True when ``c`` is a state inside the collapsing block that is pinned to zero next door.

    All breakpoints n1-1..n2 merge at the collision, so a state that is
    forced to zero at one of them reaches zero at the others too; it
    shrinks only because the intervals do.
    """
    lay, hz = system.layout, system.hz
    n1, n2 = span
    if c.block in ("x", "x0"):
        n = c.n if c.block == "x" else 0
        states = [lay.x_state(m, c.index) for m in range(n1 - 1, n2 + 1)]
    elif c.block in ("q", "qN"):
        n = c.n if c.block == "q" else lay.N
        states = [lay.q_state(m, c.index) for m in range(n1 - 1, n2 + 1)]
    else:
        return False
    return n1 - 1 <= n <= n2 and any(state in hz for state in states)


def classify_collision(system: StructureSystem, H: SolutionH, shrinking: Iterable[Comp]) -> Collision:
    """Sort a set of simultaneously vanishing components into a collision kind."""
    shrinking = frozenset(shrinking)
    seq, hz = system.seq, system.hz
    N, J = seq.N, system.layout.J
    K_tied, J_tied = _tied(seq, hz)
    taus = sorted(c.n for c in shrinking if c.block == "tau")
    others = sorted(c for c in shrinking if c.block != "tau")

    def multiple(why: str) -> Collision:
        return Collision(Kind.MULTIPLE_PRE, shrinking, note=why)

    if not shrinking:
        return multiple("nothing shrinks")
    if not taus:
        if len(others) != 1:
            return multiple("several components")
        c = others[0]
        if c.block in ("x", "q"):
            return Collision(Kind.A, shrinking)
        if c.block == "x0" and c.index in K_tied and system.rates[0].xdot[c.index] < 0:
            return multiple("tied initial state without its intervals")
        if c.block == "qN" and c.index in J_tied and system.rates[-1].qdot[c.index] < 0:
            return multiple("tied final dual state without its intervals")
        return Collision(Kind.E, shrinking)

    n1, n2 = taus[0], taus[-1]
    if taus != list(range(n1, n2 + 1)):
        return multiple("intervals not consecutive")
    span = (n1, n2)
    joint = [c for c in others if c.block in ("x0", "qN")]
    rest = [c for c in others if not _follows_span(system, span, c)]
    if len(joint) == 1 and not [c for c in rest if c not in joint]:
        c = joint[0]
        if c.block == "x0" and n1 == 1 and c.index in K_tied and system.rates[0].xdot[c.index] < 0:
            first = min(n for n in range(1, N + 1) if Comp("x", n, c.index) in hz)
            if first == n2:
                return Collision(Kind.F, shrinking, span)
        if c.block == "qN" and n2 == N and c.index in J_tied and system.rates[-1].qdot[c.index] < 0:
            last = max(n for n in range(N) if Comp("q", n, c.index) in hz)
            if last == n1 - 1:
                return Collision(Kind.F, shrinking, span)
    if rest:
        return multiple("state and intervals")
    if n1 == 1 and n2 == N:
        return multiple("every interval")
    if 1 < n1 and n2 < N:
        left, right = seq.bases[n1 - 2], seq.bases[n2]
        diff = len(left.primal_basic(J) - right.primal_basic(J))
        if diff == 2:
            return Collision(Kind.B, shrinking, span)
        if diff != 1:
            return multiple("neighbours too far apart")
    inter = without_span(seq, span)
    free = _becoming_free(system, inter)
    if not free:
        return Collision(Kind.C, shrinking, span)
    if len(free) == 1:
        return Collision(Kind.D, shrinking, span, free[0])
    return multiple("several states become free")


# ---------------------------------------------------------- base insertion


def _chains(data: ProblemData, left: RatesBasis | None, right: RatesBasis | None,
            K0: frozenset[int], JN1: frozenset[int], max_len: int) -> Iterator[tuple[RatesBasis, ...]]:
    """Admissible adjacent chains fitting between ``left`` and ``right``, shortest first.

    A missing neighbour means the chain touches a boundary, where the first
    basis must contain K0 (or the last must contain JN1).
    """
    pool = admissible_bases(data)
    first = [b for b in pool if (is_adjacent(left, b) if left is not None else K0 <= b.Kset)]
    first = [b for b in first if b != right]

    def closes(b: RatesBasis) -> bool:
        return is_adjacent(b, right) if right is not None else JN1 <= b.Jset

    frontier = [(b,) for b in first]
    for _ in range(max_len):
        for chain in frontier:
            if closes(chain[-1]):
                yield chain
        frontier = [
            chain + (b,)
            for chain in frontier
            for b in pool
            if b not in chain and b != left and b != right and is_adjacent(chain[-1], b)
        ]


def insert_bases(data: ProblemData, seq: BaseSequence, pos: int, rho: BoundaryParams,
                 drho: BoundaryParams, max_len: int = 3) -> tuple[BaseSequence, ForwardCheck]:
    """Insert the chain of bases after position ``pos`` that is valid past ``rho``.

    ``pos`` counts the bases kept before the insertion point (0 means in
    front of the first basis).  Raises SubproblemRequired when no chain of
    at most ``max_len`` bases certifies.
    """
    bases = seq.bases
    left = bases[pos - 1] if pos >= 1 else None
    right = bases[pos] if pos < len(bases) else None
    for chain in _chains(data, left, right, seq.K0, seq.JN1, max_len):
        candidate = seq.with_bases(bases[:pos] + chain + bases[pos:])
        check = certify_forward(data, candidate, rho, drho)
        if check is not None:
            return candidate, check
    raise SubproblemRequired(f"no chain of up to {max_len} bases after position {pos} in {seq}")


def _certified(data, seq, rho, drho, what: str) -> ForwardCheck:
    check = certify_forward(data, seq, rho, drho)
    if check is None:
        raise NeedsRestart("certification", f"{what} gave {seq}, which is not valid past the collision")
    return check


# ------------------------------------------------------- boundary dictionary


@dataclass(frozen=True)
class BoundaryDictionary:
    """Simplex dictionary of the boundary LP and its dual at a collision.

    ``rows`` are the primal basic variables and ``cols`` the dual basic
    variables; column ``c`` of the table belongs to the primal nonbasic
    variable ``partner(c)``.  ``primal`` and ``dual`` hold the basic values.
    """

    rows: tuple[VarId, ...]
    cols: tuple[VarId, ...]
    table: dict[tuple[VarId, VarId], Fraction]
    primal: dict[VarId, Fraction]
    dual: dict[VarId, Fraction]
    x_tilde: RatVector
    q_tilde: RatVector

    def entry(self, row: VarId, col: VarId) -> Fraction:
        return self.table[row, col]

    def submatrix(self, rows: Sequence[VarId] | None = None, cols: Sequence[VarId] | None = None) -> RatMatrix:
        rows = self.rows if rows is None else rows
        cols = self.cols if cols is None else cols
        return RatMatrix([[self.table[r, c] for c in cols] for r in rows])

    @property
    def matrix(self) -> RatMatrix:
        return self.submatrix()


def _primal_column(data: ProblemData, v: VarId) -> list[Fraction]:
    A, K = data.A, data.K
    zero = [Fraction(0)] * K
    unit = [Fraction(int(i == v.index)) for i in range(K)]
    if v.kind == "u0":
        return list(A.col(v.index)) * 2
    if v.kind == "uN":
        return zero + list(A.col(v.index))
    if v.kind == "xb":
        return unit + zero
    if v.kind == "xN":
        return zero + unit
    raise ValueError(f"{v} is not a primal boundary variable")


def _dual_column(data: ProblemData, v: VarId, slack_sign: int = -1) -> list[Fraction]:
    """Column of the dual boundary system; ``slack_sign=+1`` gives the form used for the identity check."""
    A, J = data.A, data.J
    zero = [Fraction(0)] * J
    unit = [Fraction(slack_sign * int(i == v.index)) for i in range(J)]
    if v.kind == "pN":
        return list(A.row(v.index)) * 2
    if v.kind == "p0":
        return zero + list(A.row(v.index))
    if v.kind == "qb":
        return unit + zero
    if v.kind == "q0":
        return zero + unit
    raise ValueError(f"{v} is not a dual boundary variable")


def boundary_rhs(data: ProblemData, dec: Decomposition, rho: BoundaryParams) -> tuple[RatVector, RatVector]:
    """Right-hand sides of the primal and dual boundary systems."""
    A, T = data.A, rho.T
    primal = RatVector(list(rho.beta - dec.x_tilde) + list(rho.beta + data.b * T - A @ dec.U_tilde + rho.lam))
    dual = RatVector(list(rho.gamma + dec.q_tilde) + list(rho.gamma + data.c * T - A.T @ dec.P_tilde + rho.mu))
    return primal, dual


@dataclass(frozen=True)
class _Split:
    """Forced basic variables on each side plus the tied pairs still to place."""

    primal: frozenset[VarId]
    dual: frozenset[VarId]
    K_tied: tuple[int, ...]
    J_tied: tuple[int, ...]
    n_primal: int
    n_dual: int


def _split(data: ProblemData, seq: BaseSequence, dec: Decomposition, free_var: VarId | None,
           flip: bool = False) -> _Split:
    K, J = data.K, data.J
    primal = {VarId("xb", k) for k in dec.K_free}
    primal |= {VarId("u0", j) for j in range(J) if j not in seq.J0}
    primal |= {VarId("xN", k) for k in seq.KN1}
    primal |= {VarId("uN", j) for j in range(J) if j not in seq.JN1}
    dual = {VarId("qb", j) for j in dec.J_free}
    dual |= {VarId("pN", k) for k in range(K) if k not in seq.KN1}
    dual |= {VarId("q0", j) for j in seq.J0}
    dual |= {VarId("p0", k) for k in range(K) if k not in seq.K0}
    K_tied, J_tied = set(dec.K_tied), set(dec.J_tied)
    if len(primal) > 2 * K or len(dual) > 2 * J:
        raise CountingViolation(f"{len(primal)} forced primal and {len(dual)} forced dual basic variables")
    if free_var is not None:
        # the state that stops touching zero goes to whichever side has room
        # ``flip`` tries the other side first
        if free_var.kind == "x":
            K_tied.discard(free_var.index)
            if (len(dual) < 2 * J) != flip:
                dual.add(VarId("p0", free_var.index))
            else:
                primal.add(VarId("xb", free_var.index))
        else:
            J_tied.discard(free_var.index)
            if (len(primal) < 2 * K) != flip:
                primal.add(VarId("uN", free_var.index))
            else:
                dual.add(VarId("qb", free_var.index))
    n_primal, n_dual = 2 * K - len(primal), 2 * J - len(dual)
    if n_primal < 0 or n_dual < 0 or n_primal + n_dual != len(K_tied) + len(J_tied):
        raise CountingViolation(f"{n_primal} primal and {n_dual} dual slots for {len(K_tied) + len(J_tied)} tied pairs")
    return _Split(frozenset(primal), frozenset(dual), tuple(sorted(K_tied)), tuple(sorted(J_tied)), n_primal, n_dual)


def _choices(split: _Split) -> Iterator[frozenset[VarId]]:
    """Every allowed set of tied pairs placed on the primal side."""
    xs = [VarId("xb", k) for k in split.K_tied]
    us = [VarId("uN", j) for j in split.J_tied]
    if split.n_primal >= len(xs):
        for extra in itertools.combinations(us, split.n_primal - len(xs)):
            yield frozenset(xs) | frozenset(extra)
    else:
        for to_dual in itertools.combinations(xs, len(xs) - split.n_primal):
            yield frozenset(xs) - frozenset(to_dual)


def _wider_choices(split: _Split) -> Iterator[frozenset[VarId]]:
    """Placements mixing xb and uN on the primal side, for when every standard one is singular."""
    pairs = [VarId("xb", k) for k in split.K_tied] + [VarId("uN", j) for j in split.J_tied]
    standard = set(_choices(split))
    for combo in itertools.combinations(pairs, split.n_primal):
        if frozenset(combo) not in standard:
            yield frozenset(combo)


def dictionary_choices(data: ProblemData, system: StructureSystem, dec: Decomposition,
                       free_var: VarId | None = None) -> list[frozenset[VarId]]:
    """All placements of tied pairs that the counting rule allows; the first is the default."""
    return list(_choices(_split(data, system.seq, dec, free_var)))


def build_dictionary(data: ProblemData, system: StructureSystem, H: SolutionH, dec: Decomposition,
                     rho: BoundaryParams, free_var: VarId | None = None,
                     choice: frozenset[VarId] | None = None) -> BoundaryDictionary:
    """Boundary dictionary at the collision point ``rho``.

    ``choice`` names the tied pairs placed on the primal side (``xb_k`` or
    ``uN_j``).  By default the allowed placements are tried in
    lexicographic order and the first with a nonsingular basis is used.
    """
    split = _split(data, system.seq, dec, free_var)
    allowed = list(_choices(split))
    if choice is not None:
        if frozenset(choice) not in allowed:
            raise ValueError(f"placement {sorted(map(str, choice))} is not allowed here")
        return _dictionary(data, H, dec, split, frozenset(choice))
    last: Exception | None = None
    for option in allowed + list(_wider_choices(split)):
        try:
            return _dictionary(data, H, dec, split, option)
        except SingularBoundaryBasis as exc:
            last = exc
    if free_var is not None:
        # the freed state on the other side, when that side has room
        try:
            flipped = _split(data, system.seq, dec, free_var, flip=True)
        except CountingViolation:
            raise last from None
        for option in list(_choices(flipped)) + list(_wider_choices(flipped)):
            try:
                return _dictionary(data, H, dec, flipped, option)
            except SingularBoundaryBasis as exc:
                last = exc
    raise last


class SingularBoundaryBasis(NeedsRestart):
    def __init__(self, detail: str = ""):
        super().__init__("singular boundary basis", detail)


def _dictionary(data: ProblemData, H: SolutionH, dec: Decomposition, split: _Split,
                choice: frozenset[VarId]) -> BoundaryDictionary:
    K, J = data.K, data.J
    rows = set(split.primal) | set(choice)
    placed_dual = {VarId("p0", k) for k in split.K_tied if VarId("xb", k) not in choice}
    placed_dual |= {VarId("qb", j) for j in split.J_tied if VarId("uN", j) not in choice}
    cols = set(split.dual) | placed_dual
    rows_t = tuple(sorted(rows, key=_key))
    cols_t = tuple(sorted(cols, key=_key))
    if len(rows_t) != 2 * K or len(cols_t) != 2 * J or {partner(c) for c in cols_t} & rows:
        raise CountingViolation("basic sets do not partition the boundary pairs")

    B = RatMatrix.from_columns([_primal_column(data, v) for v in rows_t])
    nonbasic = [partner(c) for c in cols_t]
    try:
        solved = solve_many(B, [_primal_column(data, v) for v in nonbasic])
    except SingularError as exc:
        raise SingularBoundaryBasis(str(exc)) from exc
    table = {}
    for pos, c in enumerate(cols_t):
        for i, r in enumerate(rows_t):
            table[r, c] = solved[pos][i]

    def value(v: VarId) -> Fraction:
        if v.kind == "xb":
            return dec.x_bullet[v.index]
        if v.kind == "qb":
            return dec.q_bullet[v.index]
        return H[Comp(v.kind, 0, v.index)]

    return BoundaryDictionary(
        rows=rows_t,
        cols=cols_t,
        table=table,
        primal={v: value(v) for v in rows_t},
        dual={v: value(v) for v in cols_t},
        x_tilde=dec.x_tilde,
        q_tilde=dec.q_tilde,
    )


# ------------------------------------------------------------ boundary pivot


@dataclass(frozen=True)
class PivotOutcome:
    """One step of the boundary dictionary.

    ``pivot_type`` is ``"I"`` (no simplex step) or ``"II"``; ``primal`` and
    ``dual`` hold the values of all boundary variables afterwards, with
    nonbasic ones at zero.
    """

    pivot_type: str
    v: VarId | None
    w: VarId | None
    w_star: VarId | None
    ratio: Fraction | None
    primal: dict[VarId, Fraction]
    dual: dict[VarId, Fraction]
    v_prime: VarId | None


def _all_values(dic: BoundaryDictionary, K: int, J: int) -> tuple[dict, dict]:
    primal = {VarId(kind, i): Fraction(0) for kind in PRIMAL_KINDS for i in range(K if kind in ("xb", "xN") else J)}
    dual = {VarId(kind, i): Fraction(0) for kind in DUAL_KINDS for i in range(J if kind in ("qb", "q0") else K)}
    primal.update(dic.primal)
    dual.update(dic.dual)
    return primal, dual


def boundary_pivot(dic: BoundaryDictionary, v: VarId | None, kind: Kind, K: int, J: int) -> PivotOutcome:
    """Remove ``v`` from its basis by a type I or type II step."""
    primal, dual = _all_values(dic, K, J)

    def type_one(v_prime: VarId | None) -> PivotOutcome:
        return PivotOutcome("I", v, None, None, None, primal, dual, v_prime)

    if v is None:
        return type_one(None)
    on_side = dic.rows if is_primal(v) else dic.cols
    if v not in on_side:
        # already nonbasic: its partner is the variable that grows
        return type_one(None if kind is Kind.D else partner(v))

    if is_primal(v):
        line = {c: dic.table[v, c] for c in dic.cols}
        zero_hit = [c for c in dic.cols if dic.dual[c] == 0 and line[c] != 0]
        candidates = {c: dic.dual[c] / -line[c] for c in dic.cols if line[c] < 0}
    else:
        line = {r: dic.table[r, v] for r in dic.rows}
        zero_hit = [r for r in dic.rows if dic.primal[r] == 0 and line[r] != 0]
        candidates = {r: dic.primal[r] / line[r] for r in dic.rows if line[r] > 0}
    if zero_hit:
        return type_one(None if kind is Kind.D else partner(v))
    if not candidates:
        raise NeedsRestart("boundary ratio test", f"no blocking variable for {v}")
    ratio = min(candidates.values())
    winners = [z for z, r in candidates.items() if r == ratio]
    if len(winners) > 1:
        raise MultipleAt(f"ratio {ratio} attained by {', '.join(map(str, winners))}")
    if ratio <= 0:
        raise NeedsRestart("boundary ratio test", f"zero step for {v}")
    w_star = winners[0]
    w = partner(w_star)
    v_star = partner(v)
    if is_primal(v):
        for c in dic.cols:
            dual[c] += ratio * line[c]
    else:
        for r in dic.rows:
            primal[r] -= ratio * line[r]
    side_of_star = primal if is_primal(v_star) else dual
    side_of_star[w_star] = Fraction(0)
    side_of_star[v_star] = ratio
    if (w_star.kind == "xb" and dic.x_tilde[w_star.index] > 0) or (
        w_star.kind == "qb" and dic.q_tilde[w_star.index] > 0
    ):
        v_prime = None
    else:
        v_prime = w
    return PivotOutcome("II", v, w, w_star, ratio, primal, dual, v_prime)


def new_boundary_sets(outcome: PivotOutcome, dec: Decomposition, K: int, J: int):
    """(K0, J0) and (KN1, JN1) after the pivot: the positive values plus v'."""
    vp = outcome.v_prime
    P, D = outcome.primal, outcome.dual
    K0 = {k for k in range(K) if P[VarId("xb", k)] + dec.x_tilde[k] > 0 or vp == VarId("xb", k)}
    J0 = {j for j in range(J) if D[VarId("q0", j)] > 0 or vp == VarId("q0", j)}
    KN1 = {k for k in range(K) if P[VarId("xN", k)] > 0 or vp == VarId("xN", k)}
    JN1 = {j for j in range(J) if D[VarId("qb", j)] + dec.q_tilde[j] > 0 or vp == VarId("qb", j)}
    return (frozenset(K0), frozenset(J0)), (frozenset(KN1), frozenset(JN1))


# --------------------------------------------------------------- the pivot


@dataclass(frozen=True)
class PivotResult:
    seq: BaseSequence
    check: ForwardCheck
    v_kind: Kind
    w_kind: Kind
    pivot: str
    collision: Collision
    dictionary: BoundaryDictionary | None = None
    outcome: PivotOutcome | None = None


def _kept_before(span: tuple[int, int] | None, n: int) -> int:
    """How many of bases 1..n survive removing ``span``."""
    if span is None:
        return n
    n1, n2 = span
    return sum(1 for m in range(1, n + 1) if not n1 <= m <= n2)


def internal_pivot(data: ProblemData, system: StructureSystem, collision: Collision,
                   rho: BoundaryParams, drho: BoundaryParams, max_chain: int = 3) -> PivotResult:
    seq = system.seq
    K_tied, J_tied = _tied(seq, system.hz)
    if collision.kind is Kind.A:
        (c,) = collision.shrinking
        new, check = insert_bases(data, seq, c.n, rho, drho, max_chain)
        free = (c.block == "x" and c.index in seq.K0 - K_tied) or (c.block == "q" and c.index in seq.JN1 - J_tied)
        return PivotResult(new, check, Kind.A, Kind.D if free else Kind.C, "internal", collision)
    inter = without_span(seq, collision.span)
    if collision.kind is Kind.B:
        new, check = insert_bases(data, inter, collision.span[0] - 1, rho, drho, max_chain)
        return PivotResult(new, check, Kind.B, Kind.B, "internal", collision)
    if collision.kind is Kind.C:
        check = _certified(data, inter, rho, drho, "removing the shrunk intervals")
        return PivotResult(inter, check, Kind.C, Kind.A, "internal", collision)
    raise ValueError(f"collision kind {collision.kind.value} needs a boundary pivot")


def leaving_variable(collision: Collision, dic: BoundaryDictionary) -> VarId | None:
    """The boundary variable driven out of the dictionary, or None for no step."""
    if collision.kind is Kind.D:
        fv = collision.free_var
        if fv.kind == "x":
            return None if VarId("xb", fv.index) in dic.rows else VarId("p0", fv.index)
        return None if VarId("qb", fv.index) in dic.cols else VarId("uN", fv.index)
    comps = [c for c in collision.shrinking if c.block != "tau"]
    if collision.kind is Kind.F:
        # states following the removed span shrink along with it
        comps = [c for c in comps if c.block in ("x0", "qN")]
    (c,) = comps
    return VarId(_BOUNDARY_VAR[c.block], c.index)


def boundary_side(data: ProblemData, system: StructureSystem, H: SolutionH, collision: Collision,
                  rho: BoundaryParams, choice: frozenset[VarId] | None = None):
    """Dictionary, pivot outcome and new boundary sets, without any insertion."""
    K, J = data.K, data.J
    dec = decompose(system, H)
    dic = build_dictionary(data, system, H, dec, rho, collision.free_var, choice)
    v = leaving_variable(collision, dic)
    outcome = boundary_pivot(dic, v, collision.kind, K, J)
    ws = outcome.w_star
    if ws is not None and ws.kind == "xb" and len(dec.x_argmin[ws.index]) > 1:
        raise MultiplePost(f"x_{ws.index + 1} has several minimum points")
    if ws is not None and ws.kind == "qb" and len(dec.q_argmin[ws.index]) > 1:
        raise MultiplePost(f"q_{ws.index + 1} has several minimum points")
    start, end = new_boundary_sets(outcome, dec, K, J)
    return dec, dic, outcome, start, end


def _becoming_tied(system: StructureSystem, collision: Collision):
    """New boundary sets when a vanishing impulse frees a state that already touches zero inside.

    If p0_k hits zero while x_k(0) = 0 and x_k returns to zero later, x_k(0)
    may grow but the minimum of x_k stays at zero, so the only change is that
    k joins K0 (and symmetrically uN_j with q_j at T).  None otherwise.
    """
    if collision.kind is not Kind.E:
        return None
    (c,) = collision.shrinking
    seq, hz, N = system.seq, system.hz, system.seq.N
    if c.block == "p0" and c.index not in seq.K0:
        if any(Comp("x", n, c.index) in hz for n in range(1, N + 1)):
            return (seq.K0 | {c.index}, seq.J0), (seq.KN1, seq.JN1)
    if c.block == "uN" and c.index not in seq.JN1:
        if any(Comp("q", n, c.index) in hz for n in range(N)):
            return (seq.K0, seq.J0), (seq.KN1, seq.JN1 | {c.index})
    return None


def boundary_pivot_step(data: ProblemData, system: StructureSystem, H: SolutionH, collision: Collision,
                        rho: BoundaryParams, drho: BoundaryParams, choice: frozenset[VarId] | None = None,
                        max_chain: int = 3) -> PivotResult:
    seq = system.seq
    tied = _becoming_tied(system, collision)
    if tied is not None:
        new = seq.with_boundary(*tied)
        if not tied[0][0] <= seq.bases[0].Kset:
            new, check = insert_bases(data, new, 0, rho, drho, max_chain)
            return PivotResult(new, check, collision.kind, Kind.F, "boundary-I", collision)
        if not tied[1][1] <= seq.bases[-1].Jset:
            new, check = insert_bases(data, new, new.N, rho, drho, max_chain)
            return PivotResult(new, check, collision.kind, Kind.F, "boundary-I", collision)
        check = _certified(data, new, rho, drho, "tying a boundary state")
        return PivotResult(new, check, collision.kind, Kind.A, "boundary-I", collision)
    dec, dic, outcome, start, end = boundary_side(data, system, H, collision, rho, choice)
    span = collision.span if collision.kind in (Kind.D, Kind.F) else None
    inter = without_span(seq, span) if span else seq
    new = inter.with_boundary(start, end)
    vp, ws = outcome.v_prime, outcome.w_star
    # a boundary value turning positive where its state is nonbasic calls for a new end interval
    start_short = not start[0] <= new.bases[0].Kset
    end_short = not end[1] <= new.bases[-1].Jset
    if vp is None and outcome.pivot_type == "II":
        w_kind = Kind.D
    elif start_short and end_short:
        raise NeedsRestart("boundary", "both end intervals would need new bases")
    elif start_short or end_short:
        w_kind = Kind.F
    else:
        w_kind = Kind.A if vp is None else Kind.E

    if w_kind is Kind.D:
        argmin = dec.x_argmin[ws.index] if ws.kind == "xb" else dec.q_argmin[ws.index]
        (n,) = argmin
        new, check = insert_bases(data, new, _kept_before(span, n), rho, drho, max_chain)
    elif w_kind is Kind.F:
        pos = 0 if start_short else new.N
        new, check = insert_bases(data, new, pos, rho, drho, max_chain)
    else:
        check = _certified(data, new, rho, drho, f"boundary pivot ({collision.kind.value})")
    pivot = "boundary-" + outcome.pivot_type
    return PivotResult(new, check, collision.kind, w_kind, pivot, collision, dic, outcome)


def mclp_pivot(data: ProblemData, system: StructureSystem, H: SolutionH, shrinking: Iterable[Comp],
               rho: BoundaryParams, drho: BoundaryParams, choice: frozenset[VarId] | None = None,
               max_chain: int = 3) -> PivotResult:
    """Move from the region of ``system.seq`` to the next one at the collision point ``rho``.

    ``H`` is the solution at ``rho`` and ``drho`` the direction of travel.
    """
    collision = classify_collision(system, H, shrinking)
    if collision.kind is Kind.MULTIPLE_PRE:
        raise MultiplePre(f"{collision.describe()} ({collision.note})")
    if collision.kind in (Kind.A, Kind.B, Kind.C):
        return internal_pivot(data, system, collision, rho, drho, max_chain)
    return boundary_pivot_step(data, system, H, collision, rho, drho, choice, max_chain)
