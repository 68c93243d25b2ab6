"""Base sequences, the coupled structure equations M H = R and their solutions.

Components of H are named by :class:`Comp`.  Boundary blocks are
``u0`` (impulse at 0), ``x0`` (state at 0), ``pN`` (dual impulse at dual
time 0), ``qN`` (dual state at dual time 0), ``uN`` (impulse at T),
``xN`` (state at T, after the jump), ``p0`` (dual impulse at dual time T)
and ``q0`` (dual state at dual time T).  Interior blocks are ``tau``
(interval lengths, n = 1..N), ``x`` (states x^n = x(t_n), n = 1..N, where
x^N is the left limit at T) and ``q`` (dual states q^n = q(T - t_n),
n = 0..N-1, where q^0 is the left limit at dual time T).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .exact import RatMatrix, RatVector, solve_many
from .model import BoundaryParams, ProblemData
from .rates import (
    NotAdjacent,
    RatesBasis,
    RatesSolution,
    VarId,
    adjacency,
    is_admissible,
    rates_for_basis,
)

BOUNDARY_BLOCKS = ("u0", "x0", "pN", "qN", "uN", "xN", "p0", "q0")


class ImproperSequence(ValueError):
    pass


class CertificationError(AssertionError):
    """A candidate solution failed a check; ``component`` names what failed."""

    def __init__(self, component: str, detail: str = ""):
        super().__init__(f"{component}: {detail}" if detail else component)
        self.component = component
        self.detail = detail


def _fmt_set(s: Iterable[int]) -> str:
    return "{" + ",".join(str(i + 1) for i in sorted(s)) + "}"


@dataclass(frozen=True)
class BaseSequence:
    """Boundary index sets around a chain of rates bases (all indices 0-based).

    ``K0``/``J0`` index the nonzero x(0) and q(T) boundary values,
    ``KN1``/``JN1`` the nonzero x(T) and q(0) values.
    """

    K0: frozenset[int]
    J0: frozenset[int]
    bases: tuple[RatesBasis, ...]
    KN1: frozenset[int]
    JN1: frozenset[int]

    @classmethod
    def of(cls, start: tuple[Iterable[int], Iterable[int]], bases: Sequence[RatesBasis],
           end: tuple[Iterable[int], Iterable[int]]) -> "BaseSequence":
        return cls(frozenset(start[0]), frozenset(start[1]), tuple(bases), frozenset(end[0]), frozenset(end[1]))

    @classmethod
    def initial(cls, K: int, J: int) -> "BaseSequence":
        full = RatesBasis.full(K, J)
        return cls(full.Kset, full.Jset, (full,), full.Kset, full.Jset)

    @property
    def N(self) -> int:
        return len(self.bases)

    def sets(self, n: int) -> tuple[frozenset[int], frozenset[int]]:
        """(K_n, J_n) for n = 0..N+1."""
        if n == 0:
            return self.K0, self.J0
        if n == self.N + 1:
            return self.KN1, self.JN1
        b = self.bases[n - 1]
        return b.Kset, b.Jset

    def pivot_leaving(self, n: int) -> VarId:
        """The primal rates variable leaving between bases n and n+1."""
        return adjacency(self.bases[n - 1], self.bases[n])[0]

    def with_bases(self, bases: Sequence[RatesBasis]) -> "BaseSequence":
        return BaseSequence(self.K0, self.J0, tuple(bases), self.KN1, self.JN1)

    def with_boundary(self, start, end) -> "BaseSequence":
        return BaseSequence(frozenset(start[0]), frozenset(start[1]), self.bases, frozenset(end[0]), frozenset(end[1]))

    def check_proper(self, data: ProblemData) -> None:
        """Raise ImproperSequence unless admissible, adjacent and compatible."""
        K, J = data.K, data.J
        if not self.bases:
            raise ImproperSequence("no internal bases")
        for b in self.bases:
            try:
                b.check(K, J)
                sol = rates_for_basis(data, b)
            except (ValueError, ArithmeticError) as exc:
                raise ImproperSequence(f"basis {b}: {exc}") from exc
            if not is_admissible(sol):
                raise ImproperSequence(f"basis {b} is not admissible")
        for n in range(1, self.N):
            try:
                adjacency(self.bases[n - 1], self.bases[n])
            except NotAdjacent as exc:
                raise ImproperSequence(str(exc)) from exc
        if not (self.K0 <= self.bases[0].Kset and self.JN1 <= self.bases[-1].Jset):
            raise ImproperSequence("boundary sets are not compatible with the end bases")
        if not (self.J0 <= set(range(J)) and self.KN1 <= set(range(K))):
            raise ImproperSequence("boundary index out of range")

    def is_proper(self, data: ProblemData) -> bool:
        try:
            self.check_proper(data)
        except ImproperSequence:
            return False
        return True

    def __str__(self) -> str:
        inner = ", ".join(str(b) for b in self.bases)
        return (
            f"({_fmt_set(self.K0)},{_fmt_set(self.J0)}), [{inner}], "
            f"({_fmt_set(self.KN1)},{_fmt_set(self.JN1)})"
        )


@dataclass(frozen=True, order=True)
class Comp:
    """One component of H; ``n`` is the breakpoint or interval number."""

    block: str
    n: int
    index: int

    def __str__(self) -> str:
        if self.block == "tau":
            return f"tau_{self.n}"
        if self.block in ("x", "q"):
            return f"{self.block}^{self.n}_{self.index + 1}"
        return f"{self.block}_{self.index + 1}"


def boundary(block: str, index: int) -> Comp:
    return Comp(block, 0, index)


class Layout:
    """Column order of H: u0, x0, pN, qN, tau, x^1..x^N, q^0..q^{N-1}, uN, xN, p0, q0."""

    def __init__(self, K: int, J: int, N: int):
        self.K, self.J, self.N = K, J, N
        comps: list[Comp] = []
        comps += [boundary("u0", j) for j in range(J)]
        comps += [boundary("x0", k) for k in range(K)]
        comps += [boundary("pN", k) for k in range(K)]
        comps += [boundary("qN", j) for j in range(J)]
        comps += [Comp("tau", n, 0) for n in range(1, N + 1)]
        comps += [Comp("x", n, k) for n in range(1, N + 1) for k in range(K)]
        comps += [Comp("q", n, j) for n in range(N) for j in range(J)]
        comps += [boundary("uN", j) for j in range(J)]
        comps += [boundary("xN", k) for k in range(K)]
        comps += [boundary("p0", k) for k in range(K)]
        comps += [boundary("q0", j) for j in range(J)]
        self.comps = tuple(comps)
        self._pos = {c: i for i, c in enumerate(comps)}

    @property
    def size(self) -> int:
        return len(self.comps)

    def index(self, comp: Comp) -> int:
        return self._pos[comp]

    def __contains__(self, comp: Comp) -> bool:
        return comp in self._pos

    def x_state(self, n: int, k: int) -> Comp:
        """x^n_k with x^0 mapped to the boundary block x0."""
        return boundary("x0", k) if n == 0 else Comp("x", n, k)

    def q_state(self, n: int, j: int) -> Comp:
        """q^n_j with q^N mapped to the boundary block qN."""
        return boundary("qN", j) if n == self.N else Comp("q", n, j)


@dataclass(frozen=True)
class SolutionH:
    layout: Layout
    values: RatVector

    def __getitem__(self, comp: Comp) -> Fraction:
        return self.values[self.layout.index(comp)]

    def block(self, name: str, n: int = 0) -> RatVector:
        size = self.layout.K if name in ("x0", "pN", "xN", "p0", "x") else self.layout.J
        return RatVector(self[Comp(name, n, i)] for i in range(size))

    @property
    def tau(self) -> RatVector:
        return RatVector(self[Comp("tau", n, 0)] for n in range(1, self.layout.N + 1))

    def x(self, n: int) -> RatVector:
        """x^n for n = 0..N (x^N is the left limit at T)."""
        return self.block("x0") if n == 0 else self.block("x", n)

    def q(self, n: int) -> RatVector:
        """q^n for n = 0..N (q^N is the dual state at dual time 0)."""
        return self.block("qN") if n == self.layout.N else self.block("q", n)

    def breakpoints(self) -> list[Fraction]:
        t = [Fraction(0)]
        for tau in self.tau:
            t.append(t[-1] + tau)
        return t

    def shifted(self, direction: "SolutionH", step) -> "SolutionH":
        return SolutionH(self.layout, self.values + direction.values * step)


@dataclass(frozen=True)
class StructureSystem:
    """The assembled system; ``rhs(rho)`` gives R for any parameter point."""

    seq: BaseSequence
    layout: Layout
    M: RatMatrix
    rates: tuple[RatesSolution, ...]
    hz: frozenset[Comp]
    hp: frozenset[Comp]
    row_blocks: tuple[tuple[str, int], ...] = field(repr=False)

    def rhs(self, rho: BoundaryParams) -> RatVector:
        parts = {"beta": rho.beta, "gamma": rho.gamma, "T": [rho.T], "lambda": rho.lam, "mu": rho.mu}
        out: list[Fraction] = []
        for name, size in self.row_blocks:
            out.extend(parts[name] if name in parts else [Fraction(0)] * size)
        return RatVector(out)


def assemble(data: ProblemData, seq: BaseSequence) -> StructureSystem:
    """Build M row by row from the structure equations.

    Row blocks follow the right-hand side layout: beta, two complementary
    slackness blocks, gamma, two more, the time-interval rows, the sum of
    interval lengths, the state definitions, lambda and its two slackness
    blocks, mu and its two.
    """
    seq.check_proper(data)
    A, K, J, N = data.A, data.K, data.J, seq.N
    rates = tuple(rates_for_basis(data, b) for b in seq.bases)
    lay = Layout(K, J, N)
    rows: list[dict[int, Fraction]] = []
    blocks: list[tuple[str, int]] = []

    def add_block(name: str, new_rows: list[dict[Comp, Fraction]]) -> None:
        for r in new_rows:
            rows.append({lay.index(c): v for c, v in r.items() if v})
        blocks.append((name, len(new_rows)))

    def zero(comps: Iterable[Comp]) -> list[dict[Comp, Fraction]]:
        return [{c: Fraction(1)} for c in comps]

    one = Fraction(1)
    # A u0 + x0 = beta
    add_block("beta", [
        {**{boundary("u0", j): A[k, j] for j in range(J)}, boundary("x0", k): one} for k in range(K)
    ])
    add_block("cs", zero(boundary("u0", j) for j in sorted(seq.J0)))
    add_block("cs", zero(boundary("x0", k) for k in range(K) if k not in seq.K0))
    # A^T pN - qN = gamma
    add_block("gamma", [
        {**{boundary("pN", k): A[k, j] for k in range(K)}, boundary("qN", j): -one} for j in range(J)
    ])
    add_block("cs", zero(boundary("pN", k) for k in sorted(seq.KN1)))
    add_block("cs", zero(boundary("qN", j) for j in range(J) if j not in seq.JN1))
    add_block("cs", zero(_time_interval_comps(seq, lay)))
    add_block("T", [{Comp("tau", n, 0): one for n in range(1, N + 1)}])
    # x^n - x^{n-1} - xdot^n tau_n = 0
    xrows = []
    for n in range(1, N + 1):
        for k in range(K):
            r = {lay.x_state(n, k): one}
            r[lay.x_state(n - 1, k)] = -one
            r[Comp("tau", n, 0)] = -rates[n - 1].xdot[k]
            xrows.append(r)
    add_block("xdef", xrows)
    # q^{n-1} - q^n - qdot^n tau_n = 0
    qrows = []
    for n in range(1, N + 1):
        for j in range(J):
            r = {lay.q_state(n - 1, j): one}
            r[lay.q_state(n, j)] = -one
            r[Comp("tau", n, 0)] = -rates[n - 1].qdot[j]
            qrows.append(r)
    add_block("qdef", qrows)
    # A uN + xN - x^N = lambda
    add_block("lambda", [
        {**{boundary("uN", j): A[k, j] for j in range(J)}, boundary("xN", k): one, lay.x_state(N, k): -one}
        for k in range(K)
    ])
    add_block("cs", zero(boundary("p0", k) for k in sorted(seq.K0)))
    add_block("cs", zero(boundary("q0", j) for j in range(J) if j not in seq.J0))
    # A^T p0 - q0 + q^0 = mu
    add_block("mu", [
        {**{boundary("p0", k): A[k, j] for k in range(K)}, boundary("q0", j): -one, lay.q_state(0, j): one}
        for j in range(J)
    ])
    add_block("cs", zero(boundary("uN", j) for j in sorted(seq.JN1)))
    add_block("cs", zero(boundary("xN", k) for k in range(K) if k not in seq.KN1))

    size = lay.size
    if len(rows) != size:
        raise AssertionError(f"structure system has {len(rows)} rows for {size} unknowns")
    dense = [[row.get(i, Fraction(0)) for i in range(size)] for row in rows]
    hz = frozenset(zero_components(seq, lay))
    hp = frozenset(lay.comps) - hz
    return StructureSystem(seq, lay, RatMatrix(dense), rates, hz, hp, tuple(blocks))


def _time_interval_comps(seq: BaseSequence, lay: Layout) -> Iterator[Comp]:
    for n in range(1, seq.N):
        v = seq.pivot_leaving(n)
        if v.kind == "xdot":
            yield lay.x_state(n, v.index)
        else:
            yield lay.q_state(n, v.index)


def boundary_zero_components(seq: BaseSequence, K: int, J: int) -> list[Comp]:
    """The 2(K+J) boundary values forced to zero by complementary slackness."""
    out = []
    for j in range(J):
        out.append(boundary("u0", j) if j in seq.J0 else boundary("q0", j))
        out.append(boundary("uN", j) if j in seq.JN1 else boundary("qN", j))
    for k in range(K):
        out.append(boundary("p0", k) if k in seq.K0 else boundary("x0", k))
        out.append(boundary("pN", k) if k in seq.KN1 else boundary("xN", k))
    return out


def zero_components(seq: BaseSequence, lay: Layout) -> list[Comp]:
    K, J, N = lay.K, lay.J, lay.N
    out = boundary_zero_components(seq, K, J)
    out += list(_time_interval_comps(seq, lay))
    for n in range(1, N + 1):
        Kn, _ = seq.sets(n)
        out += [Comp("x", n, k) for k in range(K) if k not in Kn]
    for n in range(N):
        _, Jn1 = seq.sets(n + 1)
        out += [Comp("q", n, j) for j in range(J) if j not in Jn1]
    return out


def solve_structure(system: StructureSystem, rho: BoundaryParams,
                    drho: BoundaryParams | None = None) -> tuple[SolutionH, SolutionH | None]:
    """H with M H = R(rho) and, when ``drho`` is given, dH with M dH = R(drho).

    SingularError propagates when M is singular.
    """
    rhs = [system.rhs(rho)]
    if drho is not None:
        rhs.append(system.rhs(drho))
    sols = solve_many(system.M, rhs)
    H = SolutionH(system.layout, sols[0])
    dH = SolutionH(system.layout, sols[1]) if drho is not None else None
    return H, dH


def gradient(system: StructureSystem, drho: BoundaryParams) -> SolutionH:
    return SolutionH(system.layout, solve_many(system.M, [system.rhs(drho)])[0])


def ratio_step(H: SolutionH, dH: SolutionH, hp: Iterable[Comp]) -> tuple[Fraction | float, frozenset[Comp]]:
    """Largest step along dH keeping H_P nonnegative, and the components that hit zero.

    Returns ``(math.inf, {})`` when no component decreases.  A component
    already at zero with a negative derivative gives a zero step.
    """
    best: Fraction | None = None
    hit: set[Comp] = set()
    for c in hp:
        d = dH[c]
        if d >= 0:
            continue
        step = H[c] / -d
        if best is None or step < best:
            best, hit = step, {c}
        elif step == best:
            hit.add(c)
    if best is None:
        return math.inf, frozenset()
    return best, frozenset(hit)


def valid_forward(system: StructureSystem, H: SolutionH, dH: SolutionH) -> bool:
    """True when H + s dH has H_P > 0 for all small s > 0 (value, then slope)."""
    return all(H[c] > 0 or (H[c] == 0 and dH[c] > 0) for c in system.hp)


def interior(system: StructureSystem, H: SolutionH) -> bool:
    return all(H[c] > 0 for c in system.hp)


@dataclass(frozen=True)
class Decomposition:
    x_tilde: RatVector
    q_tilde: RatVector
    U_tilde: RatVector
    P_tilde: RatVector
    x_bullet: RatVector
    q_bullet: RatVector
    K_tied: frozenset[int]
    K_free: frozenset[int]
    J_tied: frozenset[int]
    J_free: frozenset[int]
    x_argmin: tuple[frozenset[int], ...]
    q_argmin: tuple[frozenset[int], ...]


def decompose(system: StructureSystem, H: SolutionH) -> Decomposition:
    """Running-minimum deficits, cumulative controls and the tied/free split.

    ``x_argmin[k]`` holds the breakpoints n in 0..N where x^n_k attains its
    minimum; ``q_argmin[j]`` likewise over q^0..q^N.
    """
    seq, lay = system.seq, system.layout
    K, J, N = lay.K, lay.J, lay.N
    x0, qN = H.block("x0"), H.block("qN")
    xs = [H.x(n) for n in range(N + 1)]
    qs = [H.q(n) for n in range(N + 1)]
    xmin = [min(x[k] for x in xs) for k in range(K)]
    qmin = [min(q[j] for q in qs) for j in range(J)]
    x_argmin = tuple(frozenset(n for n in range(N + 1) if xs[n][k] == xmin[k]) for k in range(K))
    q_argmin = tuple(frozenset(n for n in range(N + 1) if qs[n][j] == qmin[j]) for j in range(J))
    tau = H.tau
    U = RatVector.zeros(J)
    P = RatVector.zeros(K)
    for n, r in enumerate(system.rates):
        U = U + r.u * tau[n]
        P = P + r.p * tau[n]
    K_tied = frozenset(k for k in seq.K0 if any(Comp("x", n, k) in system.hz for n in range(1, N + 1)))
    J_tied = frozenset(j for j in seq.JN1 if any(Comp("q", n, j) in system.hz for n in range(N)))
    x_tilde = RatVector(x0[k] - xmin[k] for k in range(K))
    q_tilde = RatVector(qN[j] - qmin[j] for j in range(J))
    return Decomposition(
        x_tilde=x_tilde,
        q_tilde=q_tilde,
        U_tilde=U,
        P_tilde=P,
        x_bullet=RatVector(xmin),
        q_bullet=RatVector(qmin),
        K_tied=K_tied,
        K_free=seq.K0 - K_tied,
        J_tied=J_tied,
        J_free=seq.JN1 - J_tied,
        x_argmin=x_argmin,
        q_argmin=q_argmin,
    )


@dataclass(frozen=True)
class PointValue:
    """x(t), q(T - t), U(t), P(T - t) and the rates in force just after t."""

    x: RatVector
    q: RatVector
    U: RatVector
    P: RatVector
    u: RatVector
    p: RatVector


def _interval_at(tb: list[Fraction], t: Fraction) -> int:
    """Index n (1-based) of the positive-length interval with t_{n-1} <= t < t_n."""
    for n in range(1, len(tb)):
        if tb[n - 1] <= t < tb[n]:
            return n
    return len(tb) - 1


def evaluate(system: StructureSystem, H: SolutionH, t) -> PointValue:
    """Primal values at time t and dual values at dual time T - t.

    Jumps: x(T) is the post-jump state and U(T) includes the impulse at T;
    on the dual side q(T) and P(T) (returned at t = 0) include theirs.
    """
    t = Fraction(t)
    tb = H.breakpoints()
    T = tb[-1]
    if not 0 <= t <= T:
        raise ValueError(f"t = {t} outside [0, {T}]")
    N = system.layout.N
    rates = system.rates
    tau = H.tau
    n = _interval_at(tb, t)
    r = rates[n - 1]
    U = H.block("u0")
    for m in range(1, n):
        U = U + rates[m - 1].u * tau[m - 1]
    U = U + r.u * (t - tb[n - 1])
    x = H.x(n - 1) + r.xdot * (t - tb[n - 1])
    P = H.block("pN")
    for m in range(n + 1, N + 1):
        P = P + rates[m - 1].p * tau[m - 1]
    P = P + r.p * (tb[n] - t)
    q = H.q(n) + r.qdot * (tb[n] - t)
    if t == T:
        x = H.block("xN")
        U = U + H.block("uN")
    if t == 0:
        q = H.block("q0")
        P = P + H.block("p0")
    return PointValue(x, q, U, P, r.u, r.p)


def objectives(data: ProblemData, system: StructureSystem, H: SolutionH,
               rho: BoundaryParams) -> tuple[Fraction, Fraction]:
    """Primal and dual objective values, integrated in closed form per interval."""
    c, b = data.c, data.b
    T = rho.T
    tb = H.breakpoints()
    primal = (rho.mu + rho.gamma + c * T).dot(H.block("u0")) + rho.gamma.dot(H.block("uN"))
    dual = (rho.lam + rho.beta + b * T).dot(H.block("pN")) + rho.beta.dot(H.block("p0"))
    for n, r in enumerate(system.rates, start=1):
        tau = tb[n] - tb[n - 1]
        sq = (tb[n] ** 2 - tb[n - 1] ** 2) / 2
        primal += r.u.dot(rho.gamma * tau + c * (T * tau - sq))
        dual += r.p.dot(rho.beta * tau + b * sq)
    return primal, dual


def slackness_sums(system: StructureSystem, H: SolutionH) -> tuple[Fraction, Fraction]:
    """The two complementary slackness integrals (x against dP, q against dU)."""
    tau = H.tau
    xp = H.block("xN").dot(H.block("pN")) + H.x(0).dot(H.block("p0"))
    qu = H.block("q0").dot(H.block("u0")) + H.q(system.layout.N).dot(H.block("uN"))
    for n, r in enumerate(system.rates, start=1):
        mid_x = (H.x(n - 1) + H.x(n)) * Fraction(1, 2)
        mid_q = (H.q(n - 1) + H.q(n)) * Fraction(1, 2)
        xp += r.p.dot(mid_x) * tau[n - 1]
        qu += r.u.dot(mid_q) * tau[n - 1]
    return xp, qu


@dataclass(frozen=True)
class Certificate:
    primal_objective: Fraction
    dual_objective: Fraction


def certify_optimal(data: ProblemData, system: StructureSystem, H: SolutionH,
                    rho: BoundaryParams) -> Certificate:
    """Check a feasible complementary-slack pair exactly; raise CertificationError otherwise."""
    seq, lay = system.seq, system.layout
    A, b, c = data.A, data.b, data.c
    try:
        seq.check_proper(data)
    except ImproperSequence as exc:
        raise CertificationError("sequence", str(exc)) from exc
    for comp in lay.comps:
        v = H[comp]
        if comp in system.hz and v != 0:
            raise CertificationError(str(comp), f"forced-zero component equals {v}")
        if v < 0:
            raise CertificationError(str(comp), f"negative value {v}")
    for n, r in enumerate(system.rates, start=1):
        if not is_admissible(r):
            raise CertificationError(f"rates_{n}", "negative control rate")

    tb = H.breakpoints()
    T = rho.T
    if tb[-1] != T:
        raise CertificationError("tau", f"interval lengths sum to {tb[-1]}, not {T}")
    rates, tau = system.rates, H.tau
    N = lay.N

    def check(name: str, lhs: RatVector, rhs: RatVector) -> None:
        if lhs != rhs:
            raise CertificationError(name, f"residual {list(map(str, lhs - rhs))}")

    # primal: A U(t) + x(t) = beta + b t on [0,T), with the jump at T
    U = H.block("u0")
    check("residual primal t=0", A @ U + H.x(0), rho.beta)
    for n in range(1, N + 1):
        r = rates[n - 1]
        start_x = H.x(n - 1)
        check(f"residual primal interval {n} start", A @ U + start_x, rho.beta + b * tb[n - 1])
        U = U + r.u * tau[n - 1]
        end_x = start_x + r.xdot * tau[n - 1]
        if end_x != H.x(n):
            raise CertificationError(f"x^{n}", "state does not follow its rate")
        check(f"residual primal interval {n} end", A @ U + end_x, rho.beta + b * tb[n])
    check("residual primal t=T", A @ (U + H.block("uN")) + H.block("xN"), rho.beta + b * T + rho.lam)

    # dual in dual time s = T - t: A^T P(s) - q(s) = gamma + c s, jump at s = T
    At = A.T
    P = H.block("pN")
    check("residual dual s=0", At @ P - H.q(N), rho.gamma)
    for n in range(N, 0, -1):
        r = rates[n - 1]
        s_start = T - tb[n]
        check(f"residual dual interval {n} start", At @ P - H.q(n), rho.gamma + c * s_start)
        P = P + r.p * tau[n - 1]
        q_end = H.q(n) + r.qdot * tau[n - 1]
        if q_end != H.q(n - 1):
            raise CertificationError(f"q^{n - 1}", "state does not follow its rate")
        check(f"residual dual interval {n} end", At @ P - q_end, rho.gamma + c * (s_start + tau[n - 1]))
    check("residual dual s=T", At @ (P + H.block("p0")) - H.block("q0"), rho.gamma + c * T + rho.mu)

    xp, qu = slackness_sums(system, H)
    if xp != 0:
        raise CertificationError("slackness x.dP", f"sum is {xp}")
    if qu != 0:
        raise CertificationError("slackness q.dU", f"sum is {qu}")
    primal, dual = objectives(data, system, H, rho)
    if primal != dual:
        raise CertificationError("objective", f"primal {primal} != dual {dual}")
    return Certificate(primal, dual)


def boundary_values(H: SolutionH) -> dict[Comp, Fraction]:
    lay = H.layout
    out = {}
    for block in BOUNDARY_BLOCKS:
        size = lay.K if block in ("x0", "pN", "xN", "p0") else lay.J
        for i in range(size):
            out[boundary(block, i)] = H[boundary(block, i)]
    return out


@dataclass(frozen=True)
class ForwardCheck:
    system: StructureSystem
    H: SolutionH
    dH: SolutionH


def certify_forward(data: ProblemData, seq: BaseSequence, rho: BoundaryParams,
                    drho: BoundaryParams) -> ForwardCheck | None:
    """The solved system when ``seq`` is optimal just past ``rho`` along ``drho``, else None."""
    try:
        system = assemble(data, seq)
    except ImproperSequence:
        return None
    try:
        H, dH = solve_structure(system, rho, drho)
    except ArithmeticError:
        return None
    if not valid_forward(system, H, dH):
        return None
    return ForwardCheck(system, H, dH)
