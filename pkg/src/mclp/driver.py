"""The parametric loop: start from a one-interval solution and follow the line to the goal."""

from __future__ import annotations

import enum
import hashlib
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .exact import RatVector, SingularError
from .model import (
    BoundaryParams,
    Feasibility,
    ParamLine,
    ProblemData,
    feasibility_check,
    single_interval_conditions,
    validate,
)
from .pivots import Kind, NeedsRestart, PivotResult, SubproblemRequired, classify_collision, mclp_pivot
from .rates import RatesBasis
from .structural import (
    BaseSequence,
    Certificate,
    SolutionH,
    StructureSystem,
    assemble,
    certify_optimal,
    interior,
    objectives,
    ratio_step,
    solve_structure,
)


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    SUBPROBLEM_REQUIRED = "SubproblemRequired"


class RestartExhausted(RuntimeError):
    pass


class IterationLimit(RuntimeError):
    pass


@dataclass(frozen=True)
class IterationRecord:
    """One step along a parametric line.

    ``line`` counts restarts and indexes ``SolveResult.lines``: records with
    the same ``line`` share one parametric line and their ``theta_lo``
    values increase strictly.
    ``objective`` is the optimal value at ``theta_bar`` (None past the goal).
    """

    index: int
    line: int
    theta_lo: Fraction
    theta_bar: Fraction | None
    seq: BaseSequence
    v_kind: str
    w_kind: str
    pivot: str
    shrinking: tuple[str, ...]
    objective: Fraction | None


def choose_initial(data: ProblemData, goal: BoundaryParams) -> BoundaryParams:
    """A start point with a one-interval optimum and no controls."""
    beta = RatVector(max(goal.beta[k], 2 + abs(data.b[k])) for k in range(data.K))
    gamma = RatVector(min(goal.gamma[j], -2 - abs(data.c[j])) for j in range(data.J))
    return BoundaryParams(beta, gamma, Fraction(1), RatVector([-1] * data.K), RatVector([1] * data.J))


def initial_solution(data: ProblemData, rho0: BoundaryParams) -> tuple[BaseSequence, StructureSystem, SolutionH]:
    """The N = 1 sequence with full index sets, solved at ``rho0``."""
    if not single_interval_conditions(data, rho0):
        raise ValueError("start point does not satisfy the one-interval conditions")
    seq = BaseSequence.initial(data.K, data.J)
    system = assemble(data, seq)
    H, _ = solve_structure(system, rho0)
    if not interior(system, H):
        raise AssertionError("one-interval solution is not interior")
    return seq, system, H


@dataclass(frozen=True)
class TrimmedInterval:
    basis: RatesBasis
    start: Fraction
    tau: Fraction
    u: RatVector
    p: RatVector


@dataclass
class SolveResult:
    status: Status
    verdict: Feasibility
    data: ProblemData
    goal: BoundaryParams
    seq: BaseSequence | None = None
    system: StructureSystem | None = None
    H: SolutionH | None = None
    trace: list[IterationRecord] = field(default_factory=list)
    restarts: int = 0
    lines: list[ParamLine] = field(default_factory=list)
    certificate: Certificate | None = None
    message: str = ""

    @property
    def objective(self) -> Fraction | None:
        return self.certificate.primal_objective if self.certificate else None

    def trimmed(self) -> list[TrimmedInterval]:
        """Intervals of positive length with their rates (zero-length ones are dropped)."""
        if self.H is None:
            return []
        out = []
        tb = self.H.breakpoints()
        for n, (basis, r) in enumerate(zip(self.seq.bases, self.system.rates), start=1):
            tau = tb[n] - tb[n - 1]
            if tau > 0:
                out.append(TrimmedInterval(basis, tb[n - 1], tau, r.u, r.p))
        return out

    def breakpoints(self) -> list[Fraction]:
        """Distinct breakpoint times 0 = t_0 < ... = T."""
        if self.H is None:
            return []
        return sorted(set(self.H.breakpoints()))


def _direction(data: ProblemData, line: ParamLine, attempt: int) -> BoundaryParams:
    """A pseudo-random rational direction in (beta, gamma, lambda, mu), orthogonal to the line."""
    digest = hashlib.sha256(repr((data, line.goal, attempt)).encode()).digest()
    rng = random.Random(digest)
    K, J = data.K, data.J

    def vec(n):
        return RatVector(Fraction(rng.randint(-8, 8), rng.randint(1, 4)) for _ in range(n))

    d = BoundaryParams(vec(K), vec(J), Fraction(0), vec(K), vec(J))
    ell = line.direction
    flat_d = _flat(d, with_T=False)
    flat_l = _flat(ell, with_T=False)
    norm = sum(v * v for v in flat_l)
    if norm:
        s = sum(a * b for a, b in zip(flat_d, flat_l)) / norm
        d = d - BoundaryParams(ell.beta, ell.gamma, Fraction(0), ell.lam, ell.mu) * s
    return d


def _flat(rho: BoundaryParams, with_T: bool = True) -> list[Fraction]:
    out = list(rho.beta) + list(rho.gamma) + list(rho.lam) + list(rho.mu)
    return out + [rho.T] if with_T else out


def _snap(rho: BoundaryParams, den: int) -> BoundaryParams:
    """Round every coordinate to a multiple of 1/den so restarted lines keep short numbers."""

    def r(v: Fraction) -> Fraction:
        return Fraction(round(v * den), den)

    def vec(xs):
        return RatVector(r(v) for v in xs)

    return BoundaryParams(vec(rho.beta), vec(rho.gamma), r(rho.T), vec(rho.lam), vec(rho.mu))


def restart(data: ProblemData, line: ParamLine, theta_lo: Fraction, theta_bar: Fraction,
            system: StructureSystem, attempt: int = 0, directions: int = 8, halvings: int = 64) -> ParamLine:
    """A new line to the goal from a perturbed point inside the current region.

    The point is the midpoint of the current step moved by ``eps * d`` and
    rounded to a dyadic grid that gets finer as ``eps`` halves.
    """
    mid = line.at((theta_lo + theta_bar) / 2)
    for i in range(directions):
        d = _direction(data, line, attempt * directions + i)
        if not any(_flat(d)):
            continue
        eps = Fraction(1, 2)
        for h in range(halvings):
            cand = _snap(mid + d * eps, 2 ** (h + 8))
            eps /= 2
            if cand.T <= 0 or any(v > 0 for v in cand.lam) or any(v < 0 for v in cand.mu):
                continue
            try:
                H, _ = solve_structure(system, cand)
            except SingularError:
                break
            if interior(system, H):
                return ParamLine(cand, line.goal)
    raise RestartExhausted(f"no interior perturbation found after {directions} directions")


def _check_budget(data: ProblemData) -> int:
    n = data.K + data.J
    return math.comb(4 * n, 2 * n) * 2 ** math.comb(n, data.K)


def solve(data: ProblemData, goal: BoundaryParams, initial: BoundaryParams | None = None, *,
          max_restarts: int = 32, max_chain: int = 3, max_iterations: int | None = None,
          on_record: Callable[[IterationRecord], None] | None = None) -> SolveResult:
    """Solve the problem at ``goal`` by following a line from a one-interval start point.

    Infeasible or unbounded instances return at once with the verdict of
    the static feasibility test.  DegeneracyError and SignError come from
    validation; RestartExhausted when the restart budget runs out.
    """
    validate(data, goal)
    verdict = feasibility_check(data, goal)
    if verdict is not Feasibility.BOTH_FEASIBLE:
        status = Status.UNBOUNDED if verdict is Feasibility.DUAL_INFEASIBLE else Status.INFEASIBLE
        return SolveResult(status, verdict, data, goal)
    rho0 = initial if initial is not None else choose_initial(data, goal)
    rho0.check_dims(data)
    seq, system, _ = initial_solution(data, rho0)
    line = ParamLine(rho0, goal)
    limit = max_iterations if max_iterations is not None else _check_budget(data)
    result = SolveResult(Status.OPTIMAL, verdict, data, goal, lines=[line])
    theta = Fraction(0)
    line_no = 0
    H = dH = None
    while True:
        if len(result.trace) >= limit:
            raise IterationLimit(f"{limit} iterations without reaching the goal")
        drho = line.direction
        if H is None:
            H, dH = solve_structure(system, line.at(theta), drho)
        step, hit = ratio_step(H, dH, system.hp)
        theta_bar = theta + step if step != math.inf else None
        if theta_bar is None or theta_bar >= 1:
            kind = ""
            obj = None
            if theta_bar == 1:
                H1 = H.shifted(dH, step)
                kind = classify_collision(system, H1, hit).kind.value
                obj = objectives(data, system, H1, goal)[0]
            shrinking = tuple(str(c) for c in sorted(hit)) if theta_bar == 1 else ()
            record = IterationRecord(len(result.trace) + 1, line_no, theta, theta_bar, seq, kind, "",
                                     "final", shrinking, obj)
            result.trace.append(record)
            if on_record:
                on_record(record)
            break
        Hb = H.shifted(dH, step)
        rho_bar = line.at(theta_bar)
        obj = objectives(data, system, Hb, rho_bar)[0]
        try:
            piv: PivotResult = mclp_pivot(data, system, Hb, hit, rho_bar, drho, max_chain=max_chain)
        except NeedsRestart as exc:
            if result.restarts >= max_restarts:
                if isinstance(exc, SubproblemRequired):
                    result.status = Status.SUBPROBLEM_REQUIRED
                    result.seq, result.system = seq, system
                    result.message = str(exc)
                    return result
                raise RestartExhausted(f"restart budget of {max_restarts} used up; last reason: {exc}") from exc
            record = IterationRecord(len(result.trace) + 1, line_no, theta, theta_bar, seq, "", "",
                                     f"restart ({exc.reason})", tuple(str(c) for c in sorted(hit)), obj)
            result.trace.append(record)
            if on_record:
                on_record(record)
            line = restart(data, line, theta, theta_bar, system, attempt=result.restarts)
            result.lines.append(line)
            result.restarts += 1
            line_no += 1
            theta = Fraction(0)
            H = None
            continue
        record = IterationRecord(len(result.trace) + 1, line_no, theta, theta_bar, seq, piv.v_kind.value,
                                 piv.w_kind.value, piv.pivot, tuple(str(c) for c in sorted(hit)), obj)
        result.trace.append(record)
        if on_record:
            on_record(record)
        seq, system = piv.seq, piv.check.system
        H, dH = piv.check.H, piv.check.dH
        theta = theta_bar

    H_final, _ = solve_structure(system, goal)
    result.seq, result.system, result.H = seq, system, H_final
    result.certificate = certify_optimal(data, system, H_final, goal)
    return result


__all__ = [
    "Status",
    "RestartExhausted",
    "IterationLimit",
    "IterationRecord",
    "SolveResult",
    "TrimmedInterval",
    "choose_initial",
    "initial_solution",
    "restart",
    "solve",
]
