"""Command line: feasibility check, solve with reports, and the discretization oracle.

Problem files are JSON objects with keys K, J, A (row-major), b, c, beta,
gamma, T, lambda, mu and an optional ``initial`` object holding a start
point (beta, gamma, T, lambda, mu).  Rationals are written as integers or
"p/q" strings.

Exit codes: ``check`` returns the feasibility verdict (0 both feasible,
1 primal infeasible, 2 dual infeasible, 3 both infeasible); ``solve``
returns 0 on success or the verdict code; 64 means the input could not be
read or the arguments were bad, 65 degenerate or sign-violating data, and
70 a solver failure (restart budget or insertion limit reached).
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import Iterable, Sequence, TextIO

from .driver import (
    IterationLimit,
    IterationRecord,
    RestartExhausted,
    SolveResult,
    Status,
    solve,
)
from .exact import RatVector, fmt, rat
from .lpcore import LpInstance, Sense
from .lpcore import Status as LpStatus
from .lpcore import solve_lp
from .model import BoundaryParams, DegeneracyError, ProblemData, SignError, feasibility_check
from .rates import RatesBasis
from .structural import BaseSequence, evaluate

EXIT_USAGE = 64
EXIT_DATA = 65
EXIT_SOFTWARE = 70


class ProblemFileError(ValueError):
    """Unreadable problem file; ``line`` and ``column`` are 1-based when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" at line {line}, column {column}" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


# ------------------------------------------------------------ problem files


def _locate(text: str, key: str) -> tuple[int | None, int | None]:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    if not m:
        return None, None
    before = text[: m.start()]
    return before.count("\n") + 1, m.start() - (before.rfind("\n") + 1) + 1


def _number(value, text: str, key: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str)):
        raise ProblemFileError(f"{key}: expected an integer or a \"p/q\" string, got {value!r}", *_locate(text, key))
    try:
        return rat(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise ProblemFileError(f"{key}: {exc}", *_locate(text, key)) from exc


def _vector(obj: dict, key: str, size: int, text: str) -> RatVector:
    if key not in obj:
        raise ProblemFileError(f"missing key {key!r}")
    value = obj[key]
    if not isinstance(value, list) or len(value) != size:
        raise ProblemFileError(f"{key}: expected a list of {size} numbers", *_locate(text, key))
    return RatVector(_number(v, text, key) for v in value)


def _params(obj: dict, K: int, J: int, text: str) -> BoundaryParams:
    if "T" not in obj:
        raise ProblemFileError("missing key 'T'")
    return BoundaryParams(
        _vector(obj, "beta", K, text),
        _vector(obj, "gamma", J, text),
        _number(obj["T"], text, "T"),
        _vector(obj, "lambda", K, text),
        _vector(obj, "mu", J, text),
    )


def _load_json(text: str) -> dict:
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProblemFileError(exc.msg, exc.lineno, exc.colno) from exc
    if not isinstance(obj, dict):
        raise ProblemFileError("top level must be an object", 1, 1)
    return obj


def parse_problem(text: str) -> tuple[ProblemData, BoundaryParams, BoundaryParams | None]:
    """(data, goal, optional start point) from the text of a problem file."""
    obj = _load_json(text)
    for key in ("K", "J"):
        if not isinstance(obj.get(key), int) or isinstance(obj.get(key), bool) or obj[key] < 1:
            raise ProblemFileError(f"{key} must be a positive integer", *_locate(text, key))
    K, J = obj["K"], obj["J"]
    A = obj.get("A")
    if not isinstance(A, list) or len(A) != K or any(not isinstance(row, list) or len(row) != J for row in A):
        raise ProblemFileError(f"A must be a list of {K} rows with {J} entries each", *_locate(text, "A"))
    data = ProblemData.build(
        [[_number(v, text, "A") for v in row] for row in A],
        _vector(obj, "b", K, text),
        _vector(obj, "c", J, text),
    )
    goal = _params(obj, K, J, text)
    initial = None
    if "initial" in obj:
        if not isinstance(obj["initial"], dict):
            raise ProblemFileError("initial must be an object", *_locate(text, "initial"))
        initial = _params(obj["initial"], K, J, text)
    return data, goal, initial


def parse_initial(text: str, K: int, J: int) -> BoundaryParams:
    """A start point from its own file: either an ``initial`` block or top-level fields."""
    obj = _load_json(text)
    if isinstance(obj.get("initial"), dict):
        obj = obj["initial"]
    return _params(obj, K, J, text)


def problem_text(data: ProblemData, goal: BoundaryParams, initial: BoundaryParams | None = None) -> str:
    """Serialize a problem in the format read by :func:`parse_problem`."""

    def vec(v):
        return [fmt(x) for x in v]

    def params(rho):
        return {"beta": vec(rho.beta), "gamma": vec(rho.gamma), "T": fmt(rho.T),
                "lambda": vec(rho.lam), "mu": vec(rho.mu)}

    obj = {"K": data.K, "J": data.J, "A": [vec(row) for row in data.A.to_lists()],
           "b": vec(data.b), "c": vec(data.c), **params(goal)}
    if initial is not None:
        obj["initial"] = params(initial)
    return json.dumps(obj, indent=2) + "\n"


# --------------------------------------------------------------- trace files


_SET = r"\{([0-9,]*)\}"
_PAIR = r"\(" + _SET + r"," + _SET + r"\)"


def _ints(group: str) -> frozenset[int]:
    return frozenset(int(v) - 1 for v in group.split(",") if v)


def parse_sequence(text: str) -> BaseSequence:
    """Inverse of ``str(BaseSequence)``."""
    m = re.fullmatch(r"\s*" + _PAIR + r",\s*\[(.*)\],\s*" + _PAIR + r"\s*", text)
    if not m:
        raise ValueError(f"not a base sequence: {text!r}")
    bases = [RatesBasis(_ints(a), _ints(b)) for a, b in re.findall(_PAIR, m.group(3))]
    return BaseSequence(_ints(m.group(1)), _ints(m.group(2)), tuple(bases), _ints(m.group(4)), _ints(m.group(5)))


def _opt(v: Fraction | None) -> str | None:
    return None if v is None else fmt(v)


def format_record(rec: IterationRecord) -> str:
    """One JSON line per iteration; rationals are kept as exact strings."""
    return json.dumps({
        "l": rec.index,
        "line": rec.line,
        "theta_lo": fmt(rec.theta_lo),
        "theta_bar": _opt(rec.theta_bar),
        "v_kind": rec.v_kind,
        "w_kind": rec.w_kind,
        "pivot": rec.pivot,
        "shrinking": list(rec.shrinking),
        "objective": _opt(rec.objective),
        "seq": str(rec.seq),
    })


def parse_record(line: str) -> IterationRecord:
    obj = json.loads(line)

    def opt(v):
        return None if v is None else rat(v)

    return IterationRecord(
        index=obj["l"],
        line=obj["line"],
        theta_lo=rat(obj["theta_lo"]),
        theta_bar=opt(obj["theta_bar"]),
        seq=parse_sequence(obj["seq"]),
        v_kind=obj["v_kind"],
        w_kind=obj["w_kind"],
        pivot=obj["pivot"],
        shrinking=tuple(obj["shrinking"]),
        objective=opt(obj["objective"]),
    )


def read_trace(text: str) -> list[IterationRecord]:
    return [parse_record(line) for line in text.splitlines() if line.strip()]


# -------------------------------------------------------------------- oracle


class OracleInfeasible(ValueError):
    pass


def uniform_grid(T: Fraction, steps: int) -> list[Fraction]:
    if steps < 1:
        raise ValueError("the grid needs at least one step")
    return [T * i / steps for i in range(steps + 1)]


def discretized_lp(data: ProblemData, rho: BoundaryParams, grid: Sequence[Fraction]) -> LpInstance:
    """Primal problem restricted to constant rates between grid points.

    Variables are the impulse at 0, one rate vector per grid interval and
    the impulse at T.  The state constraints are linear in t on each
    interval, so enforcing them at the grid points enforces them everywhere.
    """
    A, b, c = data.A, data.b, data.c
    K, J = data.K, data.J
    T = rho.T
    grid = sorted(set(Fraction(t) for t in grid))
    if grid[0] != 0 or grid[-1] != T:
        raise ValueError("grid must start at 0 and end at T")
    n = len(grid) - 1
    nvars = J * (n + 2)
    objective = list(rho.gamma + c * T + rho.mu)
    for m in range(n):
        lo, hi = grid[m], grid[m + 1]
        d = hi - lo
        objective += list(rho.gamma * d + c * (T * d - (hi * hi - lo * lo) / 2))
    objective += list(rho.gamma)
    rows, rhs = [], []
    for i in range(n + 1):
        for k in range(K):
            row = [Fraction(0)] * nvars
            for j in range(J):
                row[j] = A[k, j]
                for m in range(i):
                    row[J * (m + 1) + j] = A[k, j] * (grid[m + 1] - grid[m])
            rows.append(row)
            rhs.append(rho.beta[k] + b[k] * grid[i])
    last = rows[-K:]
    for k in range(K):
        row = list(last[k])
        for j in range(J):
            row[J * (n + 1) + j] = A[k, j]
        rows.append(row)
        rhs.append(rho.beta[k] + b[k] * T + rho.lam[k])
    return LpInstance.build(objective, rows, rhs, ["<="] * len(rows), sense=Sense.MAX)


def oracle_value(data: ProblemData, rho: BoundaryParams, grid: Sequence[Fraction]) -> Fraction | None:
    """Optimal discretized objective (None when unbounded); raises OracleInfeasible."""
    out = solve_lp(discretized_lp(data, rho, grid))
    if out.status is LpStatus.INFEASIBLE:
        raise OracleInfeasible("the discretized problem is infeasible")
    if out.status is LpStatus.UNBOUNDED:
        return None
    return out.objective


# ------------------------------------------------------------------- reports


def _vec(v: Iterable[Fraction]) -> str:
    return "(" + ", ".join(fmt(x) for x in v) + ")"


def format_report(result: SolveResult) -> str:
    lines = [f"status: {result.status.value}"]
    if result.H is None:
        if result.message:
            lines.append(f"reason: {result.message}")
        return "\n".join(lines) + "\n"
    H, system = result.H, result.system
    lines.append(f"base sequence: {result.seq}")
    lines.append(f"iterations: {len(result.trace)}  restarts: {result.restarts}")
    lines.append(f"tau: {_vec(H.tau)}")
    lines.append("breakpoints: " + _vec(result.breakpoints()))
    for name, label in (("u0", "u(0)"), ("uN", "u(T)"), ("p0", "p(T)"), ("pN", "p(0)")):
        lines.append(f"impulse {label}: {_vec(H.block(name))}")
    lines.append("intervals (positive length):")
    for iv in result.trimmed():
        lines.append(f"  [{fmt(iv.start)}, {fmt(iv.start + iv.tau)}] basis {iv.basis} u={_vec(iv.u)} p={_vec(iv.p)}")
    lines.append("states:")
    for t in result.breakpoints():
        pv = evaluate(system, H, t)
        lines.append(f"  t={fmt(t)}: x={_vec(pv.x)} q(T-t)={_vec(pv.q)}")
    lines.append(f"boundary x(0)={_vec(H.x(0))} x(T)={_vec(H.block('xN'))} "
                 f"q(T)={_vec(H.block('q0'))} q(0)={_vec(H.block('qN'))}")
    cert = result.certificate
    lines.append(f"primal objective: {fmt(cert.primal_objective)}")
    lines.append(f"dual objective: {fmt(cert.dual_objective)}")
    return "\n".join(lines) + "\n"


def sample_times(result: SolveResult, samples: int) -> list[Fraction]:
    """All breakpoints plus ``samples + 1`` uniform times (none when ``samples`` is 0)."""
    T = result.goal.T
    times = set(result.breakpoints())
    if samples > 0:
        times |= set(uniform_grid(T, samples))
    return sorted(times)


def csv_rows(result: SolveResult, samples: int) -> list[list]:
    """Header plus exact rows (Fractions) of x(t), q(T-t), U(t), P(T-t) and the impulse flag."""
    data, H, system = result.data, result.H, result.system
    K, J = data.K, data.J
    T = result.goal.T
    header = (["t"] + [f"x_{k + 1}" for k in range(K)] + [f"q_{j + 1}" for j in range(J)]
              + [f"u_{j + 1}" for j in range(J)] + [f"p_{k + 1}" for k in range(K)] + ["impulse_flag"])
    rows: list[list] = [header]
    at_zero = any(H.block("u0")) or any(H.block("p0"))
    at_end = any(H.block("uN")) or any(H.block("pN"))
    for t in sample_times(result, samples):
        pv = evaluate(system, H, t)
        flag = int((t == 0 and at_zero) or (t == T and at_end))
        rows.append([t, *pv.x, *pv.q, *pv.U, *pv.P, flag])
    return rows


def write_csv(result: SolveResult, samples: int, out: TextIO) -> None:
    for row in csv_rows(result, samples):
        out.write(",".join(v if isinstance(v, str) else (str(v) if isinstance(v, int) else f"{float(v):.12g}")
                           for v in row) + "\n")


def svg_text(result: SolveResult, width: int = 640, height: int = 400) -> str:
    """Piecewise-linear trajectories: x_k(t) above the axis, q_j(T-t) mirrored below it."""
    H, system = result.H, result.system
    T = float(result.goal.T)
    times = result.breakpoints()
    points = [evaluate(system, H, t) for t in times]
    K, J = result.data.K, result.data.J
    xs = [[float(p.x[k]) for p in points] for k in range(K)]
    qs = [[float(p.q[j]) for p in points] for j in range(J)]
    # the jumps at 0 and T: x(0) before the impulse and q at dual time T before its impulse
    x_start = [float(v) for v in H.x(0)]
    x_pre_end = [float(v) for v in H.x(H.layout.N)]
    q_pre = [float(v) for v in H.q(0)]
    top = max([1.0] + [v for row in xs for v in row] + x_start + x_pre_end)
    bottom = max([1.0] + [v for row in qs for v in row] + q_pre)
    margin = 30
    mid = margin + (height - 2 * margin) * top / (top + bottom)
    scale = (height - 2 * margin) / (top + bottom)

    def px(t: float) -> float:
        return margin + (width - 2 * margin) * t / T

    def path(pts: list[tuple[float, float]], colour: str) -> str:
        d = " ".join(f"{px(t):.2f},{mid - y * scale:.2f}" for t, y in pts)
        return f'<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{d}"/>'

    palette = ["#1f77b4", "#2ca02c", "#9467bd", "#8c564b", "#17becf"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">',
        f'<line x1="{margin}" y1="{mid:.2f}" x2="{width - margin}" y2="{mid:.2f}" stroke="black"/>',
    ]
    tf = [float(t) for t in times]
    for k in range(K):
        pts = list(zip(tf, xs[k]))
        pts[0] = (0.0, x_start[k])
        pts[-1] = (T, x_pre_end[k])
        pts.append((T, xs[k][-1]))
        parts.append(path(pts, palette[k % len(palette)]))
    for j in range(J):
        pts = [(0.0, -q_pre[j])] + [(t, -v) for t, v in zip(tf, qs[j])]
        parts.append(path(pts, "#d62728" if j == 0 else palette[(j + 2) % len(palette)]))
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ------------------------------------------------------------------ commands


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mclp", description="Exact solver for continuous linear programs with constant coefficients.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    check = sub.add_parser("check", help="report the feasibility verdict")
    check.add_argument("file", type=Path)
    run = sub.add_parser("solve", help="solve and print the optimal solution")
    run.add_argument("file", type=Path)
    run.add_argument("--initial", type=Path, help="file holding the start point")
    run.add_argument("--trace", type=Path, help="write one JSON line per iteration")
    run.add_argument("--csv", type=Path, help="write sampled trajectories")
    run.add_argument("--svg", type=Path, help="write a plot of the trajectories")
    run.add_argument("--samples", type=int, default=0, help="uniform sample count for the CSV (breakpoints are always included)")
    oracle = sub.add_parser("oracle", help="objective of the time-discretized problem")
    oracle.add_argument("file", type=Path)
    oracle.add_argument("--steps", type=int, required=True)
    oracle.add_argument("--breakpoints", action="store_true", help="add the solver's breakpoints to the grid")
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror}") from exc


def _cmd_check(args, out: TextIO) -> int:
    data, goal, _ = parse_problem(_read(args.file))
    goal.check_dims(data)
    verdict = feasibility_check(data, goal)
    out.write(verdict.name.lower().replace("_", " ") + "\n")
    return int(verdict)


def _cmd_solve(args, out: TextIO) -> int:
    data, goal, initial = parse_problem(_read(args.file))
    if args.initial is not None:
        initial = parse_initial(_read(args.initial), data.K, data.J)
    if args.samples < 0:
        raise ProblemFileError("--samples must be nonnegative")
    result = solve(data, goal, initial)
    out.write(format_report(result))
    if args.trace is not None:
        args.trace.write_text("".join(format_record(r) + "\n" for r in result.trace))
    if result.status is not Status.OPTIMAL:
        return int(result.verdict) if result.verdict else EXIT_SOFTWARE
    if args.csv is not None:
        with args.csv.open("w") as fh:
            write_csv(result, args.samples, fh)
    if args.svg is not None:
        args.svg.write_text(svg_text(result))
    return 0


def _cmd_oracle(args, out: TextIO) -> int:
    data, goal, initial = parse_problem(_read(args.file))
    goal.check_dims(data)
    if args.steps < 1:
        raise ProblemFileError("--steps must be at least 1")
    grid = uniform_grid(goal.T, args.steps)
    if args.breakpoints:
        result = solve(data, goal, initial)
        if result.status is not Status.OPTIMAL:
            out.write(f"status: {result.status.value}\n")
            return int(result.verdict) or EXIT_SOFTWARE
        grid = sorted(set(grid) | set(result.breakpoints()))
    try:
        value = oracle_value(data, goal, grid)
    except OracleInfeasible as exc:
        out.write(f"{exc}\n")
        return 1
    out.write(("unbounded" if value is None else fmt(value)) + "\n")
    return 0


def main(argv: Sequence[str] | None = None, out: TextIO | None = None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handler = {"check": _cmd_check, "solve": _cmd_solve, "oracle": _cmd_oracle}[args.command]
    try:
        return handler(args, out)
    except ProblemFileError as exc:
        print(f"mclp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DegeneracyError, SignError) as exc:
        print(f"mclp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ValueError as exc:
        print(f"mclp: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (RestartExhausted, IterationLimit) as exc:
        print(f"mclp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_SOFTWARE


if __name__ == "__main__":
    sys.exit(main())
