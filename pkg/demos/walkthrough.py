"""Follow the two-product example step by step and print what happens at each collision.

    python3 demos/walkthrough.py
"""

from pathlib import Path

from mclp.cli import format_report, parse_problem
from mclp.driver import solve
from mclp.exact import fmt

HERE = Path(__file__).parent


def main():
    data, goal, start = parse_problem((HERE / "data" / "two_by_two.json").read_text())

    def show(rec):
        bar = "-" if rec.theta_bar is None else fmt(rec.theta_bar)
        kinds = f"{rec.v_kind or '-'}/{rec.w_kind or '-'}"
        print(f"{rec.index:>2}  theta {fmt(rec.theta_lo):>6} -> {bar:<6} {kinds:<5} {rec.pivot:<12} "
              f"shrinks {', '.join(rec.shrinking) or '-'}")
        print(f"    {rec.seq}")

    result = solve(data, goal, start, on_record=show)
    print()
    print(format_report(result), end="")


if __name__ == "__main__":
    main()
