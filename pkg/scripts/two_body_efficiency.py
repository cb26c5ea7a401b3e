"""Endpoint accuracy versus total steps for the eccentric two-body orbit.

Each fitted method uses v = omega*h with the chosen omega (mean motion 1 by
default). Output columns match the `efficiency` CLI command.
"""

import argparse
import csv
import math
import time
from pathlib import Path

from phasefit import cli, coeffs, problems


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--eccentricity", type=float, default=0.5)
    parser.add_argument("--periods", type=int, default=100)
    parser.add_argument("--per-period", type=int, nargs="+", default=[100, 200, 400, 800])
    parser.add_argument("--omega", type=float, default=1.0)
    parser.add_argument("--out", type=Path, default=Path("results/two_body_efficiency.csv"))
    args = parser.parse_args()

    problem = problems.two_body(args.eccentricity)
    t_end = args.periods * problem.period
    steps = [args.periods * k for k in args.per_period]
    start = time.perf_counter()
    rows = cli.efficiency_rows(problem, coeffs.LEVELS, steps, t_end, args.omega)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "steps", "log10_steps", "minus_log10_error"])
        for name, n, log_n, value in rows:
            writer.writerow([name, n, f"{log_n:.6f}", value if isinstance(value, str) else f"{value:.6f}"])
            if not isinstance(value, str):
                print(f"{name:10s} {n:7d}  error {10 ** -value:.3e}")
    print(f"done in {time.perf_counter() - start:.1f}s (t_end = {t_end / math.pi:.0f} pi)")


if __name__ == "__main__":
    main()
