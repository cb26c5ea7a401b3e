"""Endpoint accuracy versus total steps for the Sun plus five outer planets.

The reference endpoint comes from the 5-stage Gauss solver at a step ten times
smaller than the finest multistep step. The fitting frequency defaults to
Jupiter's mean motion.
"""

import argparse
import csv
import time
from pathlib import Path

from phasefit import cli, coeffs, problems


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--t-end", type=float, default=1e5, help="days")
    parser.add_argument("--steps", type=int, nargs="+", default=[1000, 2000, 4000])
    parser.add_argument("--omega", type=float, default=problems.JUPITER_MEAN_MOTION)
    parser.add_argument("--refine", type=int, default=cli.REFERENCE_REFINE)
    parser.add_argument("--out", type=Path, default=Path("results/five_outer_efficiency.csv"))
    args = parser.parse_args()

    problem = problems.five_outer()
    start = time.perf_counter()
    reference = cli.reference_final(problem, args.t_end, args.t_end / max(args.steps) / args.refine)
    print(f"reference ready in {time.perf_counter() - start:.1f}s")
    rows = cli.efficiency_rows(problem, coeffs.LEVELS, args.steps, args.t_end, args.omega, reference)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    with open(args.out, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "steps", "log10_steps", "minus_log10_error"])
        for name, n, log_n, value in rows:
            writer.writerow([name, n, f"{log_n:.6f}", value if isinstance(value, str) else f"{value:.6f}"])
            if not isinstance(value, str):
                print(f"{name:10s} h={args.t_end / n:7.2f}  error {10 ** -value:.3e}")
    print(f"done in {time.perf_counter() - start:.1f}s")


if __name__ == "__main__":
    main()
