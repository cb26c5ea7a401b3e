"""Stability regions on the (v, s) plane for the classical method and PF-D0..PF-D4.

Writes one CSV and one PGM per method into the output directory, plus a small
summary of where the diagonal s = v first leaves the stable set.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from phasefit import coeffs, stability


def diagonal_exit(grid):
    """First v > 0 on the lattice diagonal that is not stable (None if all are)."""
    n = min(len(grid.v_axis), len(grid.s_axis))
    for i in range(n):
        if grid.v_axis[i] > 0 and grid.state[i, i] != stability.STABLE:
            return float(grid.v_axis[i])
    return None


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out", type=Path, default=Path("results/stability"))
    parser.add_argument("--res", type=int, default=300)
    parser.add_argument("--max", type=float, default=3.0, help="upper end of both axes")
    args = parser.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)

    summary = []
    for level in coeffs.LEVELS:
        name = coeffs.method_name(level)
        grid = stability.stability_grid(level, (0.0, args.max), (0.0, args.max), args.res)
        with open(args.out / f"{name}.csv", "w", encoding="utf-8", newline="") as fh:
            grid.write_csv(fh)
        (args.out / f"{name}.pgm").write_bytes(grid.to_pgm())
        frac = float(np.mean(grid.stable))
        summary.append((name, frac, diagonal_exit(grid), grid.failures))
        print(f"{name:10s} stable fraction {frac:.3f}  diagonal exit {summary[-1][2]}")

    with open(args.out / "summary.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["method", "stable_fraction", "diagonal_exit_v", "failed_points"])
        writer.writerows(summary)


if __name__ == "__main__":
    main()
