"""Command-line front end: ``phasefit <command> [options]``.

Commands: coeffs, verify, integrate, efficiency, stability-map. Every command
accepts ``--output -`` for standard output and ``--config FILE`` with
``key=value`` lines (flags given on the command line win).

Exit codes: 0 success, 1 a verification check failed, 2 bad input or a
coefficient/IO failure.
"""

import argparse
import contextlib
import csv
import math
import sys
from pathlib import Path

import numpy as np

from . import analysis, coeffs, integrators, problems, stability
from ._printed import PLTE_TERMS
from .errors import NonFiniteState, PhaseFitError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2

PL_TOL = 1e-11
DERIV_TOL = 1e-6
CROSS_TOL = 1e-8
# The printed series are truncated at v**8; their error stays below CROSS_TOL
# only up to about this v.
CROSS_TAYLOR_V_MAX = 0.2
CLOSED_FORM_TOL = 1e-9

EFFICIENCY_DEFAULTS = {
    "harmonic": {"t_end": 20 * math.pi, "steps": (100, 200, 400, 800)},
    "two-body": {"t_end": 200 * math.pi, "steps": (10000, 20000, 40000)},
    "five-outer": {"t_end": 1e5, "steps": (2000, 4000)},
}
REFERENCE_STAGES = 5
REFERENCE_REFINE = 10


class UsageError(Exception):
    """Bad command-line input; reported on stderr with exit code 2."""


def _range(text):
    """'lo:hi' -> (lo, hi); a bare number is a single point."""
    parts = text.split(":")
    try:
        if len(parts) == 1:
            return float(parts[0])
        if len(parts) == 2:
            return float(parts[0]), float(parts[1])
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected lo:hi, got {text!r}")


def _grid(text):
    """'lo:hi:n' -> n evenly spaced values."""
    parts = text.split(":")
    try:
        if len(parts) == 3:
            return tuple(np.linspace(float(parts[0]), float(parts[1]), int(parts[2])).tolist())
    except ValueError:
        pass
    raise argparse.ArgumentTypeError(f"expected lo:hi:n, got {text!r}")


def _int_list(text):
    try:
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _resolution(text):
    parts = text.lower().split("x")
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected N or NxM, got {text!r}") from None
    if len(values) == 1:
        return values[0], values[0]
    if len(values) == 2:
        return tuple(values)
    raise argparse.ArgumentTypeError(f"expected N or NxM, got {text!r}")


def _methods(text):
    if text.strip().lower() == "all":
        return coeffs.LEVELS
    return tuple(coeffs.parse_method(x) for x in text.split(","))


@contextlib.contextmanager
def _open_output(path, binary=False):
    if path in (None, "-"):
        if binary:
            yield sys.stdout.buffer
        else:
            yield sys.stdout
        sys.stdout.flush()
        return
    mode = "wb" if binary else "w"
    kwargs = {} if binary else {"encoding": "utf-8", "newline": ""}
    try:
        handle = open(path, mode, **kwargs)
    except OSError as exc:
        raise UsageError(f"cannot write {path}: {exc}") from exc
    with handle:
        yield handle


def _fit_v(level, args, h=None):
    """v for a fitted method from --v, or --omega times the step."""
    if level == -1:
        return 0.0
    v = getattr(args, "v", None)
    omega = getattr(args, "omega", None)
    if v is not None and omega is not None:
        raise UsageError("give either --v or --omega, not both")
    if v is not None:
        return v
    if omega is None:
        raise UsageError(f"{coeffs.method_name(level)} needs --v or --omega")
    if h is None:
        raise UsageError("--omega needs --h to form v = omega*h")
    return omega * h


# -- commands -----------------------------------------------------------------


def cmd_coeffs(args):
    methods = []
    for level in args.method:
        methods.append(coeffs.coefficients(level, _fit_v(level, args, args.h)))
    with _open_output(args.output) as out:
        coeffs.write_coefficients_csv(methods, out)
    return EXIT_OK


def _verify_rows(level, v):
    """(check, value, passed) triples for one method at one v; passed None = info."""
    name = coeffs.method_name(level)
    rows = []
    mc = coeffs.coefficients(level, v)
    if level >= 0:
        if v <= CROSS_TAYLOR_V_MAX:
            taylor = np.asarray(coeffs.taylor_coefficients(level, v))
            solved = coeffs.solve_coefficients(level, v).b_array[1:6]
            rel = float(np.max(np.abs(solved - taylor) / np.abs(taylor)))
            rows.append(("solve-vs-series", f"{rel:.3e}", rel <= CROSS_TOL))
        if level == 0:
            closed = coeffs.closed_form_pf_d0(v)
            solved = coeffs.solve_coefficients(0, v).b_array[1:6] if v >= coeffs.V_SWITCH else mc.b_array[1:6]
            rel = float(np.max(np.abs(solved - closed) / np.abs(closed)))
            rows.append(("solve-vs-closed-form", f"{rel:.3e}", rel <= CLOSED_FORM_TOL))
        report = analysis.phase_lag_derivatives(level, v, k_max=level + 1, coeffs=mc)
        rows.append(("PL", f"{report.pl:.3e}", abs(report.pl) <= PL_TOL))
        for m, d in enumerate(report.derivatives, start=1):
            label = "PL" + "'" * m if m <= 3 else f"PL^({m})"
            rows.append((label, f"{d:.3e}", abs(d) <= DERIV_TOL if m <= level else None))
    order = analysis.order_constants(mc)
    expected = 10 if level == -1 else 8 - 2 * level
    rows.append(("order", str(order.order), order.order == expected))
    lead = order.constants[expected + 2]
    if level == -1:
        rows.append((f"C_{expected + 2}={lead}", str(lead), lead == coeffs.PLTE_FACTOR))
    else:
        rows.append((f"C_{expected + 2}", f"{float(lead):.6e}", lead != 0))
    op = analysis.plte_operator(level)
    printed = {(w, dy): c for c, w, dy in PLTE_TERMS[level]}
    rows.append(("PLTE-terms", str(len(printed)), op.terms() == printed))
    return [(name, v, check, value, ok) for check, value, ok in rows]


def cmd_verify(args):
    if args.v is not None and args.v_grid is not None:
        raise UsageError("give either --v or --v-grid, not both")
    grid = args.v_grid or ((args.v,) if args.v is not None else (0.1, 0.5, 1.0))
    rows = []
    for level in args.method:
        for v in (0.0,) if level == -1 else grid:
            rows.extend(_verify_rows(level, float(v)))
    failed = False
    with _open_output(args.output) as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["method", "v", "check", "value", "status"])
        for name, v, check, value, ok in rows:
            status = "INFO" if ok is None else ("PASS" if ok else "FAIL")
            failed |= ok is False
            writer.writerow([name, f"{v:.17g}", check, value, status])
    return EXIT_FAIL if failed else EXIT_OK


def _problem(args):
    try:
        return problems.make_problem(args.problem, **problems.parse_options(args.opt))
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def cmd_integrate(args):
    problem = _problem(args)
    if args.n_steps is None and args.t_end is None:
        raise UsageError("integrate needs --n-steps or --t-end")
    n_steps = args.n_steps if args.n_steps is not None else round(args.t_end / args.h)
    if n_steps < 1:
        raise UsageError("need at least one step")
    if args.integrator == "gauss":
        traj = integrators.gauss_integrate(problem, args.stages, args.h, n_steps)
    else:
        level = args.method[0]
        mc = coeffs.coefficients(level, _fit_v(level, args, args.h))
        if n_steps < coeffs.STEPS:
            raise UsageError(f"multistep runs need at least {coeffs.STEPS} steps")
        startup = integrators.bootstrap_startup(problem, args.h)
        traj = integrators.multistep_integrate(mc, problem, args.h, n_steps - (coeffs.STEPS - 1), startup)
    with _open_output(args.output) as out:
        traj.write_csv(out, problem=problem, decimate=args.decimate)
    return EXIT_OK


def efficiency_rows(problem, levels, steps, t_end, omega, reference=None):
    """[(method, steps, log10_steps, minus_log10_error or 'DIVERGED')] in input order.

    The endpoint error is the Euclidean position error at t_end against the
    exact solution, or against ``reference`` (a final state) when given.
    """
    if reference is None:
        if problem.exact is None:
            raise UsageError(f"problem {problem.name!r} has no exact solution; a reference is required")
        reference = problem.exact(t_end)
    rows = []
    for n in steps:
        h = t_end / n
        startup = integrators.bootstrap_startup(problem, h)
        for level in levels:
            name = coeffs.method_name(level)
            mc = coeffs.coefficients(level, omega * h if level >= 0 else 0.0)
            try:
                traj = integrators.multistep_integrate(mc, problem, h, n - (coeffs.STEPS - 1), startup)
            except NonFiniteState:
                rows.append((name, n, math.log10(n), "DIVERGED"))
                continue
            err = float(np.linalg.norm(traj.final - reference))
            rows.append((name, n, math.log10(n), -math.log10(err) if err > 0 else math.inf))
    return rows


def reference_final(problem, t_end, h):
    """Final state of a 5-stage Gauss run at step h (rounded to divide t_end)."""
    n = max(1, round(t_end / h))
    return integrators.gauss_integrate(problem, REFERENCE_STAGES, t_end / n, n).final


def cmd_efficiency(args):
    problem = _problem(args)
    defaults = EFFICIENCY_DEFAULTS[problem.name]
    t_end = args.t_end if args.t_end is not None else defaults["t_end"]
    steps = args.steps or defaults["steps"]
    if min(steps) <= coeffs.STEPS:
        raise UsageError(f"step counts must exceed {coeffs.STEPS}")
    omega = args.omega if args.omega is not None else problem.omega
    reference = None
    if problem.exact is None:
        reference = reference_final(problem, t_end, t_end / max(steps) / REFERENCE_REFINE)
    rows = efficiency_rows(problem, args.method, steps, t_end, omega, reference)
    with _open_output(args.output) as out:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["method", "steps", "log10_steps", "minus_log10_error"])
        for name, n, log_n, value in rows:
            cell = value if isinstance(value, str) else f"{value:.17g}"
            writer.writerow([name, n, f"{log_n:.17g}", cell])
    return EXIT_OK


def cmd_stability_map(args):
    if len(args.method) != 1:
        raise UsageError("stability-map takes a single method")
    n_v, n_s = args.res
    if n_v < 2 or n_s < 2:
        raise UsageError("--res must be at least 2 per axis")
    grid = stability.stability_grid(
        args.method[0],
        v_range=args.v_range,
        s_range=args.s_range,
        resolution=(n_v, n_s),
        tolerance=args.tolerance,
    )
    pgm_path = args.pgm
    if pgm_path is None and args.output not in (None, "-") and args.format == "csv":
        pgm_path = str(Path(args.output).with_suffix(".pgm"))
    if args.format == "pgm":
        with _open_output(args.output, binary=True) as out:
            out.write(grid.to_pgm())
    else:
        with _open_output(args.output) as out:
            grid.write_csv(out)
    if pgm_path is not None:
        with _open_output(pgm_path, binary=True) as out:
            out.write(grid.to_pgm())
    return EXIT_OK


# -- parser -------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(prog="phasefit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, method_default):
        p.add_argument("--config", help="file of key=value lines (flags override)")
        p.add_argument("--output", "-o", default="-", help="output path, '-' for stdout")
        p.add_argument("--method", type=_methods, default=method_default, help="classical, pf-d0..pf-d4, a comma list, or all")

    p = sub.add_parser("coeffs", help="dump a, b coefficient vectors as CSV")
    common(p, coeffs.LEVELS[:1])
    p.add_argument("--v", type=float, help="scaled fitting frequency omega*h")
    p.add_argument("--omega", type=float, help="fitting frequency (needs --h)")
    p.add_argument("--h", type=float, help="step size used with --omega")
    p.set_defaults(func=cmd_coeffs)

    p = sub.add_parser("verify", help="run the invariant battery and report PASS/FAIL rows")
    common(p, coeffs.LEVELS)
    p.add_argument("--v", type=float, help="single v value")
    p.add_argument("--v-grid", type=_grid, help="lo:hi:n grid of v values")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("integrate", help="integrate a problem and write the trajectory")
    common(p, coeffs.LEVELS[:1])
    p.add_argument("--problem", default="harmonic", choices=sorted(problems.REGISTRY))
    p.add_argument("--opt", action="append", default=[], help="problem option key=value (repeatable)")
    p.add_argument("--h", type=float, required=False, default=0.1)
    p.add_argument("--n-steps", type=int)
    p.add_argument("--t-end", type=float)
    p.add_argument("--v", type=float)
    p.add_argument("--omega", type=float)
    p.add_argument("--integrator", choices=("multistep", "gauss"), default="multistep")
    p.add_argument("--stages", type=int, default=REFERENCE_STAGES)
    p.add_argument("--decimate", type=int, default=1)
    p.set_defaults(func=cmd_integrate)

    p = sub.add_parser("efficiency", help="endpoint accuracy versus total steps")
    common(p, coeffs.LEVELS)
    p.add_argument("--problem", default="two-body", choices=sorted(problems.REGISTRY))
    p.add_argument("--opt", action="append", default=[])
    p.add_argument("--steps", type=_int_list, help="comma-separated total step counts")
    p.add_argument("--t-end", type=float)
    p.add_argument("--omega", type=float, help="fitting frequency; v = omega*h per run")
    p.set_defaults(func=cmd_efficiency)

    p = sub.add_parser("stability-map", help="stability classification on the (v, s) plane")
    common(p, coeffs.LEVELS[:1])
    p.add_argument("--v", dest="v_range", type=_range, default=(0.0, 3.0), help="lo:hi")
    p.add_argument("--s", dest="s_range", type=_range, default=(0.0, 3.0), help="lo:hi")
    p.add_argument("--res", type=_resolution, default=(300, 300), help="N or NxM lattice points")
    p.add_argument("--tolerance", type=float, default=stability.DEFAULT_TOLERANCE)
    p.add_argument("--format", choices=("csv", "pgm"), default="csv", help="what --output receives")
    p.add_argument("--pgm", help="also write the PGM image here")
    p.set_defaults(func=cmd_stability_map)
    return parser


def _config_tokens(path):
    tokens = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    for raw in lines:
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"config line is not key=value: {raw!r}")
        tokens += ["--" + key.strip().replace("_", "-"), value.strip()]
    return tokens


def _expand_config(argv):
    """Splice config-file options in front of the command-line flags."""
    argv = list(argv)
    for i, tok in enumerate(argv):
        if tok == "--config" and i + 1 < len(argv):
            path, rest = argv[i + 1], argv[:i] + argv[i + 2 :]
        elif tok.startswith("--config="):
            path, rest = tok.split("=", 1)[1], argv[:i] + argv[i + 1 :]
        else:
            continue
        return rest[:1] + _config_tokens(path) + rest[1:]
    return argv


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(_expand_config(argv))
        return args.func(args)
    except (UsageError, PhaseFitError, ValueError) as exc:
        print(f"phasefit: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
