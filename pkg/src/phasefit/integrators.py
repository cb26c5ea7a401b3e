"""Time stepping: the explicit 10-step symmetric recurrence and a Gauss-Legendre
implicit Runge-Kutta reference solver."""

import csv
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import mpmath
import numpy as np

from .coeffs import STEPS
from .errors import NonFiniteState, OutOfRange, StageDivergence

STAGE_TOL = 1e-14
STAGE_MAX_ITER = 100
NEWTON_MAX_ITER = 20
STARTUP_SUBSTEPS = 20
STARTUP_STAGES = 5
_TABLEAU_DPS = 40


@dataclass(frozen=True)
class Trajectory:
    """Samples y(t_n) on a uniform grid t_n = t_0 + n*h (h may be negative).

    ``lo`` optionally holds the rounding remainders of ``states`` (the state is
    states + lo to better than double precision); the multistep recurrence uses
    them when seeding.
    """

    times: np.ndarray
    states: np.ndarray
    h: float
    velocities: Optional[np.ndarray] = None
    lo: Optional[np.ndarray] = None

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if self.velocities is not None and len(self.velocities) != len(self.states):
            raise ValueError("velocities and states differ in length")

    def __len__(self):
        return len(self.times)

    @property
    def final(self):
        return self.states[-1]

    def reversed(self):
        """The same samples in reverse order, stepping by -h."""
        vel = None if self.velocities is None else -self.velocities[::-1].copy()
        lo = None if self.lo is None else self.lo[::-1].copy()
        return Trajectory(self.times[::-1].copy(), self.states[::-1].copy(), -self.h, vel, lo)

    def tail(self, count):
        vel = None if self.velocities is None else self.velocities[-count:]
        lo = None if self.lo is None else self.lo[-count:]
        return Trajectory(self.times[-count:], self.states[-count:], self.h, vel, lo)

    def errors(self, problem):
        """Euclidean position error against the problem's exact solution."""
        exact = np.array([problem.exact(t) for t in self.times])
        return np.linalg.norm(self.states - exact, axis=1)

    def write_csv(self, stream, problem=None, decimate=1):
        """Columns t, y_1..y_d, then energy (when velocities are known) and
        error (when the problem has an exact solution)."""
        d = self.states.shape[1]
        with_energy = problem is not None and problem.invariants_fn is not None and self.velocities is not None
        with_error = problem is not None and problem.exact is not None
        header = ["t"] + [f"y_{i + 1}" for i in range(d)]
        header += ["energy"] * with_energy + ["error"] * with_error
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(header)
        for n in range(0, len(self.times), max(1, int(decimate))):
            row = [self.times[n], *self.states[n]]
            if with_energy:
                row.append(problem.energy(self.states[n], self.velocities[n]))
            if with_error:
                row.append(np.linalg.norm(self.states[n] - problem.exact(self.times[n])))
            writer.writerow([f"{float(x):.17g}" for x in row])


@dataclass(frozen=True)
class GaussTableau:
    stages: int
    nodes: np.ndarray
    weights: np.ndarray
    matrix: np.ndarray

    @property
    def order(self):
        return 2 * self.stages


def _legendre(n, x):
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0, p1 = mpmath.mpf(1), x
    for k in range(2, n + 1):
        p0, p1 = p1, ((2 * k - 1) * x * p1 - (k - 1) * p0) / k
    if n == 0:
        return p0, mpmath.mpf(0)
    return p1, n * (x * p1 - p0) / (x * x - 1)


@lru_cache(maxsize=None)
def gauss_tableau(stages):
    """s-stage Gauss-Legendre collocation tableau (order 2s).

    Nodes by Newton on the Legendre recurrence, weights from
    2 / ((1 - x**2) P_s'(x)**2), and the stage matrix from the collocation
    conditions sum_j A_ij c_j**(k-1) = c_i**k / k. Worked in 40-digit
    arithmetic, then rounded.
    """
    if not 1 <= stages <= 10:
        raise OutOfRange(f"stages must be in 1..10, got {stages}")
    s = stages
    with mpmath.workdps(_TABLEAU_DPS):
        xs, ws = [], []
        for i in range(1, s + 1):
            x = mpmath.cos(mpmath.pi * (i - mpmath.mpf(1) / 4) / (s + mpmath.mpf(1) / 2))
            for _ in range(100):
                p, dp = _legendre(s, x)
                dx = p / dp
                x -= dx
                if abs(dx) < mpmath.mpf(10) ** (-_TABLEAU_DPS + 5):
                    break
            _, dp = _legendre(s, x)
            xs.append(x)
            ws.append(2 / ((1 - x * x) * dp * dp))
        order = sorted(range(s), key=lambda i: xs[i])
        c = [(1 + xs[i]) / 2 for i in order]
        b = [ws[i] / 2 for i in order]
        vander = mpmath.matrix([[c[j] ** k for j in range(s)] for k in range(s)])
        rows = []
        for i in range(s):
            rhs = mpmath.matrix([c[i] ** (k + 1) / (k + 1) for k in range(s)])
            rows.append(mpmath.lu_solve(vander, rhs))
        matrix = np.array([[float(rows[i][j]) for j in range(s)] for i in range(s)])
        return GaussTableau(
            stages=s,
            nodes=np.array([float(x) for x in c]),
            weights=np.array([float(x) for x in b]),
            matrix=matrix,
        )


class _Kahan:
    """Compensated running sum of an array-valued quantity."""

    def __init__(self, value):
        self.sum = np.array(value, dtype=float)
        self.comp = np.zeros_like(self.sum)

    def add(self, delta):
        y = delta - self.comp
        t = self.sum + y
        self.comp = (t - self.sum) - y
        self.sum = t


def _newton_stages(problem, t, y, v, h, tab, abar, F):
    """Newton iteration on the stacked stage positions with an FD Jacobian."""
    s, d = tab.stages, len(y)
    base = y[None, :] + h * tab.nodes[:, None] * v[None, :]
    Y = base + h * h * (abar @ F)
    for _ in range(NEWTON_MAX_ITER):
        F = problem.rhs(t + tab.nodes * h, Y)
        G = (Y - base - h * h * (abar @ F)).ravel()
        J = np.eye(s * d)
        for i in range(s):
            scale = max(1.0, float(np.max(np.abs(Y[i]))))
            eps = 1e-7 * scale
            jac = np.empty((d, d))
            for k in range(d):
                yp = Y[i].copy()
                yp[k] += eps
                jac[:, k] = (problem.rhs(t + tab.nodes[i] * h, yp) - F[i]) / eps
            for r in range(s):
                J[r * d : (r + 1) * d, i * d : (i + 1) * d] -= h * h * abar[r, i] * jac
        dY = np.linalg.solve(J, -G).reshape(s, d)
        Y = Y + dY
        if np.max(np.abs(dY)) <= STAGE_TOL * max(1.0, float(np.max(np.abs(Y)))):
            return problem.rhs(t + tab.nodes * h, Y)
    raise StageDivergence(f"stage equations did not converge at t={t}")


def gauss_step(problem, t, y, v, h, tab, F=None):
    """One Gauss-Legendre step for y'' = f(t, y), in second-order form.

    Stage positions Y_i = y + c_i h v + h**2 sum_j (A**2)_ij f(Y_j); the update
    uses weights b_i (1 - c_i) for positions and b_i for velocities. Returns
    the increments (dy, dv) and the final stage forces.
    """
    abar = tab.matrix @ tab.matrix
    base = y[None, :] + h * tab.nodes[:, None] * v[None, :]
    if F is None:
        F = problem.rhs(t + tab.nodes * h, base)
    Y = base + h * h * (abar @ F)
    for _ in range(STAGE_MAX_ITER):
        F = problem.rhs(t + tab.nodes * h, Y)
        Y_new = base + h * h * (abar @ F)
        delta = np.max(np.abs(Y_new - Y))
        Y = Y_new
        if not np.isfinite(delta):
            break
        if delta <= STAGE_TOL * max(1.0, float(np.max(np.abs(Y)))):
            F = problem.rhs(t + tab.nodes * h, Y)
            break
    else:
        F = _newton_stages(problem, t, y, v, h, tab, abar, F)
    if not np.all(np.isfinite(F)):
        F = _newton_stages(problem, t, y, v, h, tab, abar, problem.rhs(t + tab.nodes * h, base))
    dy = h * v + h * h * ((tab.weights * (1 - tab.nodes)) @ F)
    dv = h * (tab.weights @ F)
    return dy, dv, F


def gauss_integrate(problem, tableau, h, n_steps, y0=None, v0=None, t0=0.0):
    """Integrate with a Gauss-Legendre tableau (or stage count) for n_steps steps.

    Positions and velocities are accumulated with compensated summation.
    Returns a Trajectory with n_steps + 1 samples including velocities.
    """
    tab = tableau if isinstance(tableau, GaussTableau) else gauss_tableau(int(tableau))
    y = _Kahan(problem.y0 if y0 is None else y0)
    v = _Kahan(problem.v0 if v0 is None else v0)
    d = len(y.sum)
    states = np.empty((n_steps + 1, d))
    vels = np.empty((n_steps + 1, d))
    lows = np.zeros((n_steps + 1, d))
    states[0], vels[0] = y.sum, v.sum
    F = None
    for n in range(n_steps):
        t = t0 + n * h
        dy, dv, F = gauss_step(problem, t, y.sum, v.sum, h, tab, F)
        y.add(dy)
        v.add(dv)
        states[n + 1], vels[n + 1], lows[n + 1] = y.sum, v.sum, -y.comp
    times = t0 + h * np.arange(n_steps + 1)
    return Trajectory(times=times, states=states, h=h, velocities=vels, lo=lows)


def bootstrap_startup(problem, h, count=STEPS, tableau=None):
    """First ``count`` samples on the grid 0, h, ..., (count-1) h from the
    5-stage Gauss solver run at h/20."""
    if count != STEPS:
        raise OutOfRange(f"the 10-step recurrence needs exactly {STEPS} startup values, got {count}")
    tab = tableau if tableau is not None else gauss_tableau(STARTUP_STAGES)
    fine = gauss_integrate(problem, tab, h / STARTUP_SUBSTEPS, STARTUP_SUBSTEPS * (count - 1))
    idx = np.arange(count) * STARTUP_SUBSTEPS
    return Trajectory(
        times=h * np.arange(count),
        states=fine.states[idx].copy(),
        h=h,
        velocities=fine.velocities[idx].copy(),
        lo=fine.lo[idx].copy(),
    )


def multistep_integrate(coeffs, problem, h, n_steps, startup):
    """Advance y_{n+10} = -sum_{j<10} a_j y_{n+j} + h**2 sum_j b_j f_{n+j}.

    The history is carried as unevaluated hi + lo pairs. Each new value is the
    correctly rounded sum of all terms (math.fsum), and its rounding remainder
    becomes the new lo, so long runs are not dominated by accumulated
    rounding. The last 10 startup samples seed the recurrence; the output holds
    the startup samples followed by n_steps new ones.
    """
    if len(startup) < STEPS:
        raise OutOfRange(f"multistep_integrate needs at least {STEPS} startup samples, got {len(startup)}")
    if coeffs.b[STEPS] != 0:
        raise ValueError("only explicit methods (b_10 = 0) are supported")
    seed = startup.tail(STEPS)
    if not np.allclose(np.diff(seed.times), h, rtol=1e-9, atol=0):
        raise ValueError("startup samples are not spaced by h")
    a = -np.asarray(coeffs.a[:STEPS], dtype=float)[:, None]
    hb = h * h * np.asarray(coeffs.b[:STEPS], dtype=float)
    active = np.flatnonzero(hb)
    hb = hb[active][:, None]
    t0 = float(seed.times[0])
    d = startup.states.shape[1]
    total = len(startup) + n_steps
    out = np.empty((total, d))
    out[: len(startup)] = startup.states
    out_lo = np.zeros((total, d))
    if startup.lo is not None:
        out_lo[: len(startup)] = startup.lo
    hi = np.array(seed.states, dtype=float)
    lo = np.zeros_like(hi) if seed.lo is None else np.array(seed.lo, dtype=float)
    F = np.array([problem.rhs(t0 + j * h, hi[j]) for j in range(STEPS)], dtype=float)
    fsum = math.fsum
    # Growth to inf/nan is the instability signal; report it, do not warn.
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for n in range(n_steps):
            terms = np.concatenate((a * hi, a * lo, hb * F[active])).T.tolist()
            try:
                new_hi = [fsum(col) for col in terms]
            except (OverflowError, ValueError):
                # fsum raises rather than returning inf/nan
                new_hi = [math.nan]
            if not all(map(math.isfinite, new_hi)):
                raise NonFiniteState(f"non-finite state after {n + 1} steps", step=n + 1)
            new_lo = [fsum(col + [-x]) for col, x in zip(terms, new_hi)]
            hi[:-1] = hi[1:]
            lo[:-1] = lo[1:]
            F[:-1] = F[1:]
            hi[-1] = new_hi
            lo[-1] = new_lo
            F[-1] = problem.rhs(t0 + (n + STEPS) * h, hi[-1])
            out[len(startup) + n] = hi[-1]
            out_lo[len(startup) + n] = lo[-1]
    times = float(startup.times[0]) + h * np.arange(total)
    return Trajectory(times=times, states=out, h=h, lo=out_lo)
