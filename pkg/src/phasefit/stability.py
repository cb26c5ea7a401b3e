"""Characteristic roots and stability maps on the (v, s) plane.

For the test equation y'' = -sigma**2 y with s = sigma*h, a method built at
v = omega*h has characteristic polynomial

    z**5 * [ sum_j A_j(s**2, v) (z**j + z**-j) + A_0 ],   A_j = a_{5-j} + s**2 b_{5-j}

which is palindromic, so its roots come in pairs (z, 1/z). Stability therefore
means every root on the unit circle and simple; only the principal pair near
z = 1 may coincide (at s = 0).
"""

import csv
from dataclasses import dataclass

import numpy as np

from .coeffs import coefficients
from .errors import NoConvergence, PhaseFitError

DEFAULT_TOLERANCE = 1e-8
DEFAULT_CLUSTER = 1e-6
MAX_ITER = 200
RESIDUAL_RTOL = 1e-12

STABLE, UNSTABLE, FAILED = 2, 0, 1
PGM_LEVELS = {STABLE: 255, FAILED: 128, UNSTABLE: 0}
STATE_NAMES = {STABLE: "stable", UNSTABLE: "unstable", FAILED: "failed"}


@dataclass(frozen=True)
class CharacteristicPolynomial:
    """Coefficients in ascending powers of z (degree 10)."""

    coefficients: np.ndarray
    s: float

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(z, self.coefficients)


@dataclass(frozen=True)
class StabilityGrid:
    """Tri-state stability over a (v, s) lattice; ``state[i, j]`` is at
    ``(v_axis[i], s_axis[j])``."""

    level: int
    v_axis: np.ndarray
    s_axis: np.ndarray
    state: np.ndarray
    tolerance: float
    failures: int

    @property
    def stable(self):
        return self.state == STABLE

    def to_pgm(self):
        """Binary P5 image: columns follow v, rows run from high s to low s."""
        pixels = np.vectorize(PGM_LEVELS.get)(self.state.T[::-1]).astype(np.uint8)
        height, width = pixels.shape
        return f"P5\n{width} {height}\n255\n".encode("ascii") + pixels.tobytes()

    def write_csv(self, stream):
        writer = csv.writer(stream, lineterminator="\n")
        writer.writerow(["v", "s", "state"])
        for i, v in enumerate(self.v_axis):
            for j, s in enumerate(self.s_axis):
                writer.writerow([f"{v:.17g}", f"{s:.17g}", STATE_NAMES[int(self.state[i, j])]])


def _poly_rows(coeffs, s):
    """Ascending-power coefficient rows, one per entry of the 1-d array s."""
    s2 = np.asarray(s, dtype=float) ** 2
    a = coeffs.a_array
    b = coeffs.b_array
    # z**(5+j) and z**(5-j) both carry A_j = a_{5-j} + s**2 b_{5-j}; that is
    # exactly a_k + s**2 b_k at power k by symmetry.
    return a[None, :] + s2[:, None] * b[None, :]


def characteristic_polynomial(coeffs, s):
    return CharacteristicPolynomial(coefficients=_poly_rows(coeffs, [s])[0], s=float(s))


def _horner(coef_desc, z):
    """p(z) and p'(z) for batched descending coefficients (B, n+1), z (B, n)."""
    p = np.broadcast_to(coef_desc[:, :1], z.shape).astype(complex)
    dp = np.zeros_like(p)
    for k in range(1, coef_desc.shape[1]):
        dp = dp * z + p
        p = p * z + coef_desc[:, k : k + 1]
    return p, dp


def aberth(coef_asc, max_iter=MAX_ITER, radius=1.1):
    """All roots of each polynomial in a batch by Aberth-Ehrlich iteration.

    ``coef_asc`` has shape (B, n+1) with the leading coefficient last. Returns
    an array (B, n) of complex roots. Raises NoConvergence if any polynomial
    fails the backward-error test ``|p(z)| <= 1e-12 * sum|c_k| max(1,|z|)**k``.
    """
    coef_asc = np.atleast_2d(np.asarray(coef_asc, dtype=float))
    desc = coef_asc[:, ::-1] / coef_asc[:, -1:]
    batch, n = desc.shape[0], desc.shape[1] - 1
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = np.tile(radius * np.exp(1j * angles), (batch, 1))
    active = np.ones(batch, dtype=bool)
    eye = np.eye(n, dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        za = z[active]
        p, dp = _horner(desc[active], za)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = p / dp
            diff = za[:, :, None] - za[:, None, :]
            diff[:, eye] = 1.0
            inv = 1.0 / diff
            inv[:, eye] = 0.0
            w = ratio / (1.0 - ratio * inv.sum(axis=2))
        w = np.where(np.isfinite(w), w, 0.0)
        za = za - w
        z[active] = za
        done = np.all(np.abs(w) <= 4 * np.finfo(float).eps * np.maximum(1.0, np.abs(za)), axis=1)
        idx = np.flatnonzero(active)
        active[idx[done]] = False
    p, _ = _horner(desc, z)
    scale = np.abs(desc).sum(axis=1, keepdims=True) * np.maximum(1.0, np.abs(z)) ** n
    bad = ~np.all(np.abs(p) <= RESIDUAL_RTOL * scale, axis=1)
    if bad.any():
        raise NoConvergence(f"Aberth iteration failed for {int(bad.sum())} polynomial(s)")
    return z


def _sorted_roots(z):
    order = np.lexsort((np.angle(z), -np.abs(z)))
    return z[order]


def characteristic_roots(coeffs, s):
    """The 10 characteristic roots at s, sorted by decreasing magnitude."""
    z = aberth(_poly_rows(coeffs, [s]))[0]
    return _sorted_roots(z)


def principal_pair(roots):
    """Indices of the two roots with smallest |arg z| (the pair tracking e^{+-is})."""
    roots = np.asarray(roots)
    return np.argsort(np.abs(np.angle(roots)) + 1e-3 * np.abs(np.abs(roots) - 1), kind="stable")[:2]


def principal_phase(coeffs, s):
    """lambda(s): argument of the principal root, so that PL = s - lambda(s)."""
    roots = characteristic_roots(coeffs, s)
    i, j = principal_pair(roots)
    return float(np.mean(np.abs(np.angle(roots[[i, j]]))))


def classify(roots, tolerance=DEFAULT_TOLERANCE, cluster=DEFAULT_CLUSTER):
    """True when all roots lie in |z| <= 1 + tolerance and unit-circle roots are
    simple, the principal pair (which may merge at z = 1) excepted."""
    roots = np.asarray(roots)
    mags = np.abs(roots)
    if np.any(mags > 1 + tolerance):
        return False
    principal = set(principal_pair(roots).tolist())
    if any(abs(mags[i] - 1) > tolerance for i in principal):
        return False
    on_circle = [i for i in range(len(roots)) if mags[i] >= 1 - tolerance and i not in principal]
    for i in on_circle:
        others = np.delete(np.arange(len(roots)), i)
        if np.any(np.abs(roots[others] - roots[i]) < cluster):
            return False
    return True


def _column_states(coeffs, s_axis, tolerance, cluster):
    try:
        roots = aberth(_poly_rows(coeffs, s_axis))
    except NoConvergence:
        # Retry one point at a time so a single bad polynomial only costs itself.
        states = np.empty(len(s_axis), dtype=np.int8)
        for j, s in enumerate(s_axis):
            try:
                r = aberth(_poly_rows(coeffs, [s]))[0]
            except NoConvergence:
                states[j] = FAILED
            else:
                states[j] = STABLE if classify(r, tolerance, cluster) else UNSTABLE
        return states
    return np.array([STABLE if classify(r, tolerance, cluster) else UNSTABLE for r in roots], dtype=np.int8)


def _axis(rng, n):
    if isinstance(rng, (int, float)):
        return np.array([float(rng)])
    lo, hi = rng
    if n < 2:
        raise ValueError("resolution must be at least 2 per axis")
    return np.linspace(float(lo), float(hi), int(n))


def stability_grid(
    level,
    v_range=(0.0, 3.0),
    s_range=(0.0, 3.0),
    resolution=300,
    tolerance=DEFAULT_TOLERANCE,
    cluster=DEFAULT_CLUSTER,
):
    """Classify every lattice point of the (v, s) rectangle.

    ``resolution`` is an int or a (n_v, n_s) pair. A scalar range gives a
    single-point axis. Points whose coefficients cannot be generated (for
    example v = 0 for a fitted method) are marked FAILED, never raised.
    """
    n_v, n_s = (resolution, resolution) if np.isscalar(resolution) else resolution
    v_axis = _axis(v_range, n_v)
    s_axis = _axis(s_range, n_s)
    state = np.empty((len(v_axis), len(s_axis)), dtype=np.int8)
    failures = 0
    if level == -1:
        column = _column_states(coefficients(-1), s_axis, tolerance, cluster)
        state[:] = column[None, :]
        failures = int(np.sum(column == FAILED)) * len(v_axis)
    else:
        for i, v in enumerate(v_axis):
            try:
                mc = coefficients(level, float(v))
            except PhaseFitError:
                state[i] = FAILED
                failures += len(s_axis)
                continue
            state[i] = _column_states(mc, s_axis, tolerance, cluster)
            failures += int(np.sum(state[i] == FAILED))
    return StabilityGrid(
        level=level,
        v_axis=v_axis,
        s_axis=s_axis,
        state=state,
        tolerance=tolerance,
        failures=failures,
    )
