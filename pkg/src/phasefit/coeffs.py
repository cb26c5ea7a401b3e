"""Coefficients of the 10-step symmetric method and its phase-fitted variants.

Every member of the family shares the a-vector of the classical method. The
b-vector of PF-Dk at scaled frequency ``v = omega*h`` is fixed by five linear
conditions: vanishing order constants C_2, C_4, ..., C_{2(4-k)} and vanishing
of the phase-lag numerator and its first k derivatives (in s) at s = v.

Two independent routes produce the b-vector:

* the published Taylor series in v**2 (`taylor_coefficients`), accurate for
  small v;
* a linear solve of the fitting conditions (`solve_coefficients`).

The solve is carried out on the perturbation ``delta = b - b_classical``,
expressed through its centered moments ``mu_2n = sum_j (j-5)**(2n) delta_j``.
In those unknowns each order-constant condition is simply ``mu_2n = 0`` and
the trigonometric rows separate by powers of v, so the system stays well
conditioned down to v ~ 1e-3. The residual of the classical method, which
cancels to O(v**12), comes from its exact rational Taylor series.
"""

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath
import numpy as np
from scipy import linalg

from ._printed import TAYLOR_SERIES
from .errors import DenominatorUnderflow, OutOfRange, SingularSystem

STEPS = 10
A_VECTOR = (1, -1, 1, -1, 1, -2, 1, -1, 1, -1, 1)
_B_HALF = (
    Fraction(0),
    Fraction(399187, 241920),
    Fraction(-17327, 8640),
    Fraction(597859, 60480),
    Fraction(-704183, 60480),
    Fraction(465133, 24192),
)
BASE_B = _B_HALF + _B_HALF[-2::-1]
PLTE_FACTOR = Fraction(52559, 912384)

V_SWITCH = 0.05
V_TAYLOR_MAX = 0.5
V_MAX = 3.0
COND_CAP = 1e12
# Above this v the trigonometric rows are summed directly instead of by series.
SERIES_V_MAX = 1.0
_N_SERIES = 32
_D0_GUARD = 1e-40
_CLOSED_FORM_DPS = 80

LEVELS = (-1, 0, 1, 2, 3, 4)
METHOD_NAMES = {
    -1: "classical",
    0: "pf-d0",
    1: "pf-d1",
    2: "pf-d2",
    3: "pf-d3",
    4: "pf-d4",
}


def method_name(level):
    return METHOD_NAMES[level]


def parse_method(name):
    """Map ``classical``/``pf-d0``..``pf-d4`` (or an integer string) to a level."""
    key = str(name).strip().lower()
    for level, label in METHOD_NAMES.items():
        if key in (label, label.replace("-", ""), str(level)):
            return level
    if key in ("base", "qt", "quinlan-tremaine"):
        return -1
    raise ValueError(f"unknown method {name!r}")


def _mirror(half):
    """Extend b_0..b_5 to the symmetric 11-vector."""
    half = tuple(half)
    return half + half[-2::-1]


@dataclass(frozen=True)
class MethodCoefficients:
    """a and b vectors (indices 0..10) of one member of the family.

    ``level`` is -1 for the classical method and k for PF-Dk. ``path`` records
    how b was produced: ``exact``, ``taylor`` or ``solve``.
    """

    a: tuple
    b: tuple
    v: float
    level: int
    path: str = "exact"
    exact_b: tuple = None
    condition: float = None

    def __post_init__(self):
        if len(self.a) != STEPS + 1 or len(self.b) != STEPS + 1:
            raise ValueError("a and b must have 11 entries")
        if self.level not in LEVELS:
            raise ValueError(f"level must be one of {LEVELS}, got {self.level}")
        if self.v < 0:
            raise ValueError("v must be non-negative")
        if self.v == 0 and self.level != -1:
            raise ValueError("v = 0 is only valid for the classical method")
        if self.a[STEPS] != 1:
            raise ValueError("a[10] must be 1")
        if self.b[0] != 0 or self.b[STEPS] != 0:
            raise ValueError("b[0] and b[10] must vanish")
        for j in range(STEPS + 1):
            if self.a[j] != self.a[STEPS - j] or self.b[j] != self.b[STEPS - j]:
                raise ValueError("coefficients are not symmetric")

    @property
    def name(self):
        return METHOD_NAMES[self.level]

    @property
    def a_array(self):
        return np.asarray(self.a, dtype=float)

    @property
    def b_array(self):
        return np.asarray(self.b, dtype=float)


@dataclass(frozen=True)
class FittingConditions:
    """The 5x5 linear system whose solution gives PF-Dk at frequency v.

    Unknowns are the centered moments mu_0, mu_2, ..., mu_8 of
    ``b - b_classical``. Rows ``0 .. 3-level`` pin ``mu_2n = 0`` (equivalent
    to C_{2n+2} = 0); the remaining ``level+1`` rows require the m-th s-derivative
    of the phase-lag numerator to vanish at s = v, m = 0..level.
    """

    level: int
    v: float
    matrix: np.ndarray
    rhs: np.ndarray


def base_coefficients():
    """The classical 10-step method, b held exactly as rationals."""
    return MethodCoefficients(
        a=tuple(float(x) for x in A_VECTOR),
        b=tuple(float(x) for x in BASE_B),
        v=0.0,
        level=-1,
        path="exact",
        exact_b=BASE_B,
    )


def _check_level(level):
    if level not in (0, 1, 2, 3, 4):
        raise OutOfRange(f"tuning level must be in 0..4, got {level}")


def taylor_coefficients(level, v):
    """Evaluate the published series for b_1..b_5 of PF-D(level) at v.

    Only valid for ``0 <= v <= V_TAYLOR_MAX``; the series are truncated after
    the v**8 term.
    """
    _check_level(level)
    if not 0 <= v <= V_TAYLOR_MAX:
        raise OutOfRange(f"Taylor series valid for 0 <= v <= {V_TAYLOR_MAX}, got v={v}")
    v2 = v * v
    out = np.empty(5)
    for i, series in enumerate(TAYLOR_SERIES[level]):
        acc = 0.0
        for c in reversed(series):
            acc = acc * v2 + float(c)
        out[i] = acc
    return out


# -- moment machinery --------------------------------------------------------


def _moment_row(n):
    """Weights of b_1..b_5 in mu_2n = sum_j (j-5)**(2n) b_j (symmetric b)."""
    return [Fraction(2 * (5 - i) ** (2 * n)) for i in range(1, 5)] + [Fraction(int(n == 0))]


def _rational_inverse(rows):
    n = len(rows)
    aug = [list(r) + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(rows)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [x / p for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return [row[n:] for row in aug]


def _cos_series(weights, center, n_terms):
    """Coefficients of s**(2m) in ``center + 2*sum_j w_j cos(j s)``.

    ``weights[j-1]`` multiplies cos(j s), j = 1..len(weights).
    """
    out = []
    for m in range(n_terms):
        mu = sum(2 * w * Fraction(j) ** (2 * m) for j, w in enumerate(weights, start=1))
        if m == 0:
            mu += center
        out.append((-1) ** m * mu / math.factorial(2 * m))
    return out


def _b_weights(x):
    """Split b_1..b_5 into (cos weights for j = 1..4, center value)."""
    return [x[4 - j] for j in range(1, 5)], x[4]


_MOMENT_INV = _rational_inverse([_moment_row(n) for n in range(5)])
# _BASIS[n] is the b_1..b_5 perturbation whose moments are e_n.
_BASIS = [tuple(_MOMENT_INV[i][n] for i in range(5)) for n in range(5)]
_BASIS_FLOAT = np.array([[float(x) for x in vec] for vec in _BASIS])


def _basis_series():
    rows = []
    for vec in _BASIS:
        w, c = _b_weights(vec)
        rows.append([float(t) for t in _cos_series(w, c, _N_SERIES)])
    return np.array(rows)


def _residual_series_exact():
    """Exact s**(2m) coefficients of N_classical(s) = rho(s) + s**2 B(s)."""
    a_w = [Fraction(A_VECTOR[5 - j]) for j in range(1, 6)]
    rho = _cos_series(a_w, Fraction(A_VECTOR[5]), _N_SERIES)
    b_w, b_c = _b_weights(BASE_B[1:6])
    bser = _cos_series(b_w, b_c, _N_SERIES)
    return [rho[m] + (bser[m - 1] if m else 0) for m in range(_N_SERIES)]


_BASIS_SERIES = _basis_series()
RESIDUAL_SERIES = tuple(_residual_series_exact())
_RESIDUAL_FLOAT = np.array([float(t) for t in RESIDUAL_SERIES])


def _series_derivative(coef, shift, order, s):
    """order-th derivative of sum_m coef[..., m] * s**(2m+shift) at s."""
    powers = 2 * np.arange(coef.shape[-1]) + shift
    fall = np.ones_like(powers, dtype=float)
    for k in range(order):
        fall = fall * (powers - k)
    mask = powers >= order
    terms = np.where(mask, fall * s ** np.where(mask, powers - order, 0), 0.0)
    return coef @ terms


def _cos_derivative(j, order, s):
    return j**order * math.cos(j * s + order * math.pi / 2)


def _s2_cos_sum_derivative(weights, center, order, s):
    """order-th derivative of s**2 * (center + 2*sum_j w_j cos(j s))."""
    total = 0.0
    for k in range(min(order, 2) + 1):
        poly = (s * s, 2 * s, 2.0)[k]
        n = order - k
        inner = 2 * sum(w * _cos_derivative(j, n, s) for j, w in enumerate(weights, start=1))
        if n == 0:
            inner += center
        total += math.comb(order, k) * poly * inner
    return total


def _residual_derivative_direct(order, s):
    a_part = 2 * sum(A_VECTOR[5 - j] * _cos_derivative(j, order, s) for j in range(1, 6))
    if order == 0:
        a_part += A_VECTOR[5]
    b_w, b_c = _b_weights([float(x) for x in BASE_B[1:6]])
    return a_part + _s2_cos_sum_derivative(b_w, b_c, order, s)


def fitting_conditions(level, v):
    """Assemble the fitting system for PF-D(level) at scaled frequency v."""
    _check_level(level)
    n_poly = 4 - level
    matrix = np.zeros((5, 5))
    rhs = np.zeros(5)
    for n in range(n_poly):
        matrix[n, n] = 1.0
    for m in range(level + 1):
        row = n_poly + m
        if v <= SERIES_V_MAX:
            matrix[row] = _series_derivative(_BASIS_SERIES, 2, m, v)
            rhs[row] = -_series_derivative(_RESIDUAL_FLOAT, 0, m, v)
        else:
            for n in range(5):
                w, c = _b_weights(_BASIS_FLOAT[n])
                matrix[row, n] = _s2_cos_sum_derivative(w, c, m, v)
            rhs[row] = -_residual_derivative_direct(m, v)
    return FittingConditions(level=level, v=v, matrix=matrix, rhs=rhs)


def _solve_refined(matrix, rhs, sweeps=2):
    """Equilibrate, factor with partial pivoting, refine; return (x, cond)."""
    col = np.abs(matrix).max(axis=0)
    col[col == 0] = 1.0
    scaled = matrix / col
    row = np.abs(scaled).max(axis=1)
    row[row == 0] = 1.0
    scaled = scaled / row[:, None]
    b = rhs / row
    cond = np.linalg.cond(scaled)
    if not np.isfinite(cond) or cond > COND_CAP:
        raise SingularSystem(f"fitting system condition number {cond:.3g} exceeds cap", cond)
    lu = linalg.lu_factor(scaled, check_finite=True)
    y = linalg.lu_solve(lu, b)
    for _ in range(sweeps):
        resid = np.array(
            [math.fsum([b[i]] + [-scaled[i, k] * y[k] for k in range(len(y))]) for i in range(len(y))]
        )
        y = y + linalg.lu_solve(lu, resid)
    return y / col, cond


def solve_coefficients(level, v):
    """PF-D(level) coefficients at v from a linear solve of the fitting system."""
    _check_level(level)
    if not 0 < v <= V_MAX:
        raise OutOfRange(f"v must lie in (0, {V_MAX}], got v={v}")
    cond_sys = fitting_conditions(level, v)
    moments, cond = _solve_refined(cond_sys.matrix, cond_sys.rhs)
    delta = moments @ _BASIS_FLOAT
    half = [0.0] + [float(BASE_B[i]) + delta[i - 1] for i in range(1, 6)]
    return MethodCoefficients(
        a=tuple(float(x) for x in A_VECTOR),
        b=_mirror(half),
        v=float(v),
        level=level,
        path="solve",
        condition=float(cond),
    )


def closed_form_pf_d0(v):
    """b_1..b_5 of PF-D0 from the published trigonometric formulas.

    The formulas cancel catastrophically for small v, so they are evaluated in
    extended precision; below v ~ 1e-4 the denominator is treated as zero.
    The published b_1 numerator is sign-flipped; it is corrected here.
    """
    if not 0 < v <= V_MAX:
        raise OutOfRange(f"v must lie in (0, {V_MAX}], got v={v}")
    with mpmath.workdps(_CLOSED_FORM_DPS):
        x = mpmath.mpf(v)
        c = mpmath.cos(x)
        v2 = x * x
        d0 = v2 * (c**4 + 6 * c**2 + 1 - 4 * c - 4 * c**3)
        if abs(d0) < _D0_GUARD:
            raise DenominatorUnderflow(f"D0({v}) = {mpmath.nstr(d0, 3)} is below the guard")
        # The published b_1 numerator has the opposite overall sign; negated here.
        num1 = -(
            -16128 * c**3 + 45139 * c**3 * v2 + 6048 * c**2 - 73215 * c**2 * v2
            + 3024 * c + 47553 * c * v2 - 11917 * v2 + 16128 * c**5 - 8064 * c**4 - 1008
        )
        num2 = (
            -32256 * c**4 + 45139 * c**4 * v2 - 64512 * c**3 + 24192 * c**2
            - 22026 * c**2 * v2 + 9656 * c * v2 + 12096 * c - 2529 * v2 - 4032 + 64512 * c**5
        )
        num3 = (
            56448 * c**4 - 73215 * c**4 * v2 + 112896 * c**3 - 23113 * c**3 * v2
            - 42336 * c**2 + 73215 * c**2 * v2 - 40011 * c * v2 - 21168 * c + 10204 * v2
            + 7056 - 112896 * c**5
        )
        num4 = (
            -225792 * c**4 + 325629 * c**4 * v2 - 451584 * c**3 - 38624 * c**3 * v2
            - 96246 * c**2 * v2 + 169344 * c**2 + 28968 * c * v2 + 84672 * c + 451584 * c**5
            - 8047 * v2 - 28224
        )
        num5 = (
            -388196 * c**4 * v2 + 282240 * c**4 + 564480 * c**3 - 27081 * c**3 * v2
            + 233349 * c**2 * v2 - 211680 * c**2 - 111571 * c * v2 - 105840 * c + 28899 * v2
            - 564480 * c**5 + 35280
        )
        scales = (8064, 4032, 2016, 4032, 4032)
        return np.array([float(n / (s * d0)) for n, s in zip((num1, num2, num3, num4, num5), scales)])


@lru_cache(maxsize=4096)
def coefficients(level, v=0.0):
    """Dispatch to the classical, Taylor or solve path.

    Level -1 ignores v. For fitted levels the Taylor series is used below
    ``V_SWITCH`` and the linear solve above it.
    """
    if level == -1:
        return base_coefficients()
    _check_level(level)
    if not v > 0:
        raise OutOfRange("fitted methods need v > 0")
    if v < V_SWITCH:
        half = [0.0] + list(taylor_coefficients(level, v))
        return MethodCoefficients(
            a=tuple(float(x) for x in A_VECTOR),
            b=_mirror(half),
            v=float(v),
            level=level,
            path="taylor",
        )
    return solve_coefficients(level, v)


def write_coefficients_csv(methods, stream):
    """Write ``level, v, path, j, a_j, b_j`` rows for each MethodCoefficients."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["level", "v", "path", "j", "a_j", "b_j"])
    for mc in methods:
        for j in range(STEPS + 1):
            writer.writerow(
                [mc.level, f"{mc.v:.17g}", mc.path, j, f"{mc.a[j]:.17g}", f"{mc.b[j]:.17g}"]
            )
