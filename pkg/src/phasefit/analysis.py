"""Phase-lag, order constants and PLTE of symmetric 10-step methods."""

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import mpmath

from .coeffs import PLTE_FACTOR, coefficients
from .errors import OutOfRange, ZeroDenominator

HALF = 5
FD_DPS = 40
K_MAX_LIMIT = 6


@dataclass(frozen=True)
class PhaseLagReport:
    s: float
    pl: float
    derivatives: tuple
    denominator: float
    level: int = None
    v: float = None


@dataclass(frozen=True)
class OrderReport:
    constants: tuple
    order: int
    leading: object
    exact: bool = False


@dataclass(frozen=True)
class PLTEOperator:
    """``factor * h**12 * (D**2 + w**2)**power y**(base_derivative)``."""

    factor: Fraction
    power: int
    base_derivative: int

    def terms(self):
        """Binomial expansion as {(power of w, derivative of y): coefficient}."""
        return {
            (2 * m, self.base_derivative + 2 * (self.power - m)): self.factor * math.comb(self.power, m)
            for m in range(self.power + 1)
        }


def _a_coeffs(coeffs, s2):
    return [coeffs.a[HALF - j] + s2 * coeffs.b[HALF - j] for j in range(HALF + 1)]


def phase_lag_parts(coeffs, s):
    """Numerator and denominator of the phase-lag formula at s (floats)."""
    A = _a_coeffs(coeffs, s * s)
    num = math.fsum([2 * A[j] * math.cos(j * s) for j in range(1, HALF + 1)] + [A[0]])
    den = 2 * math.fsum(j * j * A[j] for j in range(1, HALF + 1))
    return num, den


def phase_lag(coeffs, s, dps=None):
    """Phase lag [2 sum A_j cos(js) + A_0] / [2 sum j**2 A_j] at s.

    With ``dps`` the formula is evaluated in mpmath at that many digits; the
    coefficients are taken as exact binary values.
    """
    if dps is None:
        num, den = phase_lag_parts(coeffs, s)
        if den == 0:
            raise ZeroDenominator(f"phase-lag denominator vanishes at s={s}")
        return num / den
    with mpmath.workdps(dps):
        x = mpmath.mpf(s)
        s2 = x * x
        A = [mpmath.mpf(coeffs.a[HALF - j]) + s2 * mpmath.mpf(coeffs.b[HALF - j]) for j in range(HALF + 1)]
        num = A[0] + 2 * mpmath.fsum(A[j] * mpmath.cos(j * x) for j in range(1, HALF + 1))
        den = 2 * mpmath.fsum(j * j * A[j] for j in range(1, HALF + 1))
        if den == 0:
            raise ZeroDenominator(f"phase-lag denominator vanishes at s={s}")
        return num / den


@lru_cache(maxsize=None)
def central_weights(order):
    """Exact weights of the 4th-order central stencil for the order-th derivative.

    Returns (offsets, weights) with f^(order)(x) ~ sum w_k f(x + k h) / h**order.
    """
    p = (order + 1) // 2 + 1
    offsets = list(range(-p, p + 1))
    n = len(offsets)
    rows = [[Fraction(k) ** q for k in offsets] for q in range(n)]
    rhs = [Fraction(math.factorial(order)) if q == order else Fraction(0) for q in range(n)]
    # Gauss-Jordan over the rationals; the system is a small Vandermonde.
    aug = [r + [b] for r, b in zip(rows, rhs)]
    for col in range(n):
        piv = next(r for r in range(col, n) if aug[r][col] != 0)
        aug[col], aug[piv] = aug[piv], aug[col]
        pv = aug[col][col]
        aug[col] = [x / pv for x in aug[col]]
        for r in range(n):
            if r != col and aug[r][col] != 0:
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(offsets), tuple(row[-1] for row in aug)


def fd_derivative(func, x, order, step):
    """order-th derivative of func at x: 4th-order central differences plus two
    Richardson levels (steps h, h/2, h/4), eliminating the h**4 and h**6 terms.

    ``func`` may return mpmath numbers; the arithmetic follows its type.
    """
    offsets, weights = central_weights(order)

    def stencil(h):
        return sum(w.numerator * func(x + k * h) / w.denominator for k, w in zip(offsets, weights) if w) / h**order

    d = [stencil(step / 2**i) for i in range(3)]
    r1 = [(16 * d[i + 1] - d[i]) / 15 for i in range(2)]
    return (64 * r1[1] - r1[0]) / 63


def phase_lag_derivatives(level, v, k_max=4, coeffs=None):
    """Phase lag of PF-D(level) at s = v and its s-derivatives 1..k_max.

    Derivatives come from `fd_derivative` with base step 1e-3*max(1, v) applied
    to the phase lag evaluated at 40 digits, so roundoff does not swamp the
    high-order stencils.
    """
    if k_max > K_MAX_LIMIT or k_max < 0:
        raise OutOfRange(f"k_max must be in 0..{K_MAX_LIMIT}")
    if coeffs is None:
        coeffs = coefficients(level, v)
    step = 1e-3 * max(1.0, v)
    with mpmath.workdps(FD_DPS):
        x = mpmath.mpf(v)
        step = mpmath.mpf(step)

        def pl(s):
            return phase_lag(coeffs, s, dps=FD_DPS)

        derivs = tuple(float(fd_derivative(pl, x, m, step)) for m in range(1, k_max + 1))
    num, den = phase_lag_parts(coeffs, v)
    return PhaseLagReport(
        s=float(v),
        pl=phase_lag(coeffs, v),
        derivatives=derivs,
        denominator=den,
        level=coeffs.level,
        v=coeffs.v,
    )


def order_constants(coeffs, q_max=14, rtol=1e-14, center=0):
    """Order constants C_0..C_q_max and the algebraic order they imply.

    ``center`` shifts the expansion point from y(x_n) to y(x_n + center*h);
    with center=5 a symmetric method has all odd constants identically zero.
    Exact rational arithmetic is used when ``coeffs.exact_b`` is present.
    Otherwise a constant counts as zero when it is below ``rtol`` times the
    magnitude of the terms summed to form it. For fitted methods the leading
    constant scales like v**(2 level + 2), so at small v it drops under the
    rounding of the float coefficients and the detected order rises.
    """
    if q_max > 14:
        raise OutOfRange("q_max must be <= 14")
    exact = coeffs.exact_b is not None
    js = range(len(coeffs.a))
    offsets = [Fraction(j) - Fraction(center) for j in js]
    constants = []
    zero = []
    for q in range(q_max + 1):
        if exact:
            a = [Fraction(int(x)) for x in coeffs.a]
            b = coeffs.exact_b
            c = sum(offsets[j] ** q * a[j] for j in js) / math.factorial(q)
            if q >= 2:
                c -= sum(offsets[j] ** (q - 2) * b[j] for j in js) / math.factorial(q - 2)
            constants.append(c)
            zero.append(c == 0)
        else:
            x = [float(o) for o in offsets]
            terms = [x[j] ** q * coeffs.a[j] / math.factorial(q) for j in js]
            if q >= 2:
                terms += [-(x[j] ** (q - 2)) * coeffs.b[j] / math.factorial(q - 2) for j in js]
            c = math.fsum(terms)
            scale = math.fsum(abs(t) for t in terms)
            constants.append(c)
            zero.append(abs(c) <= rtol * scale)
    order = -2
    while order + 3 <= q_max and zero[order + 2] and zero[order + 3]:
        order += 2
    leading = constants[order + 2] if order + 2 <= q_max else None
    return OrderReport(constants=tuple(constants), order=order, leading=leading, exact=exact)


def plte_operator(level):
    """PLTE of the classical method (level -1) or PF-D(level) in operator form."""
    if level not in (-1, 0, 1, 2, 3, 4):
        raise OutOfRange(f"level must be in -1..4, got {level}")
    return PLTEOperator(factor=PLTE_FACTOR, power=level + 1, base_derivative=10 - 2 * level)
