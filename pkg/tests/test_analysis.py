from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from phasefit import analysis, coeffs
from phasefit._printed import PLTE_TERMS
from phasefit.errors import OutOfRange

C12 = Fraction(52559, 912384)


# -- phase lag ------------------------------------------------------------------


@pytest.mark.parametrize("level", range(5))
@pytest.mark.parametrize("v", [0.1, 0.5, 1.0, 2.0])
def test_phase_lag_vanishes_at_fitting_frequency(level, v):
    mc = coeffs.coefficients(level, v)
    assert abs(analysis.phase_lag(mc, v)) <= 1e-12
    assert abs(float(oracles.phase_lag(mc.b[:6], v))) <= 1e-12


@settings(max_examples=40, deadline=None)
@given(level=st.integers(-1, 4), v=st.floats(0.05, 3.0), s=st.floats(0.01, 3.0))
def test_phase_lag_matches_oracle(level, v, s):
    mc = coeffs.coefficients(level, v)
    ours = analysis.phase_lag(mc, s, dps=40)
    ref = oracles.phase_lag(mc.b[:6], s)
    assert abs(float(ours - ref)) <= 1e-30 * max(1.0, abs(float(ref)))


def test_base_numerator_leading_term():
    # Exact rational coefficients: the float ones carry ~1e-16 rounding,
    # which swamps s**12 at small s.
    with mpmath.workdps(60):
        for s in ("0.05", "0.02"):
            x = mpmath.mpf(s)
            ratio = oracles.numerator(oracles.B_BASE, x) / x**12
            assert float(ratio) == pytest.approx(float(C12), rel=5 * float(x) ** 2)
        assert float(oracles.denominator(oracles.B_BASE, mpmath.mpf(0))) == 30.0


def test_base_exponent_by_log_fit():
    s = np.array([0.02, 0.04, 0.08])
    pl = np.array([float(oracles.phase_lag(oracles.B_BASE, x)) for x in s])
    slope = np.polyfit(np.log(s), np.log(pl), 1)[0]
    assert slope == pytest.approx(12.0, abs=0.02)


def test_float_phase_lag_hits_rounding_floor():
    # Where s**12 C12/30 falls below the coefficient rounding, the float
    # coefficients no longer show the exponent; documents the floor.
    mc = coeffs.coefficients(-1)
    assert abs(float(analysis.phase_lag(mc, 0.02, dps=60))) < 1e-16


def test_residual_series_starts_at_s12():
    # entry m is the coefficient of s**(2m)
    assert all(t == 0 for t in coeffs.RESIDUAL_SERIES[:6])
    assert coeffs.RESIDUAL_SERIES[6] == C12


@pytest.mark.parametrize("level", [-1, 0, 2, 4])
@pytest.mark.parametrize("s", [0.1, 0.05])
def test_formula_tracks_definition(level, s):
    # The formula is the leading-order form of s*(lambda - s) with lambda the
    # principal root phase; the relative gap is O(s**2).
    mc = coeffs.coefficients(level, 0.5)
    lam = oracles.principal_phase(mc.b, s)
    pl = analysis.phase_lag(mc, s, dps=40)
    gap = abs(float(s * (s - lam) + pl))
    assert gap <= 10 * s**2 * abs(float(pl))


def test_zero_denominator(monkeypatch):
    # Cannot happen for the family; forced by zeroing the weighted sum.
    mc = coeffs.coefficients(-1)
    monkeypatch.setattr(analysis, "phase_lag_parts", lambda c, s: (1.0, 0.0))
    from phasefit.errors import ZeroDenominator

    with pytest.raises(ZeroDenominator):
        analysis.phase_lag(mc, 0.3)


# -- derivatives ------------------------------------------------------------------


def test_central_weights_second_derivative():
    offsets, weights = analysis.central_weights(2)
    assert offsets == (-2, -1, 0, 1, 2)
    assert weights == (Fraction(-1, 12), Fraction(4, 3), Fraction(-5, 2), Fraction(4, 3), Fraction(-1, 12))


@pytest.mark.parametrize("order", range(1, 7))
def test_fd_derivative_on_exponential(order):
    with mpmath.workdps(40):
        got = analysis.fd_derivative(mpmath.exp, mpmath.mpf("0.3"), order, mpmath.mpf("1e-3"))
        assert abs(float(got / mpmath.exp(mpmath.mpf("0.3")) - 1)) <= 1e-12


@pytest.mark.parametrize("level", range(5))
@pytest.mark.parametrize("v", [0.2, 1.0, 2.5])
def test_derivatives_match_oracle(level, v):
    mc = coeffs.coefficients(level, v)
    rep = analysis.phase_lag_derivatives(level, v, k_max=level + 1, coeffs=mc)
    for m, d in enumerate(rep.derivatives, start=1):
        ref = float(oracles.phase_lag_derivative(mc.b[:6], v, m))
        if m <= level:
            assert abs(d) <= 1e-10
            assert abs(ref) <= 1e-10
        else:
            assert d == pytest.approx(ref, rel=1e-6)


def test_first_derivative_analytic_route():
    # PL' at a zero of N equals N'/D, with N' summed by hand.
    v = 0.5
    mc = coeffs.coefficients(0, v)
    A = [mc.a[5 - j] + v * v * mc.b[5 - j] for j in range(6)]
    dA = [2 * v * mc.b[5 - j] for j in range(6)]
    dN = dA[0] + 2 * sum(dA[j] * np.cos(j * v) - j * A[j] * np.sin(j * v) for j in range(1, 6))
    D = 2 * sum(j * j * A[j] for j in range(1, 6))
    rep = analysis.phase_lag_derivatives(0, v, k_max=1)
    assert rep.derivatives[0] == pytest.approx(dN / D, rel=1e-4)


def test_frozen_derivatives_at_half():
    # Regression values, first confirmed against the mpmath oracle.
    assert analysis.phase_lag_derivatives(0, 0.5, 1).derivatives[0] == pytest.approx(1.0431068e-6, rel=1e-6)
    assert analysis.phase_lag_derivatives(1, 0.5, 2).derivatives[1] == pytest.approx(8.2188397e-6, rel=1e-6)
    assert analysis.phase_lag_derivatives(2, 0.5, 3).derivatives[2] == pytest.approx(9.7144536e-5, rel=1e-6)
    assert analysis.phase_lag_derivatives(3, 0.5, 4).derivatives[3] == pytest.approx(1.5310928e-3, rel=1e-6)


def test_higher_level_is_flatter():
    d0 = analysis.phase_lag_derivatives(0, 0.5, 1).derivatives[0]
    d4 = analysis.phase_lag_derivatives(4, 0.5, 1).derivatives[0]
    assert abs(d4) < 1e-6 * abs(d0)


def test_derivative_limit():
    with pytest.raises(OutOfRange):
        analysis.phase_lag_derivatives(0, 0.5, k_max=7)


# -- order constants ----------------------------------------------------------------


def test_base_order_is_ten_exactly():
    rep = analysis.order_constants(coeffs.coefficients(-1))
    assert rep.exact and rep.order == 10
    assert all(c == 0 for c in rep.constants[:12])
    assert rep.leading == C12
    ref = oracles.order_constants_exact(coeffs.coefficients(-1).exact_b)
    assert list(rep.constants) == ref


def test_uncentered_constant_ratio():
    rep = analysis.order_constants(coeffs.coefficients(-1))
    assert rep.constants[13] == 5 * rep.constants[12]


def test_centered_leading_constant_is_c12():
    rep = analysis.order_constants(coeffs.coefficients(-1), center=5)
    assert rep.order == 10 and rep.leading == C12


@settings(max_examples=30, deadline=None)
@given(center=st.just(5), q=st.integers(0, 6))
def test_centered_odd_constants_vanish_base(center, q):
    rep = analysis.order_constants(coeffs.coefficients(-1), center=center)
    assert rep.constants[2 * q + 1] == 0


@settings(max_examples=40, deadline=None)
@given(level=st.integers(0, 4), v=st.floats(0.05, 3.0))
def test_centered_odd_constants_vanish_fitted(level, v):
    rep = analysis.order_constants(coeffs.coefficients(level, v), center=5)
    for q in range(1, 15, 2):
        assert rep.constants[q] == 0 or abs(rep.constants[q]) <= 1e-10


@pytest.mark.parametrize("level", range(5))
@pytest.mark.parametrize("v", [0.1, 0.5, 1.5])
def test_fitted_order(level, v):
    rep = analysis.order_constants(coeffs.coefficients(level, v))
    assert rep.order == 8 - 2 * level
    assert rep.leading != 0


@pytest.mark.parametrize("level", range(5))
def test_leading_constant_scaling(level):
    # Centered C_{p+2} of PF-Dk ~ C12 * v**(2k+2) as v -> 0.
    for v in (0.2, 0.1):
        lead = analysis.order_constants(coeffs.coefficients(level, v), center=5).leading
        assert lead / v ** (2 * level + 2) == pytest.approx(float(C12), rel=0.02)


def test_order_constant_limit():
    with pytest.raises(OutOfRange):
        analysis.order_constants(coeffs.coefficients(-1), q_max=15)


# -- PLTE ---------------------------------------------------------------------------


@pytest.mark.parametrize("level", range(-1, 5))
def test_plte_terms_match_printed(level):
    op = analysis.plte_operator(level)
    assert op.factor == C12
    printed = {(w, d): c for c, w, d in PLTE_TERMS[level]}
    assert op.terms() == printed


@pytest.mark.parametrize("level", range(-1, 5))
def test_plte_term_identities(level):
    terms = analysis.plte_operator(level).terms()
    assert len(terms) == level + 2
    assert all(w + d == 12 for (w, d) in terms)
    assert sum(terms.values()) == C12 * 2 ** (level + 1)


def test_plte_rejects_level():
    with pytest.raises(OutOfRange):
        analysis.plte_operator(5)
