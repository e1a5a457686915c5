import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stokesdiff.errors import RamificationCapExceeded
from stokesdiff.series import (
    MatrixSeries,
    PuiseuxSeries,
    exp_series,
    format_complex,
    format_power,
    format_series,
    log1p,
    log_series,
    power,
    unified_ramification,
)
from fractions import Fraction

cplx = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def series_st(min_size=1, unit=False):
    def build(cs):
        c = np.array(cs, dtype=complex)
        if unit:
            c[0] = 1.0 + c[0] * 0.1
        return PuiseuxSeries(c, 0, 1)

    return st.lists(cplx, min_size=max(min_size, 4), max_size=10).map(build)


def test_constant_and_monomial():
    one = PuiseuxSeries.constant(2.0, 5)
    t = PuiseuxSeries.monomial(1, 1.0, 5)
    f = one + t
    assert f[0] == 2 and f[1] == 1 and f.trunc == 5


@given(series_st(unit=True), series_st())
@settings(max_examples=40, deadline=None)
def test_division_inverts_multiplication(g, f):
    h = (f * g) / g
    K = min(h.trunc, f.trunc)
    assert np.allclose(h.window(0, K).coeffs, f.window(0, K).coeffs, atol=1e-8 * (1 + f.scale()))


@given(series_st())
@settings(max_examples=40, deadline=None)
def test_exp_log_inverse(f):
    x = PuiseuxSeries.monomial(1, 1.0, f.trunc) * f  # no constant term
    back = log_series(exp_series(x))
    assert np.allclose(back.coeffs, x.window(back.low, back.trunc).coeffs, atol=1e-9 * (1 + x.scale()))


@given(series_st(unit=True))
@settings(max_examples=40, deadline=None)
def test_square_root(f):
    r = power(f, 0.5)
    assert (r * r).allclose(f, rtol=1e-9)


def test_log1p_coefficients():
    L = log1p(6)
    assert np.allclose(L.coeffs, [0, 1, -1 / 2, 1 / 3, -1 / 4, 1 / 5, -1 / 6])


def test_ramified_power():
    t = PuiseuxSeries.monomial(1, 1.0, 8)
    r = power(t, 0.5)
    assert r.m == 2 and r[1] == 1.0
    assert unified_ramification(2, 3) == 6
    with pytest.raises(RamificationCapExceeded):
        unified_ramification(5, 7)


def test_refine_keeps_values():
    f = PuiseuxSeries(np.array([1.0, 2.0, 3.0]), 0, 1)
    g = f.refine(3)
    s = 7.0 + 2j
    assert abs(f.evaluate(s) - g.evaluate(s)) < 1e-12


def test_phi_round_trip():
    f = PuiseuxSeries(np.array([1.0, 0.5, -0.25, 2.0]), 0, 1)
    assert f.phi().phi_inverse().allclose(f)


def test_phi_is_shift():
    # phi(f)(s) = f(s + 1) for f a polynomial in t = 1/s
    f = PuiseuxSeries(np.array([0, 1.0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0]), 0, 1)
    s = 30.0
    assert abs(f.phi().evaluate(s) - 1 / (s + 1)) < 1e-15


def test_matrix_inverse():
    rng = np.random.default_rng(0)
    c = rng.normal(size=(6, 2, 2)) + 0j
    c[0] += 3 * np.eye(2)
    A = MatrixSeries(c, 0, 1)
    I = A @ A.invert()
    assert np.allclose(I.coefficient(0), np.eye(2))
    assert np.allclose(I.coeffs[1:], 0, atol=1e-10)


def test_formatting():
    assert format_complex(1.0) == "1.0"
    assert format_complex(-0.5) == "-0.5"
    assert format_complex(3j) == "(3.0i)"
    assert format_power("t", Fraction(1, 2)) == "t^(1/2)"
    assert format_power("t", Fraction(-3)) == "t^(-3)"
    f = PuiseuxSeries(np.array([1.0, 0, 0.5]), 0, 1)
    assert format_series(f) == "1.0 + 0.5*t^2"
