from fractions import Fraction

import pytest
import sympy as sp

from freeflags.hall_littlewood import (
    QOmega,
    W,
    hall_littlewood_value,
    hl_at_ones_limit,
    hl_closed_form,
    hl_closed_form_check,
    hl_generating_oracle,
    hl_polynomial,
    omega_specialization_check,
)


def test_m1_value():
    for q in (2, 3, 13):
        assert hl_at_ones_limit(1, sp.Rational(1, q)) * q == 3 * q
        assert hl_closed_form(1, q) == 3 * q


def test_m2_q2_is_18():
    # the quoted 21 is an arithmetic slip: 1/2 (12*4 - 6*2 + 0) = 18
    assert hl_closed_form(2, 2) == 18
    c = hl_closed_form_check(2, 2)
    assert c["value"] == c["oracle"] == 18


@pytest.mark.parametrize("m", range(1, 7))
@pytest.mark.parametrize("q", [2, 3, 5, 7, 11, 13])
def test_closed_form(m, q):
    assert hl_closed_form_check(m, q)["ok"]


@pytest.mark.parametrize("m", range(1, 5))
@pytest.mark.parametrize("q", [2, 3, 5])
def test_omega_specialization(m, q):
    res = omega_specialization_check(m, q)
    assert res["ok"], res


def test_m0_is_one():
    assert hl_at_ones_limit(0, sp.Rational(1, 3)) == 1


def test_polynomial_is_symmetric():
    P = hl_polynomial(3)
    X1, X2, X3 = sp.symbols("x1 x2 x3")
    assert sp.expand(P - P.subs({X1: X2, X2: X1}, simultaneous=True)) == 0
    assert sp.expand(P - P.subs({X2: X3, X3: X2}, simultaneous=True)) == 0


def test_t0_is_schur_and_t1_is_monomial():
    # P_(m)(x; 0) = h_m (complete homogeneous), P_(m)(x; 1) = m_(m) (power sum)
    x = [Fraction(2), Fraction(3), Fraction(5)]
    h3 = sum(x[i] * x[j] * x[k] for i in range(3) for j in range(i, 3) for k in range(j, 3))
    assert hall_littlewood_value(3, *x, 0) == h3
    assert hall_littlewood_value(3, *x, 1) == sum(v**3 for v in x)


def test_generating_oracle_matches_polynomial():
    xs = [Fraction(1, 3), Fraction(2), Fraction(7, 5)]
    t = Fraction(1, 4)
    for m in range(1, 5):
        want = hall_littlewood_value(m, *[sp.Rational(v.numerator, v.denominator) for v in xs], sp.Rational(1, 4))
        got = hl_generating_oracle(m, xs, t)
        assert sp.Rational(got.numerator, got.denominator) == want


def test_qomega_arithmetic():
    assert W * W * W == QOmega(1)
    assert W * W + W + 1 == QOmega(0)
    assert (QOmega(2, 3) - QOmega(2, 3)) == 0
