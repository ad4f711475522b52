"""Hall-Littlewood polynomials P_(m,0,0)(x1, x2, x3; t) in exact arithmetic."""
from __future__ import annotations

import itertools
from fractions import Fraction
from functools import lru_cache
from math import comb

import sympy as sp

__all__ = [
    "hl_polynomial",
    "hall_littlewood_value",
    "hl_at_ones_limit",
    "hl_closed_form",
    "hl_closed_form_check",
    "hl_generating_oracle",
    "QOmega",
    "omega_specialization_check",
]

X1, X2, X3, T = sp.symbols("x1 x2 x3 t")


def _antisym(m: int):
    """Numerator and denominator of P_(m) before cancellation."""
    xs = (X1, X2, X3)
    num = 0
    for w in itertools.permutations(range(3)):
        y = [xs[i] for i in w]
        term = y[0] ** m
        for i, j in itertools.combinations(range(3), 2):
            term *= (y[i] - T * y[j]) / (y[i] - y[j])
        num += term
    # v_lambda(t): parts (m, 0, 0) give v_1 v_2, the empty partition v_3
    norm = (1 + T) if m else (1 + T) * (1 + T + T**2)
    return num, norm


@lru_cache(maxsize=None)
def hl_polynomial(m: int) -> sp.Expr:
    """P_(m,0,0) as a polynomial in x1, x2, x3, t."""
    num, norm = _antisym(m)
    P = sp.cancel(sp.together(num) / norm)
    return sp.expand(P)


def hall_littlewood_value(m: int, x1, x2, x3, t):
    """Exact value at the given (rational, algebraic or symbolic) arguments."""
    P = hl_polynomial(m)
    return sp.expand(P.subs({X1: x1, X2: x2, X3: x3, T: t}))


def hl_at_ones_limit(m: int, t) -> sp.Expr:
    """P_(m)(1, 1, 1; t) by one-variable limits of the unsimplified sum.

    Sets x3 = 1 and cancels, sets x2 = 1, then removes common zeros of
    numerator and denominator at x1 = 1 by dividing by (x1 - 1), at most
    twice.
    """
    num, norm = _antisym(m)
    e = sp.cancel(sp.together(num.subs(X3, 1)))
    e = sp.together(e.subs(X2, 1))
    n, d = sp.fraction(sp.together(e / norm))
    n, d = sp.Poly(sp.expand(n), X1), sp.Poly(sp.expand(d), X1)
    lin = sp.Poly(X1 - 1, X1)
    for _ in range(2):
        if d.eval(1) != 0:
            break
        n, rn = sp.div(n, lin)
        d, rd = sp.div(d, lin)
        if not (rn.is_zero and rd.is_zero):
            raise ArithmeticError("limit pattern does not apply")
    if d.eval(1) == 0:
        raise ArithmeticError("pole at x1 = 1 survives two divisions")
    val = sp.simplify(n.as_expr().subs(X1, 1) / d.as_expr().subs(X1, 1))
    return sp.simplify(val.subs(T, t))


def hl_closed_form(m: int, q) -> Fraction:
    q = Fraction(q)
    return Fraction(1, 2) * ((m * m + 3 * m + 2) * q**m - 2 * (m * m - 1) * q ** (m - 1) + (m * m - 3 * m + 2) * q ** (m - 2))


def hl_generating_oracle(m: int, xs, t):
    """Coefficient route: (1 - t) P_(m) = [y^m] prod_i (1 - t x_i y) / (1 - x_i y) for m >= 1.

    Works for any field elements supporting + and * (Fraction, QOmega).
    """
    one = xs[0] * 0 + 1
    # power series coefficients of 1/(1 - x y) and (1 - t x y)
    coeffs = [one] + [one * 0] * m
    for x in xs:
        geo = [x**k if k else one for k in range(m + 1)]
        new = [one * 0] * (m + 1)
        for i in range(m + 1):
            for j in range(m + 1 - i):
                new[i + j] = new[i + j] + coeffs[i] * geo[j]
        coeffs = new
        lin = [one * 0] * (m + 1)
        for i in range(m + 1):
            lin[i] = lin[i] + coeffs[i]
            if i + 1 <= m:
                lin[i + 1] = lin[i + 1] - coeffs[i] * x * t
        coeffs = lin
    if m == 0:
        return coeffs[0]
    return coeffs[m] * (one * (1 / (1 - Fraction(t))))


def hl_ones_binomial(m: int, t) -> Fraction:
    t = Fraction(t)
    s = sum(comb(3, k) * (-t) ** k * comb(m - k + 2, 2) for k in range(4) if m - k >= 0)
    return s / (1 - t)


def hl_closed_form_check(m: int, q: int) -> dict:
    """q^m P_(m)(1,1,1;1/q) against the closed form, via the symbolic limit and an oracle."""
    t = sp.Rational(1, q)
    lim = sp.Rational(hl_at_ones_limit(m, t))
    val = Fraction(int(lim.p), int(lim.q)) * Fraction(q) ** m
    oracle = hl_ones_binomial(m, Fraction(1, q)) * Fraction(q) ** m
    closed = hl_closed_form(m, q)
    return {"m": m, "q": q, "value": val, "oracle": oracle, "closed_form": closed, "ok": val == closed == oracle}


class QOmega:
    """a + b w in Q(w) with w^2 + w + 1 = 0."""

    __slots__ = ("a", "b")

    def __init__(self, a=0, b=0):
        self.a, self.b = Fraction(a), Fraction(b)

    @staticmethod
    def _lift(x):
        return x if isinstance(x, QOmega) else QOmega(x, 0)

    def __add__(self, o):
        o = self._lift(o)
        return QOmega(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return QOmega(-self.a, -self.b)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        # w^2 = -1 - w
        a = self.a * o.a - self.b * o.b
        b = self.a * o.b + self.b * o.a - self.b * o.b
        return QOmega(a, b)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = QOmega(1)
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, o):
        o = self._lift(o)
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"{self.a}+{self.b}w"


W = QOmega(0, 1)


def omega_specialization_check(m: int, q: int) -> dict:
    """q^m P_(m)(w^j/q, w^j, w^j q; 1/q) = w^(jm) (q^2+q+1) q^(2(m-1)) for j = 0, 1, 2.

    The factor q^m is the same normalization under which the closed form at
    (1, 1, 1) holds.  Checked through the coefficient oracle in Q(w) and
    through the symbolic polynomial for j = 0, 1.
    """
    target0 = Fraction(q * q + q + 1) * Fraction(q) ** (2 * (m - 1)) / Fraction(q) ** m
    res = {}
    for j in range(3):
        wj = W**j
        xs = [wj * Fraction(1, q), wj, wj * q]
        got = hl_generating_oracle(m, xs, Fraction(1, q))
        want = (W ** ((j * m) % 3)) * target0
        res[j] = got == want
    sym = hall_littlewood_value(m, sp.Rational(1, q), 1, q, sp.Rational(1, q))
    w = sp.Rational(-1, 2) + sp.sqrt(3) * sp.I / 2
    sym_w = sp.expand(hall_littlewood_value(m, w / q, w, w * q, sp.Rational(1, q)))
    want_w = sp.expand(w ** (m % 3) * sp.Rational(target0.numerator, target0.denominator))
    res["symbolic_j0"] = sym == sp.Rational(target0.numerator, target0.denominator)
    res["symbolic_j1"] = sp.simplify(sym_w - want_w) == 0
    res["ok"] = all(res.values())
    return res
