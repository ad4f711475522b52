"""Finite local rings O_r = O / pi^r O.

Two families are supported:

* ``padic``: O_r = Z / p^r, elements are integers in ``[0, p^r)``.
* ``laurent``: O_r = F_q[t] / (t^r) with F_q = F_p[x] / (f).  An element
  ``sum_k c_k t^k`` is encoded as the integer ``sum_k c_k q^k`` where each
  ``c_k`` is itself the base-p encoding of a polynomial over F_p.

With this encoding the uniformizer is ``p`` (resp. ``q``) in both cases,
reduction modulo pi^k is ``x % base**k`` and division by pi^k (for
``val(x) >= k``) is ``x // base**k``.  Only multiplication differs.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

__all__ = [
    "FiniteField",
    "LocalRing",
    "RingElem",
    "SmithResult",
    "is_prime",
    "irreducible_polys",
    "ring_make",
    "parse_ring_spec",
    "smith_form",
    "submodule_type",
    "is_free_submodule",
]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def _poly_mod(a: list[int], f: list[int], p: int) -> list[int]:
    # coefficient lists low -> high; f monic
    a = [c % p for c in a]
    df = len(f) - 1
    while len(a) - 1 >= df and any(a):
        while a and a[-1] == 0:
            a.pop()
        if len(a) - 1 < df:
            break
        c = a[-1]
        shift = len(a) - 1 - df
        for i, fc in enumerate(f):
            a[shift + i] = (a[shift + i] - c * fc) % p
        while a and a[-1] == 0:
            a.pop()
    return a


def _is_irreducible(f: list[int], p: int) -> bool:
    deg = len(f) - 1
    if deg <= 0:
        return False
    for d in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=d):
            g = list(low) + [1]
            if not _poly_mod(list(f), g, p):
                return False
    return True


def irreducible_polys(p: int, e: int):
    """Monic irreducible polynomials of degree ``e`` over F_p.

    Yielded as coefficient tuples (low -> high) in increasing order of the
    integer code ``sum_j c_j p^j`` of the non-leading coefficients.
    """
    for code in range(p**e):
        low = [(code // p**j) % p for j in range(e)]
        f = low + [1]
        if _is_irreducible(f, p):
            yield tuple(f)


class FiniteField:
    """F_q = F_p[x]/(f) with elements encoded as base-p integers in [0, q)."""

    def __init__(self, p: int, e: int = 1, modulus: tuple[int, ...] | None = None):
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
        if e < 1:
            raise ValueError("extension degree must be >= 1")
        if modulus is None:
            modulus = next(irreducible_polys(p, e))
        else:
            modulus = tuple(int(c) % p for c in modulus)
            if len(modulus) != e + 1 or modulus[-1] != 1:
                raise ValueError("modulus must be monic of degree e")
            if not _is_irreducible(list(modulus), p):
                raise ValueError(f"modulus {modulus} is reducible over F_{p}")
        self.p, self.e, self.modulus = p, e, modulus
        self.q = p**e
        q = self.q
        digits = np.array([[(a // p**j) % p for j in range(e)] for a in range(q)], dtype=np.int64)
        weights = p ** np.arange(e, dtype=np.int64)
        add = (digits[:, None, :] + digits[None, :, :]) % p
        self.add_table = (add * weights).sum(-1)
        neg = (-digits) % p
        self.neg_table = (neg * weights).sum(-1)
        mul = np.zeros((q, q), dtype=np.int64)
        for a in range(q):
            for b in range(a, q):
                prod = [0] * (2 * e - 1)
                for i in range(e):
                    for j in range(e):
                        prod[i + j] += int(digits[a, i]) * int(digits[b, j])
                red = _poly_mod(prod, list(modulus), p)
                code = sum(c * p**j for j, c in enumerate(red))
                mul[a, b] = mul[b, a] = code
        self.mul_table = mul
        inv = np.zeros(q, dtype=np.int64)
        for a in range(1, q):
            inv[a] = int(np.nonzero(mul[a] == 1)[0][0])
        self.inv_table = inv

    def __repr__(self):
        return f"FiniteField(q={self.q})"


@dataclass(frozen=True)
class LocalRing:
    """Handle for O_r over Q_p (``padic``) or F_q((t)) (``laurent``)."""

    kind: str
    p: int
    e: int
    r: int
    modulus: tuple[int, ...] = field(default=(), compare=True)

    def __post_init__(self):
        if self.kind not in ("padic", "laurent"):
            raise ValueError(f"unknown ring kind {self.kind!r}")
        if not is_prime(self.p):
            raise ValueError(f"{self.p} is not prime")
        if self.r < 1 or self.e < 1:
            raise ValueError("need r >= 1 and e >= 1")
        if self.kind == "padic" and self.e != 1:
            raise ValueError("padic rings have residue degree e = 1")

    # -- basic invariants -------------------------------------------------
    @property
    def q(self) -> int:
        return self.p**self.e

    @property
    def base(self) -> int:
        """Integer encoding of the uniformizer."""
        return self.p if self.kind == "padic" else self.q

    @property
    def size(self) -> int:
        return self.q**self.r

    @property
    def spec(self) -> str:
        tag = "zmod" if self.kind == "padic" else "ff"
        return f"{tag}:{self.q}^{self.r}"

    def __repr__(self):
        return f"LocalRing({self.spec})"

    @cached_property
    def field(self) -> FiniteField | None:
        if self.kind == "padic":
            return None
        return FiniteField(self.p, self.e, self.modulus or None)

    def with_precision(self, r: int) -> "LocalRing":
        return LocalRing(self.kind, self.p, self.e, r, self.modulus)

    def __call__(self, x) -> "RingElem":
        if isinstance(x, (list, tuple)):
            return RingElem(self, self.from_coeffs(x))
        return RingElem(self, int(x) % self.size)

    def elements(self) -> range:
        return range(self.size)

    def units(self) -> list[int]:
        return [x for x in self.elements() if x % self.base]

    @cached_property
    def inv_table(self) -> np.ndarray:
        """``inv_table[x]`` is the inverse of a unit x (0 for non-units)."""
        out = np.zeros(self.size, dtype=np.int64)
        if self.kind == "padic":
            for x in self.units():
                out[x] = pow(x, -1, self.size)
            return out
        for x in self.units():
            if out[x] == 0:
                y = self.inv(x)
                out[x], out[y] = y, x
        return out

    # -- scalar arithmetic on encoded ints ----------------------------------
    def add(self, a: int, b: int) -> int:
        if self.kind == "padic":
            return (a + b) % self.size
        F, q = self.field, self.q
        out = 0
        for k in range(self.r):
            out += int(F.add_table[a % q, b % q]) * q**k
            a //= q
            b //= q
        return out

    def neg(self, a: int) -> int:
        if self.kind == "padic":
            return (-a) % self.size
        F, q = self.field, self.q
        out = 0
        for k in range(self.r):
            out += int(F.neg_table[a % q]) * q**k
            a //= q
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.kind == "padic":
            return (a * b) % self.size
        F, q, r = self.field, self.q, self.r
        da = [(a // q**k) % q for k in range(r)]
        db = [(b // q**k) % q for k in range(r)]
        acc = [0] * r
        for i, x in enumerate(da):
            if x == 0:
                continue
            for j in range(r - i):
                y = db[j]
                if y:
                    acc[i + j] = int(F.add_table[acc[i + j], F.mul_table[x, y]])
        return sum(c * q**k for k, c in enumerate(acc))

    def val(self, a: int) -> int:
        """pi-adic valuation, with ``val(0) = r``."""
        a %= self.size
        if a == 0:
            return self.r
        b, k = self.base, 0
        while a % b == 0:
            a //= b
            k += 1
        return k

    def is_unit(self, a: int) -> bool:
        return a % self.base != 0

    def inv(self, a: int) -> int:
        if not self.is_unit(a):
            raise ZeroDivisionError(f"{a} is not a unit in {self.spec}")
        if self.kind == "padic":
            return pow(a, -1, self.size)
        # Newton iteration x <- x(2 - a x) starting from the residue inverse
        x = int(self.field.inv_table[a % self.q])
        two = self.from_coeffs([2 % self.p])
        prec = 1
        while prec < self.r:
            x = self.mul(x, self.sub(two, self.mul(a, x)))
            prec *= 2
        return x

    def pi_pow(self, k: int) -> int:
        return 0 if k >= self.r else self.base**k

    def mul_pi(self, a: int, k: int) -> int:
        return (a * self.base**k) % self.size if k < self.r else 0

    def div_pi(self, a: int, k: int) -> int:
        """``a / pi^k`` for ``val(a) >= k``; the representative with zero top digits."""
        return (a % self.size) // self.base**k

    def reduce(self, a: int, k: int) -> int:
        """Representative of ``a mod pi^k`` (low k digits)."""
        return a % self.base ** min(k, self.r)

    def from_coeffs(self, coeffs) -> int:
        if self.kind == "padic":
            return sum(int(c) * self.p**k for k, c in enumerate(coeffs)) % self.size
        out = 0
        for k, c in enumerate(coeffs):
            if k < self.r:
                out += (int(c) % self.q) * self.q**k
        return out

    def to_coeffs(self, a: int) -> list[int]:
        return [(a // self.base**k) % self.base for k in range(self.r)]

    def serialize(self, a: int):
        return int(a) if self.kind == "padic" else self.to_coeffs(a)

    # -- vectorised arithmetic ------------------------------------------------
    def _digits(self, a: np.ndarray) -> np.ndarray:
        q = self.q
        return (a[..., None] // q ** np.arange(self.r, dtype=np.int64)) % q

    def _undigits(self, d: np.ndarray) -> np.ndarray:
        return (d * self.q ** np.arange(self.r, dtype=np.int64)).sum(-1)

    def add_arr(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.kind == "padic":
            return (a + b) % self.size
        T = self.field.add_table
        return self._undigits(T[self._digits(a), self._digits(b)])

    def neg_arr(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        if self.kind == "padic":
            return (-a) % self.size
        return self._undigits(self.field.neg_table[self._digits(a)])

    def mul_arr(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        if self.kind == "padic":
            return (a * b) % self.size
        F, r = self.field, self.r
        da, db = self._digits(a), self._digits(b)
        da, db = np.broadcast_arrays(da, db)
        acc = np.zeros(da.shape, dtype=np.int64)
        for i in range(r):
            for j in range(r - i):
                acc[..., i + j] = F.add_table[acc[..., i + j], F.mul_table[da[..., i], db[..., j]]]
        return self._undigits(acc)

    def val_arr(self, a) -> np.ndarray:
        a = np.asarray(a, dtype=np.int64) % self.size
        out = np.full(a.shape, self.r, dtype=np.int64)
        for k in range(self.r - 1, -1, -1):
            out[a % self.base ** (k + 1) != 0] = k
        return out

    def dot_arr(self, X, Y) -> np.ndarray:
        """Pairwise bilinear pairing ``sum_i X[a, i] * Y[b, i]`` as an (A, B) array."""
        X = np.asarray(X, dtype=np.int64)
        Y = np.asarray(Y, dtype=np.int64)
        if self.kind == "padic":
            return (X @ Y.T) % self.size
        out = np.zeros((X.shape[0], Y.shape[0]), dtype=np.int64)
        for i in range(X.shape[1]):
            out = self.add_arr(out, self.mul_arr(X[:, i][:, None], Y[:, i][None, :]))
        return out


@dataclass(frozen=True)
class RingElem:
    ring: LocalRing
    value: int

    def _coerce(self, other) -> int:
        if isinstance(other, RingElem):
            if other.ring != self.ring:
                raise ValueError("elements of different rings")
            return other.value
        return int(other) % self.ring.size

    def __add__(self, other):
        return RingElem(self.ring, self.ring.add(self.value, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return RingElem(self.ring, self.ring.sub(self.value, self._coerce(other)))

    def __rsub__(self, other):
        return RingElem(self.ring, self.ring.sub(self._coerce(other), self.value))

    def __mul__(self, other):
        return RingElem(self.ring, self.ring.mul(self.value, self._coerce(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return RingElem(self.ring, self.ring.neg(self.value))

    def __eq__(self, other):
        if isinstance(other, RingElem):
            return self.ring == other.ring and self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.ring.size
        return NotImplemented

    def __hash__(self):
        return hash((self.ring, self.value))

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"{self.ring.spec}({self.ring.serialize(self.value)})"

    def val(self) -> int:
        return self.ring.val(self.value)

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.value)

    def inverse(self) -> "RingElem":
        return RingElem(self.ring, self.ring.inv(self.value))


def ring_make(kind: str, p: int, e: int = 1, r: int = 1, modulus=None) -> LocalRing:
    """Construct O_r for ``kind`` in {"padic", "laurent"}.

    For ``laurent`` the residue field F_{p^e} is built from ``modulus`` when
    given (raising on a reducible polynomial) and otherwise from the least
    monic irreducible polynomial of degree ``e``.
    """
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if kind == "padic":
        if e != 1:
            raise ValueError("padic rings have e = 1")
        return LocalRing("padic", p, 1, r)
    if kind != "laurent":
        raise ValueError(f"unknown ring kind {kind!r}")
    F = FiniteField(p, e, modulus)
    ring = LocalRing("laurent", p, e, r, F.modulus)
    ring.__dict__["field"] = F
    return ring


def _prime_power(q: int) -> tuple[int, int]:
    for p in range(2, q + 1):
        if q % p == 0:
            e, m = 0, q
            while m % p == 0:
                m //= p
                e += 1
            if m != 1:
                raise ValueError(f"{q} is not a prime power")
            return p, e
    raise ValueError(f"{q} is not a prime power")


_SPEC = re.compile(r"^(zmod|ff):(\d+)\^(\d+)$")


def parse_ring_spec(spec: str) -> LocalRing:
    """Parse ``zmod:p^r`` or ``ff:q^r``."""
    m = _SPEC.match(spec.strip())
    if not m:
        raise ValueError(f"bad ring spec {spec!r}; expected zmod:p^r or ff:q^r")
    tag, base, r = m.group(1), int(m.group(2)), int(m.group(3))
    if r < 1:
        raise ValueError("r must be >= 1")
    if tag == "zmod":
        if not is_prime(base):
            raise ValueError(f"zmod base {base} is not prime")
        return ring_make("padic", base, 1, r)
    p, e = _prime_power(base)
    return ring_make("laurent", p, e, r)


# -- Smith form ------------------------------------------------------------


@dataclass
class SmithResult:
    exponents: tuple[int, ...]
    U: list[list[int]]
    V: list[list[int]]
    D: list[list[int]]


def _matmul(ring: LocalRing, A, B):
    n, m, k = len(A), len(B), len(B[0]) if B else 0
    out = [[0] * k for _ in range(n)]
    for i in range(n):
        for j in range(k):
            s = 0
            for t in range(m):
                s = ring.add(s, ring.mul(A[i][t], B[t][j]))
            out[i][j] = s
    return out


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_form(ring: LocalRing, M) -> SmithResult:
    """Smith form over O_r: ``U @ M @ V == D`` with ``D[i][i] = pi^{m_i}``.

    Pivot = entry of minimal valuation in the remaining block (ties: lowest
    row, then lowest column), scaled to exactly ``pi^v``.  Exponents come out
    non-decreasing; zero pivots (all remaining entries 0) are not reported.
    """
    A = [[int(x) % ring.size for x in row] for row in M]
    d = len(A)
    dp = len(A[0]) if d else 0
    U, V = _identity(d), _identity(dp)
    exps = []
    for k in range(min(d, dp)):
        best = None
        for i in range(k, d):
            for j in range(k, dp):
                v = ring.val(A[i][j])
                if v < ring.r and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        A[k], A[i] = A[i], A[k]
        U[k], U[i] = U[i], U[k]
        for row in A:
            row[k], row[j] = row[j], row[k]
        for row in V:
            row[k], row[j] = row[j], row[k]
        unit = ring.div_pi(A[k][k], v)
        uinv = ring.inv(unit)
        A[k] = [ring.mul(uinv, x) for x in A[k]]
        U[k] = [ring.mul(uinv, x) for x in U[k]]
        for i2 in range(d):
            if i2 != k and A[i2][k]:
                c = ring.div_pi(A[i2][k], v)
                A[i2] = [ring.sub(x, ring.mul(c, y)) for x, y in zip(A[i2], A[k])]
                U[i2] = [ring.sub(x, ring.mul(c, y)) for x, y in zip(U[i2], U[k])]
        for j2 in range(dp):
            if j2 != k and A[k][j2]:
                c = ring.div_pi(A[k][j2], v)
                for row in A:
                    row[j2] = ring.sub(row[j2], ring.mul(c, row[k]))
                for row in V:
                    row[j2] = ring.sub(row[j2], ring.mul(c, row[k]))
        exps.append(v)
    return SmithResult(tuple(exps), U, V, A)


def submodule_type(ring: LocalRing, gens, d: int | None = None) -> tuple[int, ...]:
    """Exponents ``r >= m_1 >= ... >= m_d >= 0`` of the submodule spanned by ``gens``.

    ``gens`` are the generating vectors (columns); missing invariant factors
    count as ``m = r``.
    """
    gens = [list(g) for g in gens]
    if d is None:
        d = len(gens[0])
    if not gens:
        return (ring.r,) * d
    cols = [[g[i] for g in gens] for i in range(d)]
    exps = list(smith_form(ring, cols).exponents)
    exps += [ring.r] * (d - len(exps))
    return tuple(sorted(exps, reverse=True))


def is_free_submodule(ring: LocalRing, gens, d: int | None = None) -> bool:
    return all(m in (0, ring.r) for m in submodule_type(ring, gens, d))
