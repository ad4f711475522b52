"""Cayley complexes of PGL_3(F_q) from unitary Gaussian-integer generators."""
from __future__ import annotations

import itertools
import os
import struct
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .ring import is_prime

__all__ = [
    "gaussian_prime",
    "enumerate_sp",
    "sigma_tables",
    "power_generators",
    "distinct_projectively",
    "SigmaTables",
    "sqrt_minus_one",
    "reduce_mod_q",
    "CayleyComplexData",
    "build_cayley",
    "load_or_build",
    "write_cayley",
    "read_cayley",
    "identity_link",
    "pgl3_order",
    "psl3_order",
    "iota_root",
    "valid_continuations",
    "decompose_word",
]

MAGIC = b"HDXCAY01"


# -- Gaussian integers ---------------------------------------------------------


def gaussian_prime(p: int) -> complex:
    """pi = a + bi with a^2 + b^2 = p, a odd and b even, both positive."""
    if not is_prime(p) or p % 4 != 1:
        raise ValueError(f"p = {p} must be a prime congruent to 1 mod 4")
    for a in range(1, int(p**0.5) + 1, 2):
        b2 = p - a * a
        b = int(round(b2**0.5))
        if b > 0 and b * b == b2 and b % 2 == 0:
            return complex(a, b)
    raise AssertionError("unreachable for p = 1 mod 4")


def _gint(z) -> tuple[int, int]:
    return int(round(z.real)), int(round(z.imag))


def _divides(d: complex, z: complex) -> bool:
    n = int(round((d * d.conjugate()).real))
    w = z * d.conjugate()
    a, b = _gint(w)
    return a % n == 0 and b % n == 0


def _ord(pi: complex, z: complex) -> int:
    if z == 0:
        raise ValueError("ord of zero")
    n = int(round(abs(pi) ** 2))
    k = 0
    while _divides(pi, z):
        a, b = _gint(z * pi.conjugate())
        z = complex(a // n, b // n)
        k += 1
    return k


def _ggcd(a: complex, b: complex) -> complex:
    while b != 0:
        n = int(round(abs(b) ** 2))
        x, y = _gint(a * b.conjugate())
        qt = complex(round(x / n), round(y / n))
        a, b = b, a - qt * b
    return a


def _unit_normalize(M: np.ndarray) -> np.ndarray:
    """Divide by the Gaussian content and fix the unit: first nonzero entry in the open first quadrant or positive real."""
    flat = M.ravel()
    g = 0j
    for z in flat:
        g = _ggcd(g, complex(z)) if g != 0 else complex(z)
    if g == 0:
        return M.copy()
    n = int(round(abs(g) ** 2))
    out = np.array([complex(*[c // n for c in _gint(z * g.conjugate())]) for z in flat]).reshape(M.shape)
    lead = next(z for z in out.ravel() if z != 0)
    for u in (1, 1j, -1, -1j):
        w = lead * u
        if w.real > 0 and w.imag >= 0:
            return out * u
    raise AssertionError("no unit normalizes a nonzero entry")


def _key(M: np.ndarray) -> tuple:
    return tuple(x for z in _unit_normalize(M).ravel() for x in _gint(z))


def _norm_vectors(p: int) -> np.ndarray:
    s = int(p**0.5)
    rng = np.arange(-s, s + 1)
    grid = np.stack(np.meshgrid(*[rng] * 6, indexing="ij"), axis=-1).reshape(-1, 6)
    grid = grid[(grid**2).sum(axis=1) == p]
    return grid[:, 0::2] + 1j * grid[:, 1::2]


def _cong1(z: np.ndarray) -> np.ndarray:
    # z = 1 mod (2+2i)  iff  (z - 1)(2 - 2i) is divisible by 8
    w = (z - 1) * (2 - 2j)
    return (np.round(w.real).astype(np.int64) % 8 == 0) & (np.round(w.imag).astype(np.int64) % 8 == 0)


def enumerate_sp(p: int) -> np.ndarray:
    """The p^2 + p + 1 generators as an (n, 3, 3) complex array of Gaussian integers.

    Conditions: s* s = pI, diagonal = 1 mod 2+2i, ord_pi det s = 1.
    """
    pi = gaussian_prime(p)
    V = _norm_vectors(p)
    cols = [V[_cong1(V[:, j])] for j in range(3)]
    out = []
    for c1 in cols[0]:
        C2 = cols[1][np.abs(cols[1] @ c1.conj()) == 0]
        for c2 in C2:
            C3 = cols[2][(np.abs(cols[2] @ c1.conj()) == 0) & (np.abs(cols[2] @ c2.conj()) == 0)]
            for c3 in C3:
                s = np.stack([c1, c2, c3], axis=1)
                d = complex(*_gint(np.linalg.det(s)))
                if _ord(pi, d) == 1:
                    out.append(s)
    out.sort(key=lambda s: tuple(x for z in s.ravel() for x in _gint(z)))
    S = np.array(out)
    if len(S) != p * p + p + 1:
        raise AssertionError(f"found {len(S)} generators, expected {p * p + p + 1}")
    return S


def _is_scalar(P: np.ndarray) -> np.ndarray:
    """Mask of (..., 3, 3) matrices equal to c*I with c != 0."""
    off = np.abs(P - np.einsum("...ii->...i", P)[..., :, None] * np.eye(3)).max(axis=(-1, -2)) == 0
    d = np.einsum("...ii->...i", P)
    return off & (np.abs(d[..., 0] - d[..., 1]) == 0) & (np.abs(d[..., 0] - d[..., 2]) == 0) & (np.abs(d[..., 0]) > 0)


@dataclass
class SigmaTables:
    closers: list  # closers[s] = sorted indices s' with s s' s'' scalar for some s''
    third: dict  # (s, s') -> s''
    sigma: np.ndarray  # (n, p^2) sorted indices of the remaining s'


def sigma_tables(S: np.ndarray) -> SigmaTables:
    n = len(S)
    closers, third, sigma = [], {}, []
    for a in range(n):
        P = np.einsum("ij,njk->nik", S[a], S)  # s s'
        T = np.einsum("nij,mjk->nmik", P, S)  # s s' s''
        hit = np.argwhere(_is_scalar(T))
        cl = sorted(set(int(b) for b, _ in hit))
        for b, c in hit:
            third[(a, int(b))] = int(c)
        closers.append(cl)
        sigma.append([b for b in range(n) if b not in set(cl)])
    return SigmaTables(closers, third, np.array(sigma, dtype=np.int64))


def power_generators(S: np.ndarray, sig: SigmaTables, r: int):
    """Words and products s_1 ... s_r with s_i in Sigma_{s_(i-1)}."""
    words = [(a,) for a in range(len(S))]
    for _ in range(r - 1):
        words = [w + (int(b),) for w in words for b in sig.sigma[w[-1]]]
    prods = []
    for w in words:
        M = S[w[0]]
        for b in w[1:]:
            M = M @ S[b]
        prods.append(M)
    return words, np.array(prods)


def distinct_projectively(M: np.ndarray) -> bool:
    keys = {_key(m) for m in M}
    return len(keys) == len(M)


# -- reduction mod q -----------------------------------------------------------


def sqrt_minus_one(q: int) -> int:
    roots = [x for x in range(q) if (x * x + 1) % q == 0]
    if not roots:
        raise ValueError(f"-1 is not a square mod {q}")
    return min(roots)


def reduce_mod_q(S: np.ndarray, q: int) -> np.ndarray:
    """Images under i -> eps as (n, 9) digit arrays, projectively normalized."""
    if not is_prime(q) or q % 4 != 1:
        raise ValueError("q must be a prime congruent to 1 mod 4")
    eps = sqrt_minus_one(q)
    re = np.round(S.real).astype(np.int64)
    im = np.round(S.imag).astype(np.int64)
    E = (re + eps * im).reshape(len(S), 9) % q
    codes = kernels.normalize_pack(E, q)
    return unpack(codes, q)


def unpack(codes, q: int) -> np.ndarray:
    codes = np.asarray(codes, dtype=np.int64)
    out = np.zeros((len(codes), 9), dtype=np.int64)
    c = codes.copy()
    for i in range(8, -1, -1):
        out[:, i] = c % q
        c //= q
    return out


def pgl3_order(q: int) -> int:
    gl = (q**3 - 1) * (q**3 - q) * (q**3 - q * q)
    return gl // (q - 1)


def psl3_order(q: int) -> int:
    from math import gcd

    return pgl3_order(q) // gcd(3, q - 1)


@dataclass
class CayleyComplexData:
    p: int
    q: int
    elements: np.ndarray  # packed codes in BFS order
    nbr: np.ndarray  # (deg, n) int32, nbr[j, g] = index of g * s_j
    gens: np.ndarray  # (deg, 9) normalized generator digits
    _inv: np.ndarray | None = field(default=None, repr=False)

    @property
    def n(self) -> int:
        return len(self.elements)

    @property
    def degree(self) -> int:
        return self.nbr.shape[0]

    @property
    def nbr_inv(self) -> np.ndarray:
        """nbr_inv[j, g] = index of g * s_j^(-1) (color-2 neighbors)."""
        if self._inv is None:
            inv = np.empty_like(self.nbr)
            ar = np.arange(self.n, dtype=np.int32)
            for j in range(self.degree):
                inv[j, self.nbr[j]] = ar
            self._inv = inv
        return self._inv

    def tripartite(self) -> bool:
        """Whether a vertex 3-coloring with col(g s) = col(g) + 1 exists."""
        c = -np.ones(self.n, dtype=np.int64)
        c[0] = 0
        front = np.array([0])
        while len(front):
            new = []
            for j in range(self.degree):
                w = self.nbr[j, front]
                want = (c[front] + 1) % 3
                fresh = c[w] < 0
                c[w[fresh]] = want[fresh]
                new.append(w[fresh])
            for j in range(self.degree):
                w = self.nbr_inv[j, front]
                want = (c[front] + 2) % 3
                fresh = c[w] < 0
                c[w[fresh]] = want[fresh]
                new.append(w[fresh])
            front = np.unique(np.concatenate(new))
        if np.any(c < 0):
            return False
        return bool(np.all(c[self.nbr] == (c[None, :] + 1) % 3))


def build_cayley(p: int, q: int, budget_mb: int = 4000, S: np.ndarray | None = None) -> CayleyComplexData:
    """BFS closure of <S_{p,q}> in PGL_3(F_q) with the right-multiplication table."""
    if p == q:
        raise ValueError("need p != q")
    S = enumerate_sp(p) if S is None else S
    gens = reduce_mod_q(S, q)
    deg = len(gens)
    if len({tuple(g) for g in gens}) != deg:
        raise AssertionError("reduction mod q is not injective on the generators")
    bound = pgl3_order(q)
    need = (bound * deg * 4 * 2 + q**9 * 4) / 2**20
    if need > budget_mb:
        raise OverflowError(f"closure needs about {need:.0f} MB (budget {budget_mb} MB)")
    lookup = np.full(q**9, -1, dtype=np.int32)
    elems = np.zeros(bound, dtype=np.int64)
    digits = np.zeros((bound, 9), dtype=np.int64)
    nbr = np.full((deg, bound), -1, dtype=np.int32)
    ident = kernels.normalize_pack(np.eye(3, dtype=np.int64).reshape(1, 9), q)[0]
    elems[0] = ident
    digits[0] = np.eye(3, dtype=np.int64).ravel()
    lookup[ident] = 0
    n = 1
    lo = 0
    while lo < n:
        hi = n
        block = digits[lo:hi]
        for j in range(deg):
            codes = kernels.pgl_mul_normalize(block, gens[j], q)
            idx = lookup[codes]
            fresh = np.nonzero(idx < 0)[0]
            if len(fresh):
                u, first = np.unique(codes[fresh], return_index=True)
                k = len(u)
                if n + k > bound:
                    raise AssertionError("closure exceeds |PGL_3(F_q)|")
                lookup[u] = np.arange(n, n + k, dtype=np.int32)
                elems[n : n + k] = u
                digits[n : n + k] = unpack(u, q)
                n += k
                idx = lookup[codes]
            nbr[j, lo:hi] = idx
        lo = hi
    return CayleyComplexData(p, q, elems[:n].copy(), np.ascontiguousarray(nbr[:, :n]), gens)


def write_cayley(C: CayleyComplexData, path) -> None:
    """Header: magic, u32 p, q, |G|, degree; then |G| x degree u32 neighbor ids
    (row g lists g*s_j), then |G| u64 packed elements."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<4I", C.p, C.q, C.n, C.degree))
        fh.write(np.ascontiguousarray(C.nbr.T).astype("<u4").tobytes())
        fh.write(C.elements.astype("<u8").tobytes())


def read_cayley(path) -> CayleyComplexData:
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError(f"{path}: bad magic")
        p, q, n, deg = struct.unpack("<4I", fh.read(16))
        nbr = np.frombuffer(fh.read(4 * n * deg), dtype="<u4").reshape(n, deg)
        elems = np.frombuffer(fh.read(8 * n), dtype="<u8").astype(np.int64)
    gens = reduce_mod_q(enumerate_sp(p), q)
    return CayleyComplexData(p, q, elems, np.ascontiguousarray(nbr.T).astype(np.int32), gens)


def load_or_build(p: int, q: int, budget_mb: int = 4000) -> CayleyComplexData:
    """Use the cache under ``HDX_DATA_DIR`` when set."""
    d = os.environ.get("HDX_DATA_DIR")
    if d:
        path = os.path.join(d, f"cayley_p{p}_q{q}.bin")
        if os.path.exists(path):
            return read_cayley(path)
    C = build_cayley(p, q, budget_mb)
    if d:
        os.makedirs(d, exist_ok=True)
        write_cayley(C, path)
    return C


def identity_link(S: np.ndarray, q: int, sig: "SigmaTables | None" = None):
    """Link of the identity in X^{p,q} as a bipartite adjacency list.

    Left vertices are the s, right vertices the s''^(-1) = s s'. The triangles
    through e are {e, s, s s'} with s' a closer of s, so s ~ s'' exactly when
    s s' s'' is scalar over Z[i]. Reduction mod q must keep all 2n vertices apart.
    """
    gens = reduce_mod_q(S, q)
    n = len(gens)
    inv = np.stack([_pgl_inverse(g, q) for g in gens])
    codes = kernels.normalize_pack(np.concatenate([gens, inv]), q)
    if len(set(int(c) for c in codes)) != 2 * n:
        raise ValueError(f"generators and inverses collide mod {q}")
    sig = sig if sig is not None else sigma_tables(S)
    adj = [set() for _ in range(2 * n)]
    for a in range(n):
        for b in sig.closers[a]:
            c = sig.third[(a, b)]
            adj[a].add(n + c)
            adj[n + c].add(a)
    return [sorted(x) for x in adj]


def _pgl_inverse(d, q):
    M = np.asarray(d, dtype=np.int64).reshape(3, 3)
    adj = np.zeros((3, 3), dtype=np.int64)
    for i in range(3):
        for j in range(3):
            minor = np.delete(np.delete(M, i, 0), j, 1)
            adj[j, i] = (-1) ** (i + j) * (minor[0, 0] * minor[1, 1] - minor[0, 1] * minor[1, 0])
    return (adj % q).ravel()


# -- geodesic continuations ----------------------------------------------------


def iota_root(p: int, k: int) -> int:
    """rho with rho^2 = -1 mod p^k and pi = a + b rho = 0 mod p."""
    pi = gaussian_prime(p)
    a, b = int(pi.real), int(pi.imag)
    rho = (-a * pow(b, -1, p)) % p
    mod = p
    for _ in range(1, k):
        mod *= p
        # Newton step for x^2 + 1
        rho = (rho - (rho * rho + 1) * pow(2 * rho, -1, mod)) % mod
    assert (rho * rho + 1) % (p**k) == 0
    return rho


def _iota(M: np.ndarray, rho: int, mod: int) -> np.ndarray:
    re = np.round(M.real).astype(object)
    im = np.round(M.imag).astype(object)
    return (re + rho * im) % mod


def _type_0kk(Ms: np.ndarray, p: int, k: int, rho: int) -> np.ndarray:
    """Mask of products whose image has elementary divisors (0, k, k) at pi."""
    mod = p**k
    I = _iota(Ms, rho, mod)
    nonzero = np.any(I % p != 0, axis=(1, 2))
    ok = nonzero.copy()
    for (r1, r2), (c1, c2) in itertools.product(itertools.combinations(range(3), 2), repeat=2):
        m = (I[:, r1, c1] * I[:, r2, c2] - I[:, r1, c2] * I[:, r2, c1]) % mod
        ok &= m == 0
    return ok


def valid_continuations(S: np.ndarray, sig: SigmaTables, leg, k: int | None = None) -> list[tuple]:
    """Words t with leg -> t -> back closing a triangle of the geodesic k-power.

    ``leg`` is a word of length k; t runs over color-1 k-geodesic words and is
    kept when the Gaussian product leg * t has type (0, k, k) at pi, which
    says that a color-1 k-geodesic leads from its endpoint back to the start.
    """
    k = len(leg) if k is None else k
    p = int(round(abs(S[0, :, 0] @ S[0, :, 0].conj())))
    rho = iota_root(p, k)
    L = S[leg[0]]
    for a in leg[1:]:
        L = L @ S[a]
    words, prods = _words_from(S, sig, k)
    Ms = np.einsum("ij,njk->nik", L, prods)
    mask = _type_0kk(Ms, p, k, rho)
    return [words[i] for i in np.nonzero(mask)[0]]


_WORD_CACHE: dict = {}


def _words_from(S, sig, k):
    key = (id(S), k)
    if key not in _WORD_CACHE:
        _WORD_CACHE[key] = power_generators(S, sig, k)
    return _WORD_CACHE[key]


def decompose_word(S: np.ndarray, M: np.ndarray, k: int) -> tuple | None:
    """Write M (up to scalar) as a product of k generators, if possible."""
    p = int(round(abs(S[0, :, 0] @ S[0, :, 0].conj())))
    M = _unit_normalize(M)
    word = []
    for _ in range(k - 1):
        hit = None
        for a in range(len(S)):
            P = S[a].conj().T @ M
            if all(_divides(complex(p), complex(z)) for z in P.ravel()):
                hit = a
                break
        if hit is None:
            return None
        word.append(hit)
        M = _unit_normalize(S[hit].conj().T @ M)
    last = _key(M)
    for a in range(len(S)):
        if _key(S[a]) == last:
            return tuple(word + [a])
    return None
