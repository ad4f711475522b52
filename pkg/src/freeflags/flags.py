"""Free submodules of O_r^3 and the free projective plane over O_r."""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .ring import LocalRing, submodule_type

__all__ = [
    "CanonicalLine",
    "CanonicalPlane",
    "FreeProjPlaneGraph",
    "FreeFlagComplex",
    "line_count",
    "canonicalize",
    "canonicalize_arr",
    "enumerate_lines",
    "build_pfr2",
    "delta",
    "delta_brute",
    "delta_matrix",
    "build_pfr_d",
    "free_summands",
    "enumerate_submodules",
    "export_edge_list",
]


def line_count(q: int, r: int) -> int:
    return (q * q + q + 1) * q ** (2 * (r - 1))


@dataclass(frozen=True)
class CanonicalLine:
    """Unimodular vector whose first unit coordinate is 1."""

    coords: tuple[int, ...]
    pivot: int

    def key(self):
        return (self.pivot, self.coords)


@dataclass(frozen=True)
class CanonicalPlane:
    """Kernel of a unimodular functional, normalized like a line."""

    functional: tuple[int, ...]
    pivot: int

    def contains(self, ring: LocalRing, line: CanonicalLine) -> bool:
        s = 0
        for a, b in zip(self.functional, line.coords):
            s = ring.add(s, ring.mul(a, b))
        return s == 0


def canonicalize(ring: LocalRing, v) -> CanonicalLine:
    v = [int(x) % ring.size for x in v]
    for i, x in enumerate(v):
        if ring.is_unit(x):
            inv = ring.inv(x)
            return CanonicalLine(tuple(ring.mul(inv, y) for y in v), i)
    raise ValueError(f"{v} is not unimodular")


def canonicalize_arr(ring: LocalRing, V: np.ndarray) -> np.ndarray:
    """Row-wise canonical form of unimodular vectors (rows of ``V``)."""
    V = np.asarray(V, dtype=np.int64) % ring.size
    unit = V % ring.base != 0
    if not unit.any(axis=1).all():
        raise ValueError("non-unimodular row")
    piv = unit.argmax(axis=1)
    inv = ring.inv_table[V[np.arange(len(V)), piv]]
    return ring.mul_arr(V, inv[:, None])


def _encode(ring: LocalRing, V: np.ndarray) -> np.ndarray:
    S = ring.size
    code = np.zeros(len(V), dtype=np.int64)
    for j in range(V.shape[1]):
        code = code * S + V[:, j]
    return code


def enumerate_lines(ring: LocalRing, n: int = 3) -> list[CanonicalLine]:
    """All free rank-1 submodules of O_r^n, ordered by pivot then coordinates."""
    arr = _line_array(ring, n)
    piv = (arr % ring.base != 0).argmax(axis=1)
    return [CanonicalLine(tuple(int(x) for x in row), int(p)) for row, p in zip(arr, piv)]


def _line_array(ring: LocalRing, n: int = 3) -> np.ndarray:
    S, b = ring.size, ring.base
    allv = np.arange(S, dtype=np.int64)
    nonunit = allv[allv % b == 0]
    blocks = []
    for piv in range(n):
        axes = [nonunit] * piv + [np.array([1], dtype=np.int64)] + [allv] * (n - piv - 1)
        grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        blocks.append(grid)
    return np.concatenate(blocks, axis=0)


@dataclass
class FreeProjPlaneGraph:
    """Bipartite incidence graph of free rank-1 and rank-2 submodules of O_r^3.

    Vertex ``i < N`` is ``lines[i]``; vertex ``N + j`` is the plane
    ``ker(planes[j])``.  ``line_adj[i]`` lists plane indices (0-based within
    the plane block) and ``plane_adj[j]`` lists line indices.
    """

    ring: LocalRing
    lines: np.ndarray
    planes: np.ndarray
    line_adj: np.ndarray
    plane_adj: np.ndarray

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    @property
    def n_vertices(self) -> int:
        return 2 * len(self.lines)

    @property
    def degree(self) -> int:
        return self.line_adj.shape[1]

    def edges(self) -> np.ndarray:
        N = self.n_lines
        rows = np.repeat(np.arange(N), self.degree)
        return np.stack([rows, N + self.line_adj.ravel()], axis=1)

    def adjacency_lists(self) -> list[list[int]]:
        N = self.n_lines
        adj = [[N + int(j) for j in row] for row in self.line_adj]
        adj += [[int(i) for i in row] for row in self.plane_adj]
        return adj

    def incidence_sparse(self):
        """Sparse 0/1 matrix with rows = lines and columns = planes."""
        from scipy.sparse import csr_matrix

        N, k = self.n_lines, self.degree
        data = np.ones(N * k, dtype=np.int64)
        return csr_matrix((data, (np.repeat(np.arange(N), k), self.line_adj.ravel())), shape=(N, N))

    def adjacency_sparse(self):
        from scipy.sparse import bmat

        B = self.incidence_sparse()
        return bmat([[None, B], [B.T, None]], format="csr")

    def metadata(self) -> dict:
        return {
            "q": self.ring.q,
            "r": self.ring.r,
            "ring": self.ring.spec,
            "n_vertices": self.n_vertices,
            "degree": self.degree,
        }


def _incidence_pairs(ring: LocalRing, L: np.ndarray, P: np.ndarray, chunk: int = 2048):
    rows, cols = [], []
    for s in range(0, len(P), chunk):
        D = ring.dot_arr(P[s : s + chunk], L)
        pi, li = np.nonzero(D == 0)
        rows.append(pi + s)
        cols.append(li)
    return np.concatenate(rows), np.concatenate(cols)


def build_pfr2(ring: LocalRing) -> FreeProjPlaneGraph:
    """Incidence graph of P^2_fr(O_r) with adjacency computed as phi . v = 0."""
    L = _line_array(ring, 3)
    P = L.copy()
    pi, li = _incidence_pairs(ring, L, P)
    N = len(L)
    k = (ring.q + 1) * ring.q ** (ring.r - 1)
    order = np.lexsort((li, pi))
    pi, li = pi[order], li[order]
    if len(pi) != N * k or not np.all(np.bincount(pi, minlength=N) == k):
        raise AssertionError("plane degrees are not (q+1)q^(r-1)")
    plane_adj = li.reshape(N, k)
    order = np.lexsort((pi, li))
    if not np.all(np.bincount(li, minlength=N) == k):
        raise AssertionError("line degrees are not (q+1)q^(r-1)")
    line_adj = pi[order].reshape(N, k)
    return FreeProjPlaneGraph(ring, L, P, line_adj, plane_adj)


def delta(ring: LocalRing, u, w) -> int:
    """Ultrametric depth: ``r - max{i : u = eps*w mod pi^i, eps a unit}``."""
    u = canonicalize(ring, getattr(u, "coords", u)).coords
    w = canonicalize(ring, getattr(w, "coords", w)).coords
    agree = min(ring.val(ring.sub(a, b)) for a, b in zip(u, w))
    return ring.r - agree


def delta_brute(ring: LocalRing, u, w) -> int:
    """Reference implementation searching over all units."""
    u = list(getattr(u, "coords", u))
    w = list(getattr(w, "coords", w))
    best = 0
    for eps in ring.units():
        ew = [ring.mul(eps, x) for x in w]
        for i in range(ring.r, best, -1):
            if all(ring.reduce(a, i) == ring.reduce(b, i) for a, b in zip(u, ew)):
                best = i
                break
    return ring.r - best


def delta_matrix(ring: LocalRing, L: np.ndarray, rows: np.ndarray | None = None) -> np.ndarray:
    """Delta between canonical lines ``L[rows]`` and all of ``L``."""
    L = np.asarray(L, dtype=np.int64)
    A = L if rows is None else L[rows]
    agree = np.full((len(A), len(L)), ring.r, dtype=np.int64)
    b = ring.base
    for j in range(L.shape[1]):
        # x - y = 0 mod pi^k iff the lowest k base-digits agree (both encodings)
        v = np.full(agree.shape, ring.r, dtype=np.int64)
        for k in range(ring.r - 1, -1, -1):
            m = b ** (k + 1)
            v[(A[:, j][:, None] % m) != (L[:, j][None, :] % m)] = k
        agree = np.minimum(agree, v)
    return ring.r - agree


# -- general free summands and flag complexes ---------------------------------


def free_summands(ring: LocalRing, n: int, k: int) -> list[np.ndarray]:
    """Free rank-k summands of O_r^n as canonical n x k basis matrices.

    Canonical form: the pivot rows (greedy reduced echelon positions mod pi)
    carry the identity; a row above the pivot of column j has a non-unit in
    column j.
    """
    S, b = ring.size, ring.base
    out = []
    for P in itertools.combinations(range(n), k):
        slots = []
        for i in range(n):
            if i in P:
                continue
            for j in range(k):
                slots.append((i, j, i < P[j]))
        choices = [range(0, S, b) if restricted else range(S) for (_, _, restricted) in slots]
        for vals in itertools.product(*choices):
            M = np.zeros((n, k), dtype=np.int64)
            for j, p in enumerate(P):
                M[p, j] = 1
            for (i, j, _), x in zip(slots, vals):
                M[i, j] = x
            out.append(M)
    return out


def _contains(ring: LocalRing, big: np.ndarray, small: np.ndarray) -> bool:
    piv = _pivots(ring, big)
    coeff = small[list(piv), :]
    recon = np.zeros_like(small)
    for t in range(big.shape[1]):
        recon = ring.add_arr(recon, ring.mul_arr(big[:, t][:, None], coeff[t][None, :]))
    return bool(np.array_equal(recon, small % ring.size))


def _pivots(ring: LocalRing, M: np.ndarray) -> tuple[int, ...]:
    piv = []
    for j in range(M.shape[1]):
        col = M[:, j]
        for i in range(M.shape[0]):
            if col[i] == 1 and all(M[i, t] == 0 for t in range(M.shape[1]) if t != j):
                piv.append(i)
                break
    return tuple(piv)


@dataclass
class FreeFlagComplex:
    """Free flags in O_r^(d+1): vertices are free proper summands, cells are chains."""

    ring: LocalRing
    d: int
    vertices: list[np.ndarray]
    ranks: list[int]
    cells: dict[int, list[tuple[int, ...]]] = field(default_factory=dict)

    def n_cells(self, dim: int) -> int:
        return len(self.cells.get(dim, []))


def build_pfr_d(ring: LocalRing, d: int, max_flags: int = 10**7) -> FreeFlagComplex:
    """The free projective d-space over O_r (d <= 3)."""
    if not 1 <= d <= 3:
        raise ValueError("d must be in 1..3")
    n = d + 1
    q, r = ring.q, ring.r

    def gauss_binom(n_, k_):
        num = den = 1
        for i in range(k_):
            num *= q ** (n_ - i) - 1
            den *= q ** (i + 1) - 1
        return num // den

    est = sum(gauss_binom(n, k) * q ** (k * (n - k) * (r - 1)) for k in range(1, n))
    if est > max_flags:
        raise OverflowError(f"free projective space has ~{est} vertices, exceeds {max_flags}")
    verts, ranks = [], []
    for k in range(1, n):
        for M in free_summands(ring, n, k):
            verts.append(M)
            ranks.append(k)
    cells = {0: [(i,) for i in range(len(verts))]}
    by_rank = {k: [i for i, rk in enumerate(ranks) if rk == k] for k in range(1, n)}
    cover = {}
    for k in range(1, n - 1):
        for i in by_rank[k]:
            cover[i] = [j for j in by_rank[k + 1] if _contains(ring, verts[j], verts[i])]
    # chains of increasing rank, each a cell
    prev = [(i,) for i in range(len(verts))]
    dim = 0
    while prev:
        nxt = []
        for c in prev:
            top = c[-1]
            for k2 in range(ranks[top] + 1, n):
                for j in by_rank[k2]:
                    if _contains(ring, verts[j], verts[top]):
                        nxt.append(c + (j,))
        dim += 1
        if nxt:
            cells[dim] = nxt
        prev = nxt
    return FreeFlagComplex(ring, d, verts, ranks, cells)


# -- brute-force submodule enumeration (oracles) -------------------------------


def _all_vectors(ring: LocalRing, n: int) -> np.ndarray:
    S = ring.size
    return np.stack(np.meshgrid(*[np.arange(S)] * n, indexing="ij"), axis=-1).reshape(-1, n)


def enumerate_submodules(ring: LocalRing, n: int = 3) -> list[dict]:
    """Every submodule of O_r^n, by closing spans.  Only for tiny rings.

    Returns dicts with ``members`` (frozenset of vector codes) and ``gens``
    (a generating list of vectors).
    """
    S = ring.size
    if S**n > 4096:
        raise OverflowError("brute-force enumeration limited to |O_r^n| <= 4096")
    V = _all_vectors(ring, n)
    codes = _encode(ring, V)
    index = {int(c): i for i, c in enumerate(codes)}
    scal = np.stack([ring.mul_arr(V, np.full((len(V), 1), a)) for a in range(S)])  # a*v
    cyclic = [frozenset(int(c) for c in _encode(ring, scal[:, i, :])) for i in range(len(V))]
    vec_of = {int(c): V[i] for i, c in enumerate(codes)}

    def add_sets(A, B):
        out = set()
        for a in A:
            va = vec_of[a]
            for b in B:
                s = ring.add_arr(va, vec_of[b])
                out.add(int(_encode(ring, s[None, :])[0]))
        return frozenset(out)

    zero = frozenset([0])
    found = {zero: []}
    frontier = [zero]
    while frontier:
        new = []
        for M in frontier:
            gens = found[M]
            for i in range(len(V)):
                if int(codes[i]) in M:
                    continue
                M2 = add_sets(M, cyclic[i])
                if M2 not in found:
                    found[M2] = gens + [V[i].copy()]
                    new.append(M2)
        frontier = new
    return [{"members": M, "gens": g} for M, g in found.items()]


def quotient_type(ring: LocalRing, members: frozenset, n: int = 3) -> tuple[int, ...]:
    """Elementary divisor exponents of O_r^n / M, descending and zero-padded to n."""
    V = _all_vectors(ring, n)
    sizes = []
    for k in range(ring.r + 1):
        piV = {int(c) for c in _encode(ring, ring.mul_arr(V, np.full((len(V), 1), ring.pi_pow(k))))}
        # |pi^k O^n + M|
        span = set()
        Mv = [_decode(ring, m, n) for m in members]
        for a in piV:
            va = _decode(ring, a, n)
            for vb in Mv:
                span.add(int(_encode(ring, ring.add_arr(va, vb)[None, :])[0]))
        sizes.append(len(span) // len(members))
    # |pi^k T| = prod_i q^{max(lambda_i - k, 0)}
    q = ring.q
    logs = [round(np.log(s) / np.log(q)) for s in sizes]
    # number of parts >= k+1 equals logs[k] - logs[k+1]
    parts = []
    for k in range(ring.r):
        at_least = logs[k] - logs[k + 1]
        parts.append(at_least)
    lam = []
    for k in range(ring.r, 0, -1):
        cnt = parts[k - 1] - (parts[k] if k < ring.r else 0)
        lam += [k] * cnt
    lam += [0] * (n - len(lam))
    return tuple(sorted(lam, reverse=True))


def _decode(ring: LocalRing, code: int, n: int) -> np.ndarray:
    S = ring.size
    out = np.zeros(n, dtype=np.int64)
    for j in range(n - 1, -1, -1):
        out[j] = code % S
        code //= S
    return out


def submodule_exponents(ring: LocalRing, gens, n: int = 3) -> tuple[int, ...]:
    if not gens:
        return (ring.r,) * n
    return submodule_type(ring, gens, n)


def export_edge_list(G: FreeProjPlaneGraph, out_dir) -> dict:
    """Write ``edges.txt`` (``u v`` per line) and ``meta.json``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    E = G.edges()
    with open(out / "edges.txt", "w") as fh:
        for u, v in E:
            fh.write(f"{u} {v}\n")
    meta = G.metadata()
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True) + "\n")
    return meta
