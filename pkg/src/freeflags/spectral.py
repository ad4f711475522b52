"""Exact and numerical spectra of free projective planes and related operators."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .flags import FreeProjPlaneGraph, build_pfr2, delta_matrix, line_count
from .iso import find_isomorphism
from .linalg import LARGE_PRIME, bareiss_rank, lanczos, rank_mod_p
from .ring import LocalRing, ring_make

__all__ = [
    "SparseOperator",
    "SpectrumReport",
    "q_matrix",
    "q_delta",
    "n_table_value",
    "measured_n_table",
    "verify_N_table",
    "verify_q_delta",
    "verify_annihilator",
    "compressed_product",
    "b_ell_compressed",
    "b_ell_difference",
    "verify_b_difference",
    "spectrum_exact",
    "expected_spectrum",
    "eigensolve",
    "isospectral_pair",
    "mixing_bound",
]


# -- the Q operator --------------------------------------------------------


def q_matrix(G: FreeProjPlaneGraph) -> np.ndarray:
    """Dense integer Q = A^2 restricted to lines (number of common planes)."""
    B = G.incidence_sparse()
    return (B @ B.T).toarray().astype(np.int64)


def q_delta(q: int, r: int, d: int) -> int:
    return (q + 1) * q ** (r - 1) if d == 0 else q ** (r - d)


def verify_q_delta(G: FreeProjPlaneGraph, Q: np.ndarray | None = None) -> dict:
    """Check Q[v, w] == Q_delta(Delta(v, w)) for every pair."""
    ring = G.ring
    Q = q_matrix(G) if Q is None else Q
    D = delta_matrix(ring, G.lines)
    table = np.array([q_delta(ring.q, ring.r, d) for d in range(ring.r + 1)])
    mism = int(np.count_nonzero(Q != table[D]))
    return {"mismatches": mism, "q_delta": table.tolist()}


def n_table_value(q: int, r: int, d: int, e: int, z: int) -> int:
    """Closed-form N^d_{e,z}: number of u with Delta(v,u)=e, Delta(u,w)=z."""
    e, z = min(e, z), max(e, z)
    if not (d < e == z or e <= z == d):
        return 0
    if e == 0:
        return 1
    same = e == d
    if e < r:
        return ((q * q - 2) if same else (q * q - 1)) * q ** (2 * (e - 1))
    return ((q * q + q - 1) if same else (q * q + q)) * q ** (2 * (r - 1))


def measured_n_table(ring: LocalRing, lines: np.ndarray, D: np.ndarray | None = None):
    """Exhaustive N^d_{e,z} counts over all ordered pairs (v, w).

    Returns ``(table, consistent)`` where ``table[d, e, z]`` is the common
    value and ``consistent`` says whether it is the same for every pair with
    Delta(v, w) = d.
    """
    r = ring.r
    D = delta_matrix(ring, lines) if D is None else D
    N = len(lines)
    R1 = r + 1
    table = np.full((R1, R1, R1), -1, dtype=np.int64)
    consistent = True
    for v in range(N):
        idx = D[v][None, :] * R1 + D  # row w: (Delta(v,u), Delta(u,w)) over u
        offs = np.arange(N)[:, None] * (R1 * R1)
        counts = np.bincount((idx + offs).ravel(), minlength=N * R1 * R1).reshape(N, R1, R1)
        for d in range(R1):
            ws = np.nonzero(D[v] == d)[0]
            if len(ws) == 0:
                continue
            block = counts[ws]
            if not np.all(block == block[0]):
                consistent = False
            if table[d, 0, 0] < 0:
                table[d] = block[0]
            elif not np.array_equal(table[d], block[0]):
                consistent = False
    return table, consistent


def verify_N_table(G: FreeProjPlaneGraph) -> dict:
    ring = G.ring
    q, r = ring.q, ring.r
    table, consistent = measured_n_table(ring, G.lines)
    mism = []
    for d in range(r + 1):
        if table[d, 0, 0] < 0:
            continue
        for e in range(r + 1):
            for z in range(r + 1):
                want = n_table_value(q, r, d, e, z)
                if int(table[d, e, z]) != want:
                    mism.append((d, e, z, int(table[d, e, z]), want))
    return {"consistent": consistent, "mismatches": mism, "table": table.tolist()}


# -- annihilator -------------------------------------------------------------


def _exact_matmul(A: np.ndarray, B: np.ndarray, bound: int) -> np.ndarray:
    if bound < 2**53:
        return np.rint(A.astype(np.float64) @ B.astype(np.float64)).astype(np.int64)
    if bound < 2**62:
        return A @ B
    return np.array(A, dtype=object) @ np.array(B, dtype=object)


def verify_annihilator(G: FreeProjPlaneGraph, Q: np.ndarray | None = None) -> dict:
    """Check prod_{j=r}^{2r-1} (Q - q^j I) == c J exactly."""
    ring = G.ring
    q, r = ring.q, ring.r
    Q = q_matrix(G) if Q is None else Q
    N = len(Q)
    lam1 = (q + 1) ** 2 * q ** (2 * (r - 1))
    num = 1
    for j in range(r, 2 * r):
        num *= lam1 - q**j
    c = Fraction(num, N)
    P = np.eye(N, dtype=np.int64)
    bound = 1
    for j in range(r, 2 * r):
        F = Q - q**j * np.eye(N, dtype=np.int64)
        bound *= lam1 + q**j
        P = _exact_matmul(P, F, bound)
    holds = c.denominator == 1 and c != 0 and bool(np.all(P == int(c)))
    return {"holds": holds, "c": int(c) if c.denominator == 1 else str(c), "n": N, "path": "dense"}


def compressed_product(q: int, r: int, A: list, B: list) -> list:
    """(AB)_d = sum_{e,z} N^d_{e,z} A_e B_z for Delta-indexed matrices."""
    out = []
    for d in range(r + 1):
        s = 0
        for e in range(r + 1):
            for z in range(r + 1):
                n = n_table_value(q, r, d, e, z)
                if n:
                    s += n * A[e] * B[z]
        out.append(s)
    return out


def b_ell_compressed(q: int, r: int, ell: int) -> list:
    Qc = [q_delta(q, r, d) for d in range(r + 1)]
    P = [1] + [0] * r  # identity: 1 at Delta=0
    for j in range(r, r + ell):
        F = [Qc[d] - (q**j if d == 0 else 0) for d in range(r + 1)]
        P = compressed_product(q, r, P, F)
    return P


def b_ell_difference(q: int, r: int, ell: int, d: int) -> int:
    """Claimed B^(ell)_{d-1} - B^(ell)_d."""
    if 1 <= d <= ell:
        return 0
    e = ell * r - d + math.comb(ell - 1, 2)
    val = q**e * (q**ell - 1)
    for j in range(d - ell, d - 1):
        val *= q**j - 1
    return val


def verify_b_difference(q: int, r: int, G: FreeProjPlaneGraph | None = None) -> dict:
    """Compare the closed difference formula with B^(ell) computed directly.

    ``G`` supplies a dense cross-check of the compressed values.
    """
    rows = []
    Q = None
    D = None
    if G is not None:
        Q = q_matrix(G)
        D = delta_matrix(G.ring, G.lines, rows=np.array([0]))[0]
    for ell in range(1, r + 1):
        Bc = b_ell_compressed(q, r, ell)
        dense_ok = None
        if Q is not None:
            N = len(Q)
            P = np.eye(N, dtype=np.int64)
            lam1 = (q + 1) ** 2 * q ** (2 * (r - 1))
            bound = 1
            for j in range(r, r + ell):
                bound *= lam1 + q**j
                P = _exact_matmul(P, Q - q**j * np.eye(N, dtype=np.int64), bound)
            row = P[0]
            dense_ok = all(int(row[w]) == Bc[int(D[w])] for w in range(N))
        for d in range(1, r + 1):
            got = Bc[d - 1] - Bc[d]
            want = b_ell_difference(q, r, ell, d)
            rows.append({"ell": ell, "delta": d, "computed": int(got), "formula": int(want), "match": got == want, "dense_agrees": dense_ok})
    return {"rows": rows, "all_match": all(x["match"] for x in rows)}


# -- spectra ---------------------------------------------------------------


@dataclass
class SpectrumReport:
    eigenvalues: list  # dicts {value_squared_exact, sign, value_float, multiplicity}
    method: str
    residual: float | None = None
    extra: dict = field(default_factory=dict)

    def total_multiplicity(self) -> int:
        return sum(e["multiplicity"] for e in self.eigenvalues)

    def floats(self) -> np.ndarray:
        out = []
        for e in self.eigenvalues:
            out += [e["value_float"]] * e["multiplicity"]
        return np.sort(np.array(out))

    def to_json(self) -> dict:
        return {"eigenvalues": self.eigenvalues, "method": self.method, "residual": self.residual, **self.extra}


def expected_spectrum(q: int, r: int) -> dict:
    """Eigenvalues of Q: value -> multiplicity unknown (values only)."""
    vals = [(q + 1) ** 2 * q ** (2 * (r - 1))] + [q**j for j in range(2 * r - 1, r - 1, -1)]
    return {"q_eigenvalues": vals, "adjacency": sorted({s * math.sqrt(v) for v in vals for s in (1, -1)})}


def spectrum_exact(G: FreeProjPlaneGraph, Q: np.ndarray | None = None, exact_limit: int = 200) -> SpectrumReport:
    """Spectrum of P^2_fr with exact multiplicities.

    Multiplicity of each candidate eigenvalue lam of Q is the nullity of
    (Q - lam I).  Up to ``exact_limit`` lines the rank is computed over Q by
    fraction-free elimination; above it, ranks are taken mod a large prime.
    A mod-p rank never exceeds the rational rank, and Q is diagonalizable with
    eigenvalues among the candidates (annihilator), so when the mod-p
    nullities already sum to N they are the rational ones.
    """
    ring = G.ring
    q, r = ring.q, ring.r
    Q = q_matrix(G) if Q is None else Q
    N = len(Q)
    ann = verify_annihilator(G, Q)
    if not ann["holds"]:
        raise AssertionError("annihilator identity fails; spectrum not determined")
    cands = [(q + 1) ** 2 * q ** (2 * (r - 1))] + [q**j for j in range(2 * r - 1, r - 1, -1)]
    mults = []
    method = "exact-rank" if N <= exact_limit else "rank-mod-p-certified"
    for lam in cands:
        M = Q - lam * np.eye(N, dtype=np.int64)
        rk = bareiss_rank(M.tolist()) if N <= exact_limit else rank_mod_p(M, LARGE_PRIME)
        mults.append(N - rk)
    if sum(mults) != N:
        raise AssertionError(f"nullities {mults} do not sum to {N}; certificate failed")
    eig = []
    for lam, m in zip(cands, mults):
        if m == 0:
            continue
        for sign in (1, -1):
            eig.append({"value_squared_exact": int(lam), "sign": sign, "value_float": sign * math.sqrt(lam), "multiplicity": int(m)})
    eig.sort(key=lambda e: -e["value_float"])
    return SpectrumReport(eig, method, None, {"annihilator_c": ann["c"], "n_vertices": 2 * N})


@dataclass
class SparseOperator:
    """Symmetric operator given by a matvec (and optionally a dense matrix)."""

    n: int
    matvec: object
    dense: object = None

    @classmethod
    def from_matrix(cls, M):
        from scipy.sparse import issparse

        if issparse(M):
            M = M.tocsr()
            return cls(M.shape[0], lambda x: M @ x, lambda: M.toarray())
        M = np.asarray(M, dtype=np.float64)
        return cls(len(M), lambda x: M @ x, lambda: M)

    @classmethod
    def from_adjacency(cls, adj, normalized: bool = False):
        from scipy.sparse import csr_matrix

        n = len(adj)
        rows = np.concatenate([np.full(len(a), i) for i, a in enumerate(adj)]) if n else np.zeros(0, int)
        cols = np.concatenate([np.asarray(a, dtype=np.int64) for a in adj]) if n else np.zeros(0, int)
        M = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
        if normalized:
            deg = np.asarray(M.sum(axis=1)).ravel()
            s = 1.0 / np.sqrt(np.where(deg > 0, deg, 1))
            M = csr_matrix(M.multiply(s[:, None]).multiply(s[None, :]))
        return cls.from_matrix(M)


def eigensolve(op: SparseOperator, k: int | None = None, mode: str = "auto", tol: float = 1e-8, seed: int = 0, deflate=None) -> SpectrumReport:
    """Top-k (or full) spectrum.

    ``dense`` uses a symmetric dense solver (n <= 4000); ``lanczos`` uses the
    thick-restart Lanczos of this package; ``arpack`` calls scipy for a
    cross-check.  ``auto`` picks dense below 4000 vertices.
    """
    if mode == "auto":
        mode = "dense" if op.n <= 4000 and op.dense is not None else "lanczos"
    if mode == "dense":
        M = np.asarray(op.dense(), dtype=np.float64)
        if not np.allclose(M, M.T, atol=1e-12):
            raise ValueError("operator is not symmetric")
        w, V = np.linalg.eigh(M)
        w, V = w[::-1], V[:, ::-1]
        if k is not None:
            w, V = w[:k], V[:, :k]
        res = float(np.max(np.linalg.norm(M @ V - V * w, axis=0))) if len(w) else 0.0
        vals = [{"value_float": float(x), "multiplicity": 1} for x in w]
        return SpectrumReport(vals, "dense", res, {"vectors": V})
    if mode == "lanczos":
        kk = k or 6
        out = lanczos(op.matvec, op.n, kk, tol=tol, seed=seed, deflate=deflate)
        vals = [{"value_float": float(x), "multiplicity": 1} for x in out.values]
        rep = SpectrumReport(vals, "lanczos", float(np.max(out.residuals)), {"vectors": out.vectors, "converged": out.converged, "matvecs": out.matvecs})
        if not out.converged:
            rep.extra["warning"] = f"not converged; residual {float(np.max(out.residuals)):.3e}"
        return rep
    if mode == "arpack":
        from scipy.sparse.linalg import LinearOperator, eigsh

        kk = k or 6
        L = LinearOperator((op.n, op.n), matvec=op.matvec, dtype=np.float64)
        w, V = eigsh(L, k=kk, which="LA", tol=tol * 1e-2)
        order = np.argsort(w)[::-1]
        w, V = w[order], V[:, order]
        res = max(float(np.linalg.norm(op.matvec(V[:, i]) - w[i] * V[:, i])) for i in range(kk))
        return SpectrumReport([{"value_float": float(x), "multiplicity": 1} for x in w], "arpack", res, {"vectors": V})
    raise ValueError(f"unknown mode {mode!r}")


def isospectral_pair(q: int, r: int, budget_s: float = 600.0) -> dict:
    """Compare P^2_fr over Z/q^r and over F_q[t]/(t^r)."""
    from .ring import is_prime

    if not is_prime(q):
        raise ValueError("isospectral_pair needs q prime")
    G1 = build_pfr2(ring_make("padic", q, 1, r))
    G2 = build_pfr2(ring_make("laurent", q, 1, r))
    s1 = spectrum_exact(G1).eigenvalues
    s2 = spectrum_exact(G2).eigenvalues
    strip = lambda s: [(e["value_squared_exact"], e["sign"], e["multiplicity"]) for e in s]
    iso = find_isomorphism(G1.adjacency_lists(), G2.adjacency_lists(), budget_s=budget_s)
    return {
        "q": q,
        "r": r,
        "spectra_equal": strip(s1) == strip(s2),
        "isomorphic": {"isomorphic": True, "non-isomorphic": False}.get(iso.status),
        "iso_status": iso.status,
        "search_nodes": iso.nodes,
    }


def mixing_bound(adj, S, T, lam1: float, lam2: float, n: int | None = None) -> dict:
    """Expander mixing comparison: |E(S,T)| <= lam1 |S||T|/n + lam2 sqrt(|S||T|).

    E(S, T) counts ordered pairs (s, t) with s in S, t in T adjacent.
    """
    n = len(adj) if n is None else n
    Tset = set(int(t) for t in T)
    E = sum(1 for s in S for w in adj[int(s)] if int(w) in Tset)
    s, t = len(set(S)), len(Tset)
    main = lam1 * s * t / n if n else 0.0
    bound = main + lam2 * math.sqrt(s * t)
    return {"edges": E, "main_term": main, "bound": bound, "holds": E <= bound + 1e-9, "deviation": abs(E - main), "deviation_bound": lam2 * math.sqrt(s * t)}
