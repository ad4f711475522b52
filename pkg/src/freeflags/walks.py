"""Geodesic operators, the vertex/geodesic incidence G^(r), r-walks and sampler experiments."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .cayley import (
    CayleyComplexData,
    SigmaTables,
    _unit_normalize,
    enumerate_sp,
    iota_root,
    load_or_build,
    sigma_tables,
)
from .complex import ColoredComplex, enumerate_geodesics

__all__ = [
    "lambda_m_bound",
    "CayleySetup",
    "cayley_setup",
    "apply_Am",
    "apply_Am_complex",
    "apply_A2_fast",
    "am_top_spectrum",
    "geodesics_through",
    "gvr_structure",
    "sample_geodesics",
    "sample_kwalks",
    "kwalk_structure_ok",
    "wilson_interval",
    "sampler_experiment",
    "double_sampler_experiment",
    "line_walk_sampler",
    "RWalk",
    "rwalk_mix_estimate",
    "power_edge_transition",
]


def lambda_m_bound(q: int, m: int) -> dict:
    b = (m * m + 3 * m + 2) * q**m - 2 * (m * m - 1) * q ** (m - 1) + (m * m - 3 * m + 2) * q ** (m - 2)
    k = 2 * (q * q + q + 1) * q ** (2 * (m - 1))
    return {"bound": b, "degree": k, "normalized": (m * m + 3 * m + 2) / q**m}


# -- Cayley data ---------------------------------------------------------------


@dataclass
class CayleySetup:
    S: np.ndarray
    sig: SigmaTables
    C: CayleyComplexData
    closers: np.ndarray  # (n, p+1)

    @property
    def p(self) -> int:
        return self.C.p

    @property
    def q(self) -> int:
        return self.C.q


def cayley_setup(p: int, q: int, budget_mb: int = 4000) -> CayleySetup:
    S = enumerate_sp(p)
    sig = sigma_tables(S)
    C = load_or_build(p, q, budget_mb)
    return CayleySetup(S, sig, C, np.array(sig.closers, dtype=np.int64))


def _word_image(C: CayleyComplexData, g: np.ndarray, word) -> np.ndarray:
    for a in word:
        g = C.nbr[a, g]
    return g


def apply_Am(X: CayleySetup, f: np.ndarray, m: int) -> np.ndarray:
    """(A_m f)(g) summed over endpoints of color-1 and color-2 m-geodesics."""
    f = np.asarray(f, dtype=np.float64)
    if m == 0:
        return f.copy()
    C = X.C
    if m == 1:
        return kernels.gather_sum(C.nbr, f) + kernels.gather_sum(C.nbr_inv, f)
    from .cayley import power_generators

    words, _ = power_generators(X.S, X.sig, m)
    allg = np.arange(C.n)
    out = np.zeros(C.n)
    for w in words:
        fw = _word_image(C, allg, w)
        out += f[fw]
        bw = allg
        for a in reversed(w):
            bw = C.nbr_inv[a, bw]
        out += f[bw]
    return out


def apply_A2_fast(X: CayleySetup, f: np.ndarray) -> np.ndarray:
    """A_2 from color-1 adjacency T: two-step color-1 paths are either
    geodesics or close a triangle, and each color-2 neighbor is reached
    through q+1 apexes, so A_2^+ = T^2 - (q+1) T^t."""
    C = X.C
    q = X.p
    T = lambda x: kernels.gather_sum(C.nbr, x)
    Tt = lambda x: kernels.gather_sum(C.nbr_inv, x)
    t1, t2 = T(f), Tt(f)
    return T(t1) + Tt(t2) - (q + 1) * (t1 + t2)


def am_top_spectrum(X: CayleySetup, m: int, k: int = 6, tol: float = 1e-6, seed: int = 0) -> dict:
    """Lanczos top-k of A_m with the constant vector deflated."""
    from .linalg import lanczos

    n = X.C.n
    if m == 1:
        mv = lambda x: apply_Am(X, x, 1)
    elif m == 2:
        mv = lambda x: apply_A2_fast(X, x)
    else:
        mv = lambda x: apply_Am(X, x, m)
    one = np.full((n, 1), 1 / math.sqrt(n))
    trivial = float((mv(one[:, 0]) @ one[:, 0]))
    out = lanczos(mv, n, k=k, tol=tol, seed=seed, deflate=one)
    bound = lambda_m_bound(X.p, m)
    lam2 = float(out.values[0])
    return {
        "m": m,
        "n": n,
        "trivial": round(trivial, 6),
        "top": [float(x) for x in out.values],
        "lambda2": lam2,
        "residual": float(np.max(out.residuals)),
        "converged": out.converged,
        "matvecs": out.matvecs,
        "bound": bound["bound"],
        "within_bound": lam2 <= bound["bound"] + 1e-9,
    }


def apply_Am_complex(X: ColoredComplex, f, m: int, vertices) -> dict:
    """A_m f at the given vertices of an explicit complex (exact integers)."""
    out = {}
    for v in vertices:
        if m == 0:
            out[v] = f[v]
            continue
        s = 0
        for color in (1, 2):
            for g in enumerate_geodesics(X, v, m, color=color):
                s += f[g[-1]]
        out[v] = s
    return out


# -- G^(r) ---------------------------------------------------------------------


def geodesics_through(X: ColoredComplex, v: int, r: int) -> list[tuple]:
    """Color-1 r-geodesics (as vertex tuples) that pass through v."""
    out = []
    for i in range(r + 1):
        backs = [()] if i == 0 else [tuple(reversed(g)) for g in enumerate_geodesics(X, v, i, color=2)]
        fwds = [(v,)] if r - i == 0 else enumerate_geodesics(X, v, r - i)
        for b in backs:
            for f in fwds:
                path = (b[:-1] if b else ()) + f
                if i > 0 and r - i > 0:
                    a, c = path[i - 1], path[i + 1]
                    if a == c or X.is_triangle(a, v, c):
                        continue
                out.append(path)
    return out


def gvr_structure(X: ColoredComplex, q: int, r: int, vertices, n_pairs: int = 100, n_funcs: int = 10, seed: int = 0) -> dict:
    """Check N_m^(r), lambda_1 and A^2 = sum_m N_m A_m at inner vertices.

    ``vertices`` must lie at distance >= 2r from any truncation.
    """
    rng = np.random.default_rng(seed)
    N0 = (r + 1) * (q * q + q + 1) * q ** (2 * (r - 1))
    Nm = {m: (r - m + 1) * q ** (2 * (r - m)) for m in range(1, r + 1)}
    vertices = list(vertices)
    through = {}

    def thr(v):
        if v not in through:
            through[v] = geodesics_through(X, v, r)
        return through[v]

    bad_pairs = []
    n0_bad = 0
    checked = 0
    while checked < n_pairs:
        v = int(rng.choice(vertices))
        geos = thr(v)
        if len(geos) != N0:
            n0_bad += 1
        m = int(rng.integers(1, r + 1))
        color = int(rng.integers(1, 3))
        ends = enumerate_geodesics(X, v, m, color=color)
        w = ends[int(rng.integers(len(ends)))][-1]
        cnt = sum(1 for g in geos if w in g)
        if cnt != Nm[m]:
            bad_pairs.append((v, w, m, cnt, Nm[m]))
        checked += 1
    lam1 = (r + 1) ** 2 * (q * q + q + 1) * q ** (2 * (r - 1))
    k = {m: 2 * (q * q + q + 1) * q ** (2 * (m - 1)) for m in range(1, r + 1)}
    lam_alt = N0 + sum(Nm[m] * k[m] for m in Nm)
    # A^2 restricted to vertices: sum over geodesics through v of sum over their vertices
    probe = [int(x) for x in rng.choice(vertices, size=min(len(vertices), 20), replace=False)]
    ones_ok = all(sum(len(g) for g in thr(v)) == lam1 for v in probe)
    dec_bad = 0
    for _ in range(n_funcs):
        f = rng.integers(-50, 51, size=X.n)
        for v in probe:
            lhs = sum(int(f[w]) for g in thr(v) for w in g)
            rhs = N0 * int(f[v])
            for m in Nm:
                rhs += Nm[m] * apply_Am_complex(X, f, m, [v])[v]
            dec_bad += lhs != rhs
    return {
        "N0": N0,
        "Nm": Nm,
        "pairs": checked,
        "pair_mismatches": bad_pairs,
        "N0_mismatches": n0_bad,
        "lambda1": lam1,
        "lambda1_from_counts": lam_alt,
        "lambda1_constant_ok": ones_ok,
        "decomposition_mismatches": dec_bad,
        "ok": not bad_pairs and n0_bad == 0 and lam_alt == lam1 and ones_ok and dec_bad == 0,
    }


# -- sampling on Cayley complexes ----------------------------------------------


def sample_geodesics(X: CayleySetup, k: int, size: int, rng) -> tuple[np.ndarray, np.ndarray]:
    """Uniform color-1 k-geodesics: start vertex, first letter, then Sigma steps.

    Returns (vertices (size, k+1), letters (size, k)).
    """
    n = X.C.n
    deg = len(X.S)
    p2 = X.sig.sigma.shape[1]
    g = rng.integers(0, n, size=size)
    letters = np.empty((size, k), dtype=np.int64)
    letters[:, 0] = rng.integers(0, deg, size=size)
    for i in range(1, k):
        letters[:, i] = X.sig.sigma[letters[:, i - 1], rng.integers(0, p2, size=size)]
    verts = np.empty((size, k + 1), dtype=np.int64)
    verts[:, 0] = g
    for i in range(k):
        verts[:, i + 1] = X.C.nbr[letters[:, i], verts[:, i]]
    return verts, letters


def sample_kwalks(X: CayleySetup, k: int, legs: int, size: int, rng):
    """k-walks made of ``legs`` k-geodesics; consecutive legs turn through a triangle."""
    n = X.C.n
    deg = len(X.S)
    p2 = X.sig.sigma.shape[1]
    nc = X.closers.shape[1]
    L = k * legs
    letters = np.empty((size, L), dtype=np.int64)
    for i in range(L):
        if i == 0:
            letters[:, 0] = rng.integers(0, deg, size=size)
        elif i % k == 0:
            letters[:, i] = X.closers[letters[:, i - 1], rng.integers(0, nc, size=size)]
        else:
            letters[:, i] = X.sig.sigma[letters[:, i - 1], rng.integers(0, p2, size=size)]
    verts = np.empty((size, L + 1), dtype=np.int64)
    verts[:, 0] = rng.integers(0, n, size=size)
    for i in range(L):
        verts[:, i + 1] = X.C.nbr[letters[:, i], verts[:, i]]
    return verts, letters


def kwalk_structure_ok(X: CayleySetup, letters: np.ndarray, k: int) -> bool:
    """The k-geodesic windows of each walk are exactly its legs."""
    n = len(X.S)
    in_sigma = np.zeros((n, n), dtype=bool)
    for a in range(n):
        in_sigma[a, X.sig.sigma[a]] = True
    step_ok = in_sigma[letters[:, :-1], letters[:, 1:]]  # (size, L-1)
    L = letters.shape[1]
    for start in range(L - k + 1):
        win = step_ok[:, start : start + k - 1].all(axis=1) if k > 1 else np.ones(len(letters), dtype=bool)
        aligned = start % k == 0
        if aligned and not win.all():
            return False
        if not aligned and win.any():
            return False
    return True


def wilson_interval(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    ph = successes / n
    den = 1 + z * z / n
    c = (ph + z * z / (2 * n)) / den
    h = z * math.sqrt(ph * (1 - ph) / n + z * z / (4 * n * n)) / den
    return (max(0.0, c - h), min(1.0, c + h))


def sampler_experiment(draw, in_S: np.ndarray, eps: float, trials: int, target: float, rng, batch: int = 20000) -> dict:
    """Fraction of samples whose S-density deviates from |S|/|L| by at least eps.

    ``draw(size, rng)`` returns an integer array (size, t) of left-side
    elements per right-side sample.
    """
    mu = float(in_S.mean()) if len(in_S) else 0.0
    bad = 0
    done = 0
    while done < trials:
        b = min(batch, trials - done)
        R = draw(b, rng)
        frac = in_S[R].mean(axis=1)
        bad += int(np.sum(np.abs(frac - mu) >= eps))
        done += b
    lo, hi = wilson_interval(bad, trials)
    return {
        "trials": trials,
        "bad": bad,
        "bad_fraction": bad / trials,
        "ci95": [lo, hi],
        "density": mu,
        "target": target,
        "holds": hi <= target or target >= 1.0,
    }


def double_sampler_experiment(X: CayleySetup, k: int, K: int, eps: float, alpha: float, trials: int, seed: int) -> dict:
    """Monte-Carlo measurement of both sampler levels on a Cayley complex."""
    if K % k:
        raise ValueError("K must be a multiple of k")
    if X.C.tripartite():
        raise ValueError("complex is tripartite")
    ss = np.random.SeedSequence(seed)
    s_set, s_first, s_second, s_struct = (np.random.default_rng(s) for s in ss.spawn(4))
    n = X.C.n
    in_S = np.zeros(n, dtype=bool)
    in_S[s_set.choice(n, size=int(round(alpha * n)), replace=False)] = True
    q = X.p  # density of the complex
    t1 = alpha / (eps * eps * k)
    first = sampler_experiment(lambda b, r: sample_geodesics(X, k, b, r)[0], in_S, eps, trials, t1, s_first)
    legs = K // k
    expo = eps * eps * (1 / 3 - 2 / math.sqrt(q)) * K / (60 * k)
    t2 = math.exp(-expo)
    # T = geodesics whose start vertex lies in S; a walk's legs start at every k-th vertex
    mu_T = float(in_S.mean())
    bad = 0
    done = 0
    while done < trials:
        b = min(20000, trials - done)
        verts, _ = sample_kwalks(X, k, legs, b, s_second)
        frac = in_S[verts[:, 0:K:k]].mean(axis=1)
        bad += int(np.sum(np.abs(frac - mu_T) >= eps))
        done += b
    lo, hi = wilson_interval(bad, trials)
    second = {"trials": trials, "bad": bad, "bad_fraction": bad / trials, "ci95": [lo, hi], "density": mu_T, "target": t2, "holds": hi <= t2 or t2 >= 1.0}
    _, letters = sample_kwalks(X, k, legs, 2000, s_struct)
    return {
        "k": k,
        "K": K,
        "eps": eps,
        "alpha": alpha,
        "q": q,
        "first_level": first,
        "second_level": second,
        "first_target_trivial": t1 >= 1.0,
        "second_target_trivial": t2 >= 1.0,
        "legs_are_only_geodesics": kwalk_structure_ok(X, letters, k),
    }


def line_walk_sampler(G, k: int):
    """k-step walks on lines of P^2_fr through a random plane per step.

    The two-step operator is Q / deg^2 with second eigenvalue q/(q+1)^2.
    """
    N = G.n_lines
    la, pa = np.asarray(G.line_adj), np.asarray(G.plane_adj)
    d = la.shape[1]

    def draw(size, rng):
        out = np.empty((size, k + 1), dtype=np.int64)
        out[:, 0] = rng.integers(0, N, size=size)
        for i in range(k):
            pl = la[out[:, i], rng.integers(0, d, size=size)]
            out[:, i + 1] = pa[pl, rng.integers(0, d, size=size)]
        return out

    q = G.ring.q
    return draw, q / (q + 1) ** 2


# -- r-walk on the geodesic power ----------------------------------------------


class RWalk:
    """Random walk on power edges (k-geodesic words) of a Cayley complex.

    A state is (g, word): the power edge from g to g * word.  A step picks a
    uniformly random triangle through the edge, i.e. a valid continuation t
    (weighted by multiplicity), and moves to one of the two other edges:
    (g*word, t) or (g*word*t, u) with word * t * u scalar.
    """

    def __init__(self, X: CayleySetup, k: int):
        self.X = X
        self.k = k
        p = X.p
        self.mod = p**k
        self.rho = iota_root(p, k)
        S = X.S
        self.iS = self._iota(S)
        # candidate continuation words per last letter: t1 a closer, then Sigma steps
        self.cand = {}
        for a in range(len(S)):
            words = [(int(b),) for b in X.closers[a]]
            for _ in range(k - 1):
                words = [w + (int(c),) for w in words for c in X.sig.sigma[w[-1]]]
            W = np.array(words, dtype=np.int64)
            I = np.broadcast_to(np.eye(3, dtype=np.int64), (len(W), 3, 3)).copy()
            for i in range(k):
                I = np.einsum("nij,njk->nik", I, self.iS[W[:, i]]) % self.mod
            self.cand[a] = (W, I)

    def _iota(self, M):
        re = np.round(M.real).astype(np.int64)
        im = np.round(M.imag).astype(np.int64)
        return (re + self.rho * im) % self.mod

    def _leg_iota(self, word):
        I = np.eye(3, dtype=np.int64)
        for a in word:
            I = (I @ self.iS[a]) % self.mod
        return I

    def continuations(self, word) -> np.ndarray:
        W, I = self.cand[word[-1]]
        M = np.einsum("ij,njk->nik", self._leg_iota(word), I) % self.mod
        p, mod = self.X.p, self.mod
        ok = np.any(M % p != 0, axis=(1, 2))
        for r1, r2 in ((0, 1), (0, 2), (1, 2)):
            for c1, c2 in ((0, 1), (0, 2), (1, 2)):
                mi = (M[:, r1, c1] * M[:, r2, c2] - M[:, r1, c2] * M[:, r2, c1]) % mod
                ok &= mi == 0
        return W[ok]

    def closing_word(self, word, t) -> tuple:
        """u with word * t * u scalar, as a k-geodesic word."""
        S = self.X.S
        M = np.eye(3, dtype=complex)
        for a in tuple(word) + tuple(t):
            M = M @ S[a]
        M = _unit_normalize(M.conj().T)
        p = self.X.p
        SH = S.conj().transpose(0, 2, 1)
        u = []
        for _ in range(self.k):
            P = np.einsum("nij,jk->nik", SH, M)
            re = np.round(P.real).astype(np.int64)
            im = np.round(P.imag).astype(np.int64)
            hit = np.nonzero(np.all(re % p == 0, axis=(1, 2)) & np.all(im % p == 0, axis=(1, 2)))[0]
            if len(hit) != 1:
                raise RuntimeError("closing word is not a unique geodesic; data corruption")
            u.append(int(hit[0]))
            M = _unit_normalize(P[hit[0]] / p)
        if not np.allclose(np.abs(M), np.eye(3)):
            raise RuntimeError("closing word does not return to the start")
        return tuple(u)

    def end(self, g: int, word) -> int:
        for a in word:
            g = int(self.X.C.nbr[a, g])
        return g

    def step(self, state, rng):
        g, word = state
        W = self.continuations(word)
        if len(W) == 0:
            raise RuntimeError("dead end in r-walk; data corruption")
        t = tuple(int(x) for x in W[int(rng.integers(len(W)))])
        v1 = self.end(g, word)
        if rng.integers(2) == 0:
            return (v1, t)
        u = self.closing_word(word, t)
        return (self.end(v1, t), u)


def rwalk_mix_estimate(X: CayleySetup, k: int, steps: int, trials: int, seed: int, buckets: int = 16) -> dict:
    """Total variation between the start-vertex bucket histogram and uniform.

    Buckets hash the start vertex; under the stationary (uniform) law on
    power edges start vertices are uniform.  The null TV of ``trials``
    exact uniform samples is reported for comparison.
    """
    W = RWalk(X, k)
    ss = np.random.SeedSequence(seed)
    rw, rn = (np.random.default_rng(s) for s in ss.spawn(2))
    word = [0]
    for _ in range(k - 1):
        word.append(int(X.sig.sigma[word[-1]][0]))
    start = (0, tuple(word))
    hist = np.zeros(buckets)
    for _ in range(trials):
        st = start
        for _ in range(steps):
            st = W.step(st, rw)
        hist[(st[0] * 2654435761) % 2**32 % buckets] += 1
    emp = hist / trials
    uni = np.full(buckets, 1 / buckets)
    tv = 0.5 * float(np.abs(emp - uni).sum())
    null = []
    for _ in range(200):
        h = rn.multinomial(trials, uni) / trials
        null.append(0.5 * float(np.abs(h - uni).sum()))
    return {"steps": steps, "trials": trials, "tv": tv, "null_tv_95": float(np.quantile(null, 0.95)), "mixed": tv <= float(np.quantile(null, 0.95))}


def power_edge_transition(P, full_only: bool = True):
    """Transition matrix of the r-walk on the power edges of an enumerated PowerComplex.

    Returns (edge list, dense matrix).  Edges whose triangle count is below
    the maximum (boundary truncation) are dropped when ``full_only``.
    """
    tri_by_edge = {}
    for t in P.triangles:
        a, b, c = t
        for e in ((a, b), (b, c), (c, a)):
            tri_by_edge.setdefault(e, []).append(t)
    mx = max(len(v) for v in tri_by_edge.values())
    edges = sorted(e for e, v in tri_by_edge.items() if len(v) == mx or not full_only)
    idx = {e: i for i, e in enumerate(edges)}
    T = np.zeros((len(edges), len(edges)))
    for e in edges:
        ts = tri_by_edge[e]
        for a, b, c in ts:
            others = [x for x in ((a, b), (b, c), (c, a)) if x != e]
            for o in others:
                if o in idx:
                    T[idx[e], idx[o]] += 1 / (2 * len(ts))
    return edges, T
