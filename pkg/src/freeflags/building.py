"""Balls and spheres in the affine building of PGL_3 over a local field.

A vertex is the homothety class of a lattice.  We store the primitive
representative (contained in O^3 but not in pi O^3) through its upper
triangular Hermite form over O_N with N = R + 2, keyed by
``(a0, a1, a2, h01, h02, h12)`` where ``diag = (pi^a0, pi^a1, pi^a2)`` and
off-diagonal entries are reduced modulo the pivot of their row.
"""
from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .flags import canonicalize_arr, free_summands
from .ring import LocalRing, ring_make

__all__ = [
    "LatticeClassBall",
    "build_ball",
    "hnf",
    "key_matrix",
    "stratum_of",
    "stratify",
    "stratum_size",
    "sphere_size",
    "sphere_vertices",
    "sphere_adjacency",
    "sphere_degree_check",
    "half_sphere_cut",
    "sphere_rayleigh_witness",
    "sphere_spectrum",
    "lambda_r_formula",
    "power_link_witness",
    "geodesic_uniqueness",
    "geodesic_equivalence",
    "distance_matches_strata",
    "sweep_cut",
    "export_sphere",
]


# -- Hermite form ---------------------------------------------------------------


_OPS: dict = {}


def _ops(ring: LocalRing):
    """(add, sub, mul, val, inv) closures; plain integer arithmetic for Z/p^N."""
    if ring in _OPS:
        return _OPS[ring]
    if ring.kind == "padic":
        S, b, N = ring.size, ring.base, ring.r

        def val(x):
            x %= S
            if x == 0:
                return N
            v = 0
            while x % b == 0:
                x //= b
                v += 1
            return v

        ops = (
            lambda x, y: (x + y) % S,
            lambda x, y: (x - y) % S,
            lambda x, y: (x * y) % S,
            val,
            lambda x: pow(x, -1, S),
        )
    else:
        ops = (ring.add, ring.sub, ring.mul, ring.val, ring.inv)
    _OPS[ring] = ops
    return ops


def hnf(ring: LocalRing, cols) -> tuple:
    """Hermite key of the lattice spanned by ``cols`` plus pi^N O^3 (N = ring.r)."""
    add, sub, mul, val, inv = _ops(ring)
    N, b = ring.r, ring.base
    rem = [list(c) for c in cols]
    H = [[0, 0, 0] for _ in range(3)]  # H[col][row]
    a = [N, N, N]
    for i in (2, 1, 0):
        best, bv = None, N
        for k, c in enumerate(rem):
            x = c[i]
            if x:
                v = val(x)
                if v < bv:
                    best, bv = k, v
        if best is None:
            a[i] = N
            continue
        piv = rem.pop(best)
        unit = piv[i] // b**bv
        uinv = inv(unit)
        piv = [mul(uinv, x) for x in piv]
        for c in rem:
            if c[i]:
                t = c[i] // b**bv
                for j in range(i + 1):
                    c[j] = sub(c[j], mul(t, piv[j]))
        if bv > 0:
            # pi^(N - v) * piv has zero in row i modulo pi^N; keep it for the rows above
            s = b ** (N - bv)
            extra = [mul(s, piv[j]) if j < i else 0 for j in range(3)]
            if any(extra):
                rem.append(extra)
        a[i] = bv
        H[i] = piv
    # reduce entries above the diagonal
    for i in range(3):
        for k in range(i - 1, -1, -1):
            if a[k] >= N:
                continue
            x = H[i][k]
            m = b ** a[k]
            t = x // m
            if t:
                for j in range(k + 1):
                    H[i][j] = sub(H[i][j], mul(t, H[k][j]))
    return (a[0], a[1], a[2], H[1][0] if a[1] < N else 0, H[2][0] if a[2] < N else 0, H[2][1] if a[2] < N else 0)


def key_matrix(ring: LocalRing, key) -> list[list[int]]:
    """Row-major 3x3 upper triangular basis matrix for a Hermite key."""
    a0, a1, a2, x, y, z = key
    b, N = ring.base, ring.r
    p = lambda e: 0 if e >= N else b**e
    return [[p(a0), x, y], [0, p(a1), z], [0, 0, p(a2)]]


def _primitive(ring: LocalRing, key) -> tuple:
    a0, a1, a2, x, y, z = key
    b = ring.base
    while a0 >= 1 and a1 >= 1 and a2 >= 1 and x % b == 0 and y % b == 0 and z % b == 0:
        a0, a1, a2 = a0 - 1, a1 - 1, a2 - 1
        x, y, z = x // b, y // b, z // b
        # re-reduce: entries must stay reduced modulo the (smaller) pivots
        M = key_matrix(ring, (a0, a1, a2, x, y, z))
        cols = [[M[r][c] for r in range(3)] for c in range(3)]
        a0, a1, a2, x, y, z = hnf(ring, cols)
    return (a0, a1, a2, x, y, z)


# -- ball ----------------------------------------------------------------------


@dataclass
class LatticeClassBall:
    ring: LocalRing  # precision N = R + 2
    R: int
    keys: list
    index: dict
    dist: np.ndarray
    color: np.ndarray
    out1: list  # color-1 neighbors (index-q sublattices), within the ball
    out2: list  # color-2 neighbors
    truncated: np.ndarray  # True if some neighbor lies outside the ball
    _strata: dict = field(default_factory=dict, repr=False)

    @property
    def q(self) -> int:
        return self.ring.q

    @property
    def n(self) -> int:
        return len(self.keys)

    def neighbors(self, v: int) -> list[int]:
        return list(self.out1[v]) + list(self.out2[v])

    def adjacency_sets(self) -> list[set]:
        return [set(self.out1[v]) | set(self.out2[v]) for v in range(self.n)]

    def matrix(self, v: int) -> list[list[int]]:
        return key_matrix(self.ring, self.keys[v])

    def to_colored_complex(self):
        from .complex import ColoredComplex

        return ColoredComplex.from_clique_data(self.n, self.out1)


def _subspace_bases(ring: LocalRing):
    """Bases of lift(W) + pi O^3 for the proper nonzero subspaces W of F_q^3."""
    res = ring.with_precision(1)
    if ring.kind == "laurent":
        res = ring_make("laurent", ring.p, ring.e, 1, ring.modulus)
    out = {1: [], 2: []}
    pi = ring.base
    for k in (1, 2):
        for M in free_summands(res, 3, k):
            cols = [[int(M[i, j]) for i in range(3)] for j in range(k)]
            cols += [[pi if i == j else 0 for i in range(3)] for j in range(3)]
            key = hnf(ring, cols)
            out[k].append(key_matrix(ring, key))
    return out


def _neighbors_of(ring: LocalRing, key, bases):
    """Color-1 (index q) and color-2 (index q^2) neighbor keys of a class."""
    add, sub, mul = _ops(ring)[:3]
    H = key_matrix(ring, key)
    res = {1: [], 2: []}
    for k, color in ((2, 1), (1, 2)):
        for B in bases[k]:
            P = [[0] * 3 for _ in range(3)]
            for i in range(3):
                for j in range(3):
                    s = 0
                    for t in range(3):
                        if H[i][t] and B[t][j]:
                            s = add(s, mul(H[i][t], B[t][j]))
                    P[i][j] = s
            cols = [[P[i][j] for i in range(3)] for j in range(3)]
            res[color].append(_primitive(ring, hnf(ring, cols)))
    return res[1], res[2]


def build_ball(ring_base, R: int, kind: str = "padic", max_vertices: int = 2_000_000) -> LatticeClassBall:
    """BFS ball of radius R around the class of O^3.

    ``ring_base`` is p (padic) or q = p^e (laurent).
    """
    from .ring import _prime_power

    p, e = _prime_power(int(ring_base))
    if kind == "padic" and e != 1:
        raise ValueError("padic building needs p prime")
    q = p**e
    est = sum(sphere_size(q, r) for r in range(R + 1))
    if est > max_vertices:
        raise OverflowError(f"ball of radius {R} has {est} vertices (limit {max_vertices})")
    ring = ring_make(kind, p, e, R + 2)
    bases = _subspace_bases(ring)
    base = (0, 0, 0, 0, 0, 0)
    keys = [base]
    index = {base: 0}
    dist = [0]
    nbr_keys = []
    queue = deque([0])
    while queue:
        v = queue.popleft()
        n1, n2 = _neighbors_of(ring, keys[v], bases)
        nbr_keys.append((n1, n2))
        if dist[v] == R:
            continue
        for kk in n1 + n2:
            if kk not in index:
                index[kk] = len(keys)
                keys.append(kk)
                dist.append(dist[v] + 1)
                queue.append(index[kk])
    # nbr_keys was filled in BFS order, which equals index order
    out1, out2, trunc = [], [], []
    for v in range(len(keys)):
        n1, n2 = nbr_keys[v]
        o1 = [index[k] for k in n1 if k in index]
        o2 = [index[k] for k in n2 if k in index]
        out1.append(o1)
        out2.append(o2)
        trunc.append(len(o1) < len(n1) or len(o2) < len(n2))
    color = np.array([(k[0] + k[1] + k[2]) % 3 for k in keys], dtype=np.int64)
    return LatticeClassBall(ring, R, keys, index, np.array(dist), color, out1, out2, np.array(trunc))


# -- stratification ------------------------------------------------------------


def _smith_vals(ring: LocalRing, M) -> list[int]:
    from .ring import smith_form

    ex = list(smith_form(ring, M).exponents)
    return sorted(ex + [ring.r] * (3 - len(ex)))


def stratum_of(ring: LocalRing, key) -> tuple[int, int, int]:
    """Iwahori stratum (a, b, c) of a primitive lattice class.

    Uses the elementary divisors of L relative to O^3, O+O+piO and
    O+piO+piO, which are {a,b,c}, {a,b,c-1} and {a,b-1,c-1}.
    """
    H = key_matrix(ring, key)
    pi = ring.base
    e0 = _smith_vals(ring, H)
    D1 = [[ring.mul(pi if i < 2 else 1, H[i][j]) for j in range(3)] for i in range(3)]
    D2 = [[ring.mul(pi if i < 1 else 1, H[i][j]) for j in range(3)] for i in range(3)]
    e1 = sorted(x - 1 for x in _smith_vals(ring, D1))
    e2 = sorted(x - 1 for x in _smith_vals(ring, D2))
    sols = set()
    for a, b, c in set(itertools.permutations(e0)):
        if sorted([a, b, c - 1]) == e1 and sorted([a, b - 1, c - 1]) == e2:
            sols.add((a, b, c))
    if len(sols) != 1:
        raise AssertionError(f"ambiguous stratum for {key}: {sols}")
    return sols.pop()


def stratify(ball: LatticeClassBall, vertices=None) -> dict:
    """Map vertex -> (a, b, c) with min(a, b, c) = 0."""
    vs = range(ball.n) if vertices is None else vertices
    out = {}
    for v in vs:
        v = int(v)
        if v not in ball._strata:
            ball._strata[v] = stratum_of(ball.ring, ball.keys[v])
        out[v] = ball._strata[v]
    return out


def stratum_size(q: int, a: int, b: int, c: int) -> int:
    m = max(a, b, c)
    if a >= b >= c:
        e = 2 * m
    elif a >= c > b or b > a >= c:
        e = 2 * m - 1
    elif b >= c > a or c > a >= b:
        e = 2 * m - 2
    else:  # c > b > a
        e = 2 * m - 3
    return q**e


def sphere_size(q: int, r: int) -> int:
    if r == 0:
        return 1
    if r == 1:
        return 2 * (q * q + q + 1)
    return q ** (2 * r - 3) * (q * r + q + r - 1) * (q * q + q + 1)


# -- spheres -------------------------------------------------------------------


def sphere_vertices(ball: LatticeClassBall, r: int) -> np.ndarray:
    if r > ball.R:
        raise ValueError("sphere radius exceeds ball radius")
    return np.nonzero(ball.dist == r)[0]


def sphere_adjacency(ball: LatticeClassBall, r: int):
    """Induced graph on S_r as (vertex ids, adjacency lists in local indices)."""
    S = sphere_vertices(ball, r)
    loc = {int(v): i for i, v in enumerate(S)}
    adj = []
    for v in S:
        nb = [loc[w] for w in ball.neighbors(int(v)) if w in loc]
        adj.append(sorted(nb))
    return S, adj


def sphere_degree_check(ball: LatticeClassBall, r: int) -> dict:
    S, adj = sphere_adjacency(ball, r)
    st = stratify(ball, S)
    bad = []
    for i, v in enumerate(S):
        a, b, c = st[int(v)]
        want = ball.q + 1 if len({a, b, c}) == 2 else 2 * ball.q
        if len(adj[i]) != want:
            bad.append((int(v), (a, b, c), len(adj[i]), want))
    return {"n": len(S), "mismatches": bad}


def _in_half(a, b, c, r):
    h = (r + 1) // 2
    return (a >= b >= h) or (b > a >= c) or (b >= c > a) or (c > b >= h)


def half_sphere_cut(ball: LatticeClassBall, r: int) -> dict:
    """Exact conductance of the half-sphere cut for odd r >= 3."""
    if r % 2 == 0 or r < 3:
        raise ValueError("half-sphere certificate is defined for odd r >= 3")
    S, adj = sphere_adjacency(ball, r)
    st = stratify(ball, S)
    inA = np.array([_in_half(*st[int(v)], r) for v in S])
    cut_from_A = sum(1 for i in range(len(S)) if inA[i] for j in adj[i] if not inA[j])
    cut_from_B = sum(1 for i in range(len(S)) if not inA[i] for j in adj[i] if inA[j])
    volA = sum(len(adj[i]) for i in range(len(S)) if inA[i])
    volB = sum(len(adj[i]) for i in range(len(S)) if not inA[i])
    q = ball.q
    ratio = Fraction(cut_from_A, min(volA, volB))
    bound = Fraction(q * q - q + 1, (q * q + q + 1) * r)
    return {
        "cut_edges": cut_from_A,
        "cut_edges_other_side": cut_from_B,
        "volume": volA,
        "volume_complement": volB,
        "ratio": ratio,
        "bound": bound,
        "holds": ratio <= bound,
    }


def _normalized(adj):
    from scipy.sparse import csr_matrix

    n = len(adj)
    rows = np.concatenate([np.full(len(a), i) for i, a in enumerate(adj)])
    cols = np.concatenate([np.asarray(a, dtype=np.int64) for a in adj])
    A = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    deg = np.asarray(A.sum(axis=1)).ravel()
    s = 1 / np.sqrt(deg)
    return csr_matrix(A.multiply(s[:, None]).multiply(s[None, :])), deg


def sphere_rayleigh_witness(ball: LatticeClassBall, r: int) -> dict:
    """Rayleigh quotient of the sine test function on S_r."""
    S, adj = sphere_adjacency(ball, r)
    st = stratify(ball, S)
    f = np.zeros(len(S))
    for i, v in enumerate(S):
        a, b, c = st[int(v)]
        if a == r and c == 0:
            f[i] = math.sin(2 * math.pi * b / r)
    M, deg = _normalized(adj)
    ff = float(f @ f)
    pf = np.sqrt(deg)
    pf /= np.linalg.norm(pf)
    if np.max(np.abs(f), initial=0.0) < 1e-12:  # sin(2 pi b / r) vanishes for r <= 2
        return {"rayleigh": None, "target": math.cos(2 * math.pi / r), "degenerate": True, "pf_overlap": 0.0}
    rq = float(f @ (M @ f)) / ff
    return {
        "rayleigh": rq,
        "target": math.cos(2 * math.pi / r),
        "degenerate": False,
        "pf_overlap": float(abs(f @ pf) / math.sqrt(ff)),
        "norm_sq": ff,
    }


def sphere_spectrum(ball: LatticeClassBall, r: int, dense_limit: int = 3000, tol: float = 1e-10) -> dict:
    """Second largest eigenvalue of D^-1/2 A D^-1/2 on S_r."""
    from .linalg import lanczos

    S, adj = sphere_adjacency(ball, r)
    M, deg = _normalized(adj)
    n = len(S)
    if n <= dense_limit:
        w = np.linalg.eigvalsh(M.toarray())[::-1]
        return {"n": n, "lambda1": float(w[0]), "lambda2": float(w[1]), "method": "dense", "residual": None}
    pf = np.sqrt(deg)
    pf /= np.linalg.norm(pf)
    out = lanczos(lambda x: M @ x, n, k=1, tol=tol, deflate=pf[:, None], seed=1, basis=60)
    return {"n": n, "lambda1": 1.0, "lambda2": float(out.values[0]), "method": "lanczos", "residual": float(out.residuals[0]), "converged": out.converged}


def lambda_r_formula(q: int, r: int) -> float | None:
    """Tabulated exact values of the normalized second eigenvalue for r <= 3."""
    if r == 1:
        return math.sqrt(q) / (q + 1)
    if r == 2:
        return math.sqrt(0.5 + math.sqrt(q) / (2 * (q + 1)))
    if r == 3:
        w = 2j * math.sqrt(q**3 + q**2 + q) - q * q - 1
        num = ((q + 1) * w) ** (1 / 3) + q + 1
        den = 2 * (q + 1) ** (2 / 3) * w ** (1 / 6)
        return (num / den).real
    return None


def power_link_witness(ball: LatticeClassBall, r: int) -> dict:
    """Explicit map from the power link of the base vertex onto P^2_fr(O_r).

    An endpoint L of a color-1 r-geodesic from O^3 is sent to the plane
    L / pi^r O^3, a start M of an r-geodesic into O^3 to the line
    M / pi^r O^3.  The map is checked to be a bijection carrying link edges
    exactly onto incidences.
    """
    from .complex import power_link
    from .flags import build_pfr2

    if 2 * r > ball.R:
        raise ValueError("need a ball of radius >= 2r")
    X = ball.to_colored_complex()
    A, B, E = power_link(X, 0, r)
    Or = ball.ring.with_precision(r)
    if ball.ring.kind == "laurent":
        Or = ring_make("laurent", ball.ring.p, ball.ring.e, r, ball.ring.modulus)
    G = build_pfr2(Or)
    N = G.n_lines
    line_id = {tuple(int(x) for x in row): i for i, row in enumerate(G.lines)}

    def cols_mod(v):
        M = key_matrix(ball.ring, ball.keys[v])
        return np.array([[M[i][j] % Or.size for i in range(3)] for j in range(3)], dtype=np.int64)

    phi = {}
    for v in A:
        D = Or.dot_arr(G.planes, cols_mod(v))
        hit = np.nonzero(np.all(D == 0, axis=1))[0]
        if len(hit) != 1:
            return {"ok": False, "reason": f"vertex {v} is not a free plane"}
        phi[v] = N + int(hit[0])
    for v in B:
        C = cols_mod(v)
        cand = {tuple(int(x) for x in canonicalize_arr(Or, c[None, :])[0]) for c in C if np.any(c % Or.base)}
        if len(cand) != 1:
            return {"ok": False, "reason": f"vertex {v} is not a free line"}
        phi[v] = line_id[cand.pop()]
    if len(set(phi.values())) != len(phi) or len(phi) != G.n_vertices:
        return {"ok": False, "reason": "map is not a bijection"}
    mapped = {(min(phi[a], phi[b]), max(phi[a], phi[b])) for a, b in E}
    target = {(int(u), int(w)) for u, w in G.edges()}
    return {"ok": mapped == target, "n_vertices": len(phi), "n_edges": len(E), "mapping": phi}


def geodesic_uniqueness(ball: LatticeClassBall, r: int) -> dict:
    """Count ordered pairs joined by more than one color-1 r-geodesic."""
    from .complex import enumerate_geodesics

    X = ball.to_colored_complex()
    starts = [v for v in range(ball.n) if ball.dist[v] + r <= ball.R - 1]
    dup = 0
    pairs = 0
    for v in starts:
        ends = [g[-1] for g in enumerate_geodesics(X, v, r)]
        pairs += len(set(ends))
        dup += len(ends) - len(set(ends))
    return {"starts": len(starts), "pairs": pairs, "duplicates": dup}


def geodesic_equivalence(ball: LatticeClassBall, r: int) -> dict:
    """Compare cyclic quotient, uniqueness and the geodesic condition.

    Runs over every color-1 index-q path O^3 = L_0 > ... > L_r.  The quotient
    O^3 / L_r is cyclic iff L_r is primitive of index q^r with elementary
    divisors (0, 0, r).
    """
    from .complex import ColoredComplex

    X = ball.to_colored_complex()
    paths = [[0]]
    for _ in range(r):
        paths = [p + [w] for p in paths for w in X.out1[p[-1]]]
    count = {}
    for p in paths:
        count[p[-1]] = count.get(p[-1], 0) + 1
    rows = []
    for p in paths:
        geo = all(not X.is_triangle(p[i], p[i + 1], p[i + 2]) for i in range(r - 1))
        geo = geo and all(p[i] != p[i + 2] for i in range(r - 1))
        end = ball.keys[p[-1]]
        # a color-1 r-path from O^3 ends at pi^k L for the primitive L with sum(a) + 3k = r
        cyclic = sum(end[:3]) == r and _smith_vals(ball.ring, key_matrix(ball.ring, end)) == [0, 0, r]
        unique = count[p[-1]] == 1
        rows.append((cyclic, unique, geo))
    agree = sum(1 for c, u, g in rows if c == u == g)
    return {"paths": len(rows), "agree": agree, "geodesic": sum(g for _, _, g in rows)}


def distance_matches_strata(ball: LatticeClassBall) -> int:
    """Number of vertices whose BFS distance differs from max(a, b, c)."""
    st = stratify(ball)
    return sum(1 for v, s in st.items() if max(s) != ball.dist[v])


def sweep_cut(ball: LatticeClassBall, r: int) -> dict:
    """Best conductance among sweep cuts of the Fiedler vector of S_r."""
    S, adj = sphere_adjacency(ball, r)
    M, deg = _normalized(adj)
    w, V = np.linalg.eigh(M.toarray())
    f = V[:, -2] / np.sqrt(deg)
    order = np.argsort(f)
    inside = np.zeros(len(S), dtype=bool)
    total = deg.sum()
    vol = 0.0
    cut = 0
    best = (math.inf, 0)
    for k, i in enumerate(order[:-1]):
        inside[i] = True
        vol += deg[i]
        for j in adj[i]:
            cut += -1 if inside[j] else 1
        phi = cut / min(vol, total - vol)
        if phi < best[0]:
            best = (phi, k + 1)
    return {"conductance": float(best[0]), "size": best[1], "n": len(S)}


def export_sphere(ball: LatticeClassBall, r: int, out_dir) -> dict:
    """Write ``edges.txt`` and ``strata.csv`` (vertex,a,b,c,degree) for S_r."""
    import csv
    import os

    os.makedirs(out_dir, exist_ok=True)
    S, adj = sphere_adjacency(ball, r)
    st = stratify(ball, S)
    with open(os.path.join(out_dir, "edges.txt"), "w") as fh:
        for i, nb in enumerate(adj):
            for j in nb:
                if i < j:
                    fh.write(f"{i} {j}\n")
    with open(os.path.join(out_dir, "strata.csv"), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["vertex", "a", "b", "c", "degree"])
        for i, v in enumerate(S):
            w.writerow([i, *st[int(v)], len(adj[i])])
    return {"n": len(S), "edges": sum(map(len, adj)) // 2}
