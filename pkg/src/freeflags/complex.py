"""Colored 2-dimensional complexes: links, color-1 geodesics, geodesic powers."""
from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "ColoredComplex",
    "PowerComplex",
    "enumerate_geodesics",
    "geodesic_power",
    "power_link",
    "hdx_audit",
    "link",
    "read_complex",
    "write_complex",
]


def _rot(t):
    i = t.index(min(t))
    return t[i:] + t[:i]


class ColoredComplex:
    """Pure 2-complex with directed edge colors in {1, 2} (mod 3).

    Triangles are stored cyclically as (a, b, c) with
    col(a->b) = col(b->c) = col(c->a) = 1, which is the only way a 3-colored
    triangle can be read.
    """

    def __init__(self, n: int, triangles, col: dict | None = None):
        self.n = int(n)
        out1 = [set() for _ in range(self.n)]
        tris = set()
        for t in triangles:
            t = tuple(int(x) for x in t)
            if len(set(t)) != 3:
                raise ValueError(f"degenerate triangle {t}")
            if col is not None:
                t = self._orient(t, col)
            a, b, c = t
            out1[a].add(b)
            out1[b].add(c)
            out1[c].add(a)
            tris.add(_rot(t))
        for (v, w), c in (col or {}).items():
            if c % 3 == 1 and w not in out1[v]:
                raise ValueError(f"edge {v}->{w} lies in no triangle")
        self.out1 = [sorted(s) for s in out1]
        in1 = [[] for _ in range(self.n)]
        for v, nb in enumerate(self.out1):
            for w in nb:
                in1[w].append(v)
        self.in1 = [sorted(s) for s in in1]
        self._out1_sets = [set(s) for s in self.out1]
        self.triangles = sorted(tris)
        self._tri = {frozenset(t) for t in tris}
        self.star = [[] for _ in range(self.n)]
        for t in self.triangles:
            for x in t:
                self.star[x].append(t)

    @staticmethod
    def _orient(t, col):
        a, b, c = t
        cab = col[(a, b)] % 3
        cbc = col[(b, c)] % 3
        cca = col[(c, a)] % 3
        if 0 in (cab, cbc, cca):
            raise ValueError(f"edge color 0 in triangle {t}")
        # a vertex coloring with col(v->w) = col(w) - col(v) must exist
        if (cab + cbc + cca) % 3 != 0:
            raise ValueError(f"triangle {t} admits no vertex coloring")
        if cab == 1:
            return (a, b, c)
        return (a, c, b)

    @classmethod
    def from_clique_data(cls, n: int, out1) -> "ColoredComplex":
        """Clique complex from color-1 out-neighbor lists (e.g. a building ball)."""
        sets = [set(o) for o in out1]
        tris = []
        for a in range(n):
            for b in out1[a]:
                for c in out1[b]:
                    if a in sets[c] and a < b and a < c:
                        tris.append((a, b, c))
        return cls(n, tris)

    def col(self, v: int, w: int) -> int:
        if w in self._out1_sets[v]:
            return 1
        if v in self._out1_sets[w]:
            return 2
        raise KeyError(f"{v}-{w} is not an edge")

    def is_edge(self, v: int, w: int) -> bool:
        return w in self._out1_sets[v] or v in self._out1_sets[w]

    def is_triangle(self, a: int, b: int, c: int) -> bool:
        return frozenset((a, b, c)) in self._tri

    def edges(self) -> list[tuple[int, int]]:
        """Directed color-1 edges."""
        return [(v, w) for v in range(self.n) for w in self.out1[v]]

    def vertex_coloring(self) -> np.ndarray | None:
        """A global vertex coloring compatible with edge colors, if one exists."""
        c = -np.ones(self.n, dtype=np.int64)
        for s in range(self.n):
            if c[s] >= 0:
                continue
            c[s] = 0
            stack = [s]
            while stack:
                v = stack.pop()
                for w, d in [(w, 1) for w in self.out1[v]] + [(w, 2) for w in self.in1[v]]:
                    want = (c[v] + d) % 3
                    if c[w] < 0:
                        c[w] = want
                        stack.append(w)
                    elif c[w] != want:
                        return None
        return c

    def to_json_lines(self) -> str:
        head = {"format": "colored-complex", "dim": 2, "n_vertices": self.n, "n_triangles": len(self.triangles)}
        lines = [json.dumps(head)]
        lines += [f"{a} {b} {c} 1 1 1" for a, b, c in self.triangles]
        return "\n".join(lines) + "\n"


def write_complex(X: ColoredComplex, path) -> None:
    with open(path, "w") as fh:
        fh.write(X.to_json_lines())


def read_complex(path) -> ColoredComplex:
    with open(path) as fh:
        head = json.loads(fh.readline())
        tris, col = [], {}
        for line in fh:
            if not line.strip():
                continue
            a, b, c, x, y, z = map(int, line.split())
            tris.append((a, b, c))
            for (u, v), k in (((a, b), x), ((b, c), y), ((c, a), z)):
                col[(u, v)] = k % 3
                col[(v, u)] = (-k) % 3
    return ColoredComplex(head["n_vertices"], tris, col)


# -- links ---------------------------------------------------------------------


def link(X: ColoredComplex, tau=()):
    """Link of a cell: X itself, a vertex link graph, or an edge's apex set.

    A vertex link is returned as ``(vertices, edges)`` with edges as pairs of
    vertex ids of X.
    """
    tau = tuple(int(v) for v in tau)
    if len(tau) == 0:
        return X
    if len(tau) == 1:
        (v,) = tau
        if not 0 <= v < X.n:
            raise ValueError(f"{v} is not a vertex")
        verts, edges = set(), set()
        for t in X.star[v]:
            u, w = [x for x in t if x != v]
            verts.update((u, w))
            edges.add((min(u, w), max(u, w)))
        return sorted(verts), sorted(edges)
    if len(tau) == 2:
        u, v = tau
        if not X.is_edge(u, v):
            raise ValueError(f"{tau} is not an edge")
        return sorted(w for w in set(X.out1[v]) | set(X.in1[v]) if X.is_triangle(u, v, w))
    if len(tau) == 3:
        if not X.is_triangle(*tau):
            raise ValueError(f"{tau} is not a triangle")
        return []
    raise ValueError("cells have at most three vertices")


# -- geodesics -----------------------------------------------------------------


def enumerate_geodesics(X: ColoredComplex, v: int, r: int, color: int = 1) -> list[tuple[int, ...]]:
    """All r-geodesics of the given color (1 or 2) starting at v.

    Color 2 geodesics are inverted color 1 geodesics.
    """
    if r < 1:
        raise ValueError("r >= 1")
    nbr = X.out1 if color == 1 else X.in1
    out = []
    path = [v]

    def rec():
        if len(path) == r + 1:
            out.append(tuple(path))
            return
        u = path[-1]
        prev = path[-2] if len(path) >= 2 else None
        for w in nbr[u]:
            if prev is not None and (w == prev or X.is_triangle(prev, u, w)):
                continue
            path.append(w)
            rec()
            path.pop()

    rec()
    return out


@dataclass
class PowerComplex:
    n: int
    r: int
    edges: dict  # (a, b) -> multiplicity, directed along the defining geodesic
    triangles: list  # canonical rotation (least vertex first)
    out: list = field(repr=False, default_factory=list)

    @property
    def edge_color(self) -> int:
        return self.r % 3

    def undirected_edges(self) -> set:
        return {(min(a, b), max(a, b)) for a, b in self.edges}

    def as_colored(self) -> ColoredComplex:
        if self.r % 3 == 0:
            raise ValueError("power complex is not colored when 3 | r")
        if self.r % 3 == 1:
            return ColoredComplex(self.n, self.triangles)
        return ColoredComplex(self.n, [(a, c, b) for a, b, c in self.triangles])


def geodesic_power(X: ColoredComplex, r: int) -> PowerComplex:
    edges = defaultdict(int)
    out = [set() for _ in range(X.n)]
    for v in range(X.n):
        for g in enumerate_geodesics(X, v, r):
            edges[(v, g[-1])] += 1
            out[v].add(g[-1])
    tris = set()
    for a in range(X.n):
        for b in out[a]:
            for c in out[b]:
                if a in out[c] and len({a, b, c}) == 3:
                    tris.add(_rot((a, b, c)))
    return PowerComplex(X.n, r, dict(edges), sorted(tris), [sorted(s) for s in out])


def power_link(X: ColoredComplex, v: int, r: int):
    """Link of v in the r-th geodesic power, computed locally.

    Returns ``(A, B, edges)``: A = endpoints of r-geodesics from v, B = starts
    of r-geodesics into v, edges = pairs (a, b) with an r-geodesic a -> b.
    """
    A = sorted({g[-1] for g in enumerate_geodesics(X, v, r)})
    B = set(g[-1] for g in enumerate_geodesics(X, v, r, color=2))
    edges = set()
    for a in A:
        for g in enumerate_geodesics(X, a, r):
            if g[-1] in B:
                edges.add((a, g[-1]))
    return A, sorted(B), sorted(edges)


# -- HDX audit -----------------------------------------------------------------


def _second_normalized(verts, edges) -> tuple[float, bool]:
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    A = np.zeros((n, n))
    for u, w in edges:
        A[idx[u], idx[w]] = A[idx[w], idx[u]] = 1
    deg = A.sum(axis=1)
    if np.any(deg == 0):
        return 1.0, False
    s = 1 / np.sqrt(deg)
    w = np.linalg.eigvalsh(A * s[:, None] * s[None, :])[::-1]
    connected = w[1] < 1 - 1e-9
    return float(w[1]), connected


def hdx_audit(X: ColoredComplex, lam: float, d: int = 2, vertices=None) -> dict:
    """Second normalized eigenvalue of every vertex link versus ``lam``."""
    per = {}
    flagged = []
    for v in range(X.n) if vertices is None else vertices:
        verts, edges = link(X, (v,))
        if len(verts) <= 2:
            flagged.append((v, "degenerate"))
            per[v] = None
            continue
        mu, conn = _second_normalized(verts, edges)
        if not conn:
            flagged.append((v, "disconnected"))
            mu = 1.0
        per[v] = mu
    vals = [m for m in per.values() if m is not None]
    mx = max(vals) if vals else None
    report = {
        "max_mu": mx,
        "lambda": lam,
        "passes": mx is not None and mx <= lam + 1e-12 and not flagged and lam < 1 / d,
        "flagged": flagged,
        "per_vertex": per,
    }
    if mx is not None and mx < 1 / d:
        report["global_bound"] = mx / (1 - mx * d)
    return report
