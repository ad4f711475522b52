"""Graph isomorphism by color refinement plus individualization/backtracking.

The search is exhaustive: "non-isomorphic" is only reported when every
branch was refuted.  Running out of time yields "inconclusive".
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np


@dataclass
class IsoResult:
    status: str  # "isomorphic" | "non-isomorphic" | "inconclusive"
    mapping: dict | None
    nodes: int
    seconds: float


class _Timeout(Exception):
    pass


def _refine(adj1, adj2, c1, c2):
    """Jointly refine two colorings to their coarsest equitable refinements.

    Colors are renumbered from sorted signatures so that equal ids mean equal
    refinement history on both sides.  Returns ``None`` when the color
    histograms diverge.
    """
    while True:
        s1 = [(c1[v], tuple(sorted(c1[w] for w in adj1[v]))) for v in range(len(adj1))]
        s2 = [(c2[v], tuple(sorted(c2[w] for w in adj2[v]))) for v in range(len(adj2))]
        keys = sorted(set(s1) | set(s2))
        ids = {k: i for i, k in enumerate(keys)}
        n1 = [ids[s] for s in s1]
        n2 = [ids[s] for s in s2]
        if sorted(n1) != sorted(n2):
            return None
        if len(keys) == len(set(c1)):
            return n1, n2
        c1, c2 = n1, n2


def _is_iso(adj1, adj2, mapping):
    for v, nb in enumerate(adj1):
        img = {mapping[w] for w in nb}
        if img != set(adj2[mapping[v]]):
            return False
    return True


def find_isomorphism(adj1, adj2, budget_s: float = 600.0, pin=None, use_orbits: bool = True) -> IsoResult:
    """Search for an isomorphism between graphs given as adjacency lists.

    ``pin=(v, u)`` restricts the search to maps sending v to u.  With
    ``use_orbits`` the top level only tries one image per orbit of Aut(G2);
    the orbits come from explicitly verified automorphisms.
    """
    t0 = time.time()
    n = len(adj1)
    if n != len(adj2) or sorted(map(len, adj1)) != sorted(map(len, adj2)):
        return IsoResult("non-isomorphic", None, 0, time.time() - t0)
    if pin is None and use_orbits:
        try:
            reps = automorphism_orbit_reps(adj2, deadline=t0 + budget_s)
        except _Timeout:
            return IsoResult("inconclusive", None, 0, time.time() - t0)
        total = 0
        v = 0
        for u in reps:
            left = budget_s - (time.time() - t0)
            res = find_isomorphism(adj1, adj2, left, pin=(v, u), use_orbits=False)
            total += res.nodes
            if res.status != "non-isomorphic":
                return IsoResult(res.status, res.mapping, total, time.time() - t0)
        return IsoResult("non-isomorphic", None, total, time.time() - t0)
    nodes = 0

    def rec(c1, c2):
        nonlocal nodes
        nodes += 1
        if time.time() - t0 > budget_s:
            raise _Timeout
        ref = _refine(adj1, adj2, c1, c2)
        if ref is None:
            return None
        c1, c2 = ref
        if len(set(c1)) == n:
            inv2 = {c: v for v, c in enumerate(c2)}
            mapping = {v: inv2[c1[v]] for v in range(n)}
            return mapping if _is_iso(adj1, adj2, mapping) else None
        counts = {}
        for c in c1:
            counts[c] = counts.get(c, 0) + 1
        cell = min((cnt, c) for c, cnt in counts.items() if cnt > 1)[1]
        v = c1.index(cell)
        new = max(c1) + 1
        for u in (u for u in range(n) if c2[u] == cell):
            d1, d2 = list(c1), list(c2)
            d1[v] = new
            d2[u] = new
            found = rec(d1, d2)
            if found is not None:
                return found
        return None

    c1, c2 = [0] * n, [0] * n
    if pin is not None:
        c1[pin[0]] = 1
        c2[pin[1]] = 1
    try:
        mapping = rec(c1, c2)
    except _Timeout:
        return IsoResult("inconclusive", None, nodes, time.time() - t0)
    status = "isomorphic" if mapping is not None else "non-isomorphic"
    return IsoResult(status, mapping, nodes, time.time() - t0)


def automorphism_orbit_reps(adj, deadline: float | None = None) -> list[int]:
    """One representative per orbit of Aut(G) acting on vertices."""
    n = len(adj)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    reps = []
    for u in range(n):
        if any(find(u) == find(r) for r in reps):
            continue
        hit = False
        for r in reps:
            left = 600.0 if deadline is None else deadline - time.time()
            if left <= 0:
                raise _Timeout
            res = find_isomorphism(adj, adj, left, pin=(r, u), use_orbits=False)
            if res.status == "inconclusive":
                raise _Timeout
            if res.status == "isomorphic":
                for v, w in res.mapping.items():
                    a, b = find(v), find(w)
                    if a != b:
                        parent[a] = b
                hit = True
                break
        if not hit:
            reps.append(u)
    return reps


def adjacency_from_edges(n: int, edges) -> list[list[int]]:
    adj = [[] for _ in range(n)]
    for u, v in np.asarray(edges, dtype=np.int64):
        adj[int(u)].append(int(v))
        adj[int(v)].append(int(u))
    return adj
