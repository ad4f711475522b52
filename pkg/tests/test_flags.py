import itertools

import numpy as np
import pytest

from freeflags.flags import (
    build_pfr2,
    build_pfr_d,
    delta,
    delta_brute,
    delta_matrix,
    enumerate_lines,
    enumerate_submodules,
    export_edge_list,
    free_summands,
    line_count,
    quotient_type,
    submodule_exponents,
)
from freeflags.ring import parse_ring_spec, ring_make
from freeflags.spectral import spectrum_exact


@pytest.mark.parametrize("q_spec,q", [("zmod:2", 2), ("zmod:3", 3), ("ff:4", 4), ("zmod:5", 5)])
@pytest.mark.parametrize("r", [1, 2, 3])
def test_line_counts(q_spec, q, r):
    if q ** (2 * r) > 10**6 or (q == 5 and r == 3):
        pytest.skip("above desk scale")
    R = parse_ring_spec(f"{q_spec}^{r}")
    assert len(enumerate_lines(R)) == line_count(q, r) == (q * q + q + 1) * q ** (2 * (r - 1))


def test_line_examples():
    assert len(enumerate_lines(ring_make("padic", 2, 1, 1))) == 7
    assert len(enumerate_lines(ring_make("padic", 2, 1, 2))) == 28
    assert len(enumerate_lines(ring_make("padic", 3, 1, 2))) == 117


def test_canonical_lines_are_distinct_modules():
    R = ring_make("padic", 2, 1, 2)
    lines = enumerate_lines(R)
    spans = set()
    for L in lines:
        assert L.coords[L.pivot] == 1
        assert all(R.val(x) > 0 for x in L.coords[: L.pivot])
        spans.add(frozenset(tuple(R.mul(a, x) for x in L.coords) for a in range(R.size)))
    assert len(spans) == len(lines)


@pytest.mark.parametrize("spec,nv,deg", [("zmod:2^2", 56, 6), ("zmod:2^1", 14, 3), ("zmod:3^1", 26, 4), ("ff:4^2", 672, 20)])
def test_pfr2_shape(spec, nv, deg):
    G = build_pfr2(parse_ring_spec(spec))
    assert G.n_vertices == nv and G.degree == deg
    adj = G.adjacency_lists()
    assert all(len(a) == deg for a in adj)
    N = G.n_lines
    for i in range(N):
        assert all(w >= N for w in adj[i])
    # connected
    seen = {0}
    stack = [0]
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    assert len(seen) == nv


def test_pfr2_q3_r1_spectrum():
    rep = spectrum_exact(build_pfr2(ring_make("padic", 3, 1, 1)))
    assert {e["value_squared_exact"] for e in rep.eigenvalues} == {16, 3}


def test_delta_examples():
    R = ring_make("padic", 2, 1, 2)
    assert delta(R, (1, 0, 0), (1, 0, 0)) == 0
    assert delta(R, (1, 0, 0), (1, 2, 0)) == 1
    assert delta(R, (1, 0, 0), (0, 1, 0)) == 2
    assert delta_brute(R, (1, 0, 0), (1, 2, 0)) == 1


@pytest.mark.parametrize("spec", ["zmod:2^2", "ff:2^2", "zmod:3^2"])
def test_delta_matches_brute_force(spec):
    R = parse_ring_spec(spec)
    lines = enumerate_lines(R)
    rng = np.random.default_rng(0)
    for _ in range(200):
        u, w = (lines[i] for i in rng.integers(len(lines), size=2))
        assert delta(R, u, w) == delta_brute(R, u, w)


@pytest.mark.parametrize("spec", ["zmod:2^2", "zmod:2^3", "ff:2^2"])
def test_delta_ultrametric_exhaustive(spec):
    R = parse_ring_spec(spec)
    G = build_pfr2(R)
    D = delta_matrix(R, G.lines)
    assert np.all(np.diag(D) == 0)
    assert np.array_equal(D, D.T)
    # D[u, w] <= max(D[u, v], D[v, w]) for all u, v, w
    for v in range(len(D)):
        assert np.all(D <= np.maximum(D[:, v][:, None], D[v][None, :]))


def test_planes_are_free_rank2_submodules():
    R = ring_make("padic", 2, 1, 2)
    G = build_pfr2(R)
    subs = enumerate_submodules(R, 3)
    free2 = set()
    for s in subs:
        if submodule_exponents(R, s["gens"], 3) == (2, 0, 0):
            free2.add(s["members"])
    kernels = set()
    for phi in G.planes:
        mem = set()
        for v in itertools.product(range(4), repeat=3):
            if sum(int(a) * b for a, b in zip(phi, v)) % 4 == 0:
                mem.add(v[0] * 16 + v[1] * 4 + v[2])
        kernels.add(frozenset(mem))
    assert kernels == free2
    assert len(free2) == line_count(2, 2)


def test_quotient_duality_small():
    for r in (1, 2):
        R = ring_make("padic", 2, 1, r)
        for s in enumerate_submodules(R, 3):
            m = submodule_exponents(R, s["gens"], 3)
            # M has exponents m, so O^3/M = sum O/pi^m_i, which as a
            # submodule of O_r^3 has exponents r - m_i
            lam = quotient_type(R, s["members"], 3)
            assert lam == tuple(sorted(m, reverse=True))


def test_free_summands_count():
    R = ring_make("padic", 2, 1, 2)
    assert len(free_summands(R, 3, 1)) == 28
    assert len(free_summands(R, 3, 2)) == 28


@pytest.mark.parametrize("spec,nv,ne", [("zmod:2^1", 14, 21), ("zmod:2^2", 56, 168)])
def test_flag_complex(spec, nv, ne):
    F = build_pfr_d(parse_ring_spec(spec), 2)
    assert F.n_cells(0) == nv and F.n_cells(1) == ne


def test_example_maximal_free_flag_is_a_cell():
    R = ring_make("padic", 3, 1, 2)
    F = build_pfr_d(R, 2)
    idx_line = next(i for i, (M, k) in enumerate(zip(F.vertices, F.ranks)) if k == 1 and list(M[:, 0]) == [1, 0, 0])
    idx_plane = next(
        i for i, (M, k) in enumerate(zip(F.vertices, F.ranks)) if k == 2 and M[:, 0].tolist() == [1, 0, 0] and M[:, 1].tolist() == [0, 1, 0]
    )
    assert (idx_line, idx_plane) in set(F.cells[1])


def test_build_pfr_d_overflow():
    with pytest.raises(OverflowError):
        build_pfr_d(ring_make("padic", 5, 1, 3), 3, max_flags=1000)


def test_export_edge_list(tmp_path):
    G = build_pfr2(ring_make("padic", 2, 1, 1))
    meta = export_edge_list(G, tmp_path)
    assert meta == {"q": 2, "r": 1, "ring": "zmod:2^1", "n_vertices": 14, "degree": 3}
    rows = [tuple(map(int, l.split())) for l in (tmp_path / "edges.txt").read_text().split("\n") if l]
    assert len(rows) == 21
    assert all(u < 7 <= v for u, v in rows)
