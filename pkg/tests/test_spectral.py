import math

import numpy as np
import pytest

from freeflags.flags import build_pfr2
from freeflags.ring import parse_ring_spec, ring_make
from freeflags.spectral import (
    SparseOperator,
    b_ell_compressed,
    eigensolve,
    isospectral_pair,
    mixing_bound,
    n_table_value,
    q_delta,
    q_matrix,
    spectrum_exact,
    verify_annihilator,
    verify_b_difference,
    verify_N_table,
    verify_q_delta,
)


@pytest.fixture(scope="module")
def G22():
    return build_pfr2(ring_make("padic", 2, 1, 2))


def test_q_row_sums(G22):
    Q = q_matrix(G22)
    assert np.all(Q.sum(axis=1) == 36)


@pytest.mark.parametrize("spec,c", [("zmod:2^2", 32), ("zmod:2^1", 1)])
def test_annihilator_values(spec, c):
    a = verify_annihilator(build_pfr2(parse_ring_spec(spec)))
    assert a["holds"] and a["c"] == c


@pytest.mark.parametrize("spec", ["zmod:3^2", "zmod:2^3", "ff:4^2", "zmod:3^1", "zmod:5^1", "ff:4^1", "zmod:5^2"])
def test_annihilator_integral(spec):
    a = verify_annihilator(build_pfr2(parse_ring_spec(spec)))
    assert a["holds"] and isinstance(a["c"], int) and a["c"] != 0


def test_spectrum_examples():
    rep = spectrum_exact(build_pfr2(ring_make("padic", 2, 1, 1)))
    vals = sorted((e["sign"] * e["value_squared_exact"], e["multiplicity"]) for e in rep.eigenvalues)
    assert vals == [(-9, 1), (-2, 6), (2, 6), (9, 1)]
    rep = spectrum_exact(build_pfr2(ring_make("padic", 2, 1, 2)))
    assert rep.total_multiplicity() == 56
    assert {e["value_squared_exact"] for e in rep.eigenvalues} == {36, 8, 4}


@pytest.mark.parametrize("spec", ["zmod:2^2", "zmod:3^2", "ff:4^2", "zmod:2^3"])
def test_multiplicities_symmetric_and_normalized_gap(spec):
    G = build_pfr2(parse_ring_spec(spec))
    rep = spectrum_exact(G)
    pos = {e["value_squared_exact"]: e["multiplicity"] for e in rep.eigenvalues if e["sign"] == 1}
    neg = {e["value_squared_exact"]: e["multiplicity"] for e in rep.eigenvalues if e["sign"] == -1}
    assert pos == neg and rep.total_multiplicity() == G.n_vertices
    q, r = G.ring.q, G.ring.r
    k = (q + 1) * q ** (r - 1)
    second = max(math.sqrt(v) for v in pos if v != k * k)
    assert abs(second / k - math.sqrt(q) / (q + 1)) < 1e-12


def test_rank_mod_p_certificate_path():
    G = build_pfr2(ring_make("padic", 2, 1, 3))
    a = spectrum_exact(G, exact_limit=10)
    b = spectrum_exact(G, exact_limit=10**6) if G.n_lines <= 120 else a
    assert a.method == "rank-mod-p-certified"
    assert [e["multiplicity"] for e in a.eigenvalues] == [e["multiplicity"] for e in b.eigenvalues]


@pytest.mark.parametrize("spec", ["zmod:2^2", "zmod:2^3", "zmod:3^2"])
def test_n_table_and_q_delta(spec):
    G = build_pfr2(parse_ring_spec(spec))
    nt = verify_N_table(G)
    assert nt["consistent"] and nt["mismatches"] == []
    assert verify_q_delta(G)["mismatches"] == 0


def test_n_table_examples():
    assert n_table_value(2, 2, 1, 1, 1) == 2
    assert n_table_value(2, 2, 1, 2, 2) == 24
    assert n_table_value(2, 2, 0, 0, 0) == 1
    assert n_table_value(2, 2, 2, 1, 1) == 0  # not ultrametric-admissible
    assert [q_delta(2, 2, d) for d in range(3)] == [6, 2, 1]


@pytest.mark.parametrize("q,r,spec", [(2, 2, "zmod:2^2"), (2, 3, "zmod:2^3"), (3, 2, "zmod:3^2")])
def test_b_difference_formula(q, r, spec):
    res = verify_b_difference(q, r, build_pfr2(parse_ring_spec(spec)))
    assert all(row["dense_agrees"] for row in res["rows"])
    assert res["all_match"], [row for row in res["rows"] if not row["match"]]


def test_compressed_annihilator_is_constant():
    for q, r in ((2, 2), (2, 3), (3, 2), (5, 2)):
        B = b_ell_compressed(q, r, r)
        assert len(set(B)) == 1 and B[0] != 0


def test_eigensolve_agrees_with_exact(G22):
    op = SparseOperator.from_adjacency(G22.adjacency_lists())
    dense = eigensolve(op, mode="dense")
    w = np.sort([e["value_float"] for e in dense.eigenvalues])
    assert np.max(np.abs(w - spectrum_exact(G22).floats())) < 1e-9
    lz = eigensolve(op, k=4, mode="lanczos", tol=1e-9)
    assert lz.residual <= 1e-8
    assert np.allclose([e["value_float"] for e in lz.eigenvalues], [6, 2 * math.sqrt(2), 2 * math.sqrt(2), 2 * math.sqrt(2)], atol=1e-8)


def test_eigensolve_heawood_and_disconnected():
    G = build_pfr2(ring_make("padic", 2, 1, 1))
    rep = eigensolve(SparseOperator.from_adjacency(G.adjacency_lists()), mode="dense")
    assert np.allclose(sorted({round(e["value_float"], 9) for e in rep.eigenvalues}), [-3, -math.sqrt(2), math.sqrt(2), 3])
    # two disjoint triangles
    adj = [[1, 2], [0, 2], [0, 1], [4, 5], [3, 5], [3, 4]]
    rep = eigensolve(SparseOperator.from_adjacency(adj), k=2, mode="dense")
    assert abs(rep.eigenvalues[0]["value_float"] - rep.eigenvalues[1]["value_float"]) < 1e-12


def test_eigensolve_rejects_nonsymmetric():
    with pytest.raises(ValueError):
        eigensolve(SparseOperator.from_matrix(np.array([[0.0, 1.0], [0.0, 0.0]])), mode="dense")


def test_lanczos_vs_dense_large_graph():
    G = build_pfr2(ring_make("padic", 3, 1, 2))
    op = SparseOperator.from_adjacency(G.adjacency_lists())
    d = eigensolve(op, k=6, mode="dense")
    l = eigensolve(op, k=6, mode="lanczos", tol=1e-9)
    assert np.allclose([e["value_float"] for e in d.eigenvalues], [e["value_float"] for e in l.eigenvalues], atol=1e-8)


def test_isospectral_pair():
    r1 = isospectral_pair(2, 1, budget_s=60)
    assert r1["spectra_equal"] and r1["isomorphic"] is True
    r2 = isospectral_pair(2, 2, budget_s=600)
    assert r2["spectra_equal"] and r2["isomorphic"] is False
    with pytest.raises(ValueError):
        isospectral_pair(4, 2)


def test_mixing_bound():
    G = build_pfr2(ring_make("padic", 2, 1, 1))
    adj = G.adjacency_lists()
    n = len(adj)
    full = mixing_bound(adj, range(n), range(n), 3, math.sqrt(2))
    assert full["edges"] == 42 and full["holds"]
    # points against lines: bipartite, so -3 is the relevant nontrivial eigenvalue
    half = mixing_bound(adj, range(7), range(7, 14), 3, math.sqrt(2))
    assert half["edges"] == 21 and not half["holds"]
    assert mixing_bound(adj, range(7), range(7, 14), 3, 3.0)["holds"]
    empty = mixing_bound(adj, [], range(n), 3, math.sqrt(2))
    assert empty["edges"] == 0 and empty["holds"]
