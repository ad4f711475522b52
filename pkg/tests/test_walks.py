import math

import numpy as np
import pytest

from freeflags.building import build_ball
from freeflags.cayley import power_generators
from freeflags.complex import geodesic_power
from freeflags.flags import build_pfr2
from freeflags.ring import ring_make
from freeflags.walks import (
    RWalk,
    apply_A2_fast,
    apply_Am,
    double_sampler_experiment,
    gvr_structure,
    lambda_m_bound,
    line_walk_sampler,
    power_edge_transition,
    rwalk_mix_estimate,
    sample_geodesics,
    sample_kwalks,
    sampler_experiment,
    wilson_interval,
)


def test_lambda_m_bound_values():
    assert lambda_m_bound(13, 1)["bound"] == 78
    assert lambda_m_bound(13, 2)["bound"] == 1950
    assert lambda_m_bound(13, 1)["normalized"] == 6 / 13
    assert lambda_m_bound(13, 2)["normalized"] == 12 / 169
    assert lambda_m_bound(13, 1)["degree"] == 366


def test_wilson_interval():
    lo, hi = wilson_interval(0, 100)
    assert lo < 1e-15 and 0.03 < hi < 0.04
    lo, hi = wilson_interval(50, 100)
    assert lo < 0.5 < hi and abs((lo + hi) / 2 - 0.5) < 1e-12
    assert wilson_interval(0, 0) == (0.0, 1.0)


def test_A1_degree_and_adjoint(cayley_13_5):
    X = cayley_13_5
    n = X.C.n
    assert np.allclose(apply_Am(X, np.ones(n), 1), 366)
    rng = np.random.default_rng(1)
    f, g = rng.standard_normal(n), rng.standard_normal(n)
    assert abs(f @ apply_Am(X, g, 1) - g @ apply_Am(X, f, 1)) < 1e-8 * n


def test_A2_hecke_matches_words(cayley_13_5):
    X = cayley_13_5
    C = X.C
    words, _ = power_generators(X.S, X.sig, 2)
    W = np.array(words)
    f = np.random.default_rng(2).standard_normal(C.n)
    fast = apply_A2_fast(X, f)
    for g in (0, 17, 99999, 371999):
        fw = C.nbr[W[:, 1], C.nbr[W[:, 0], g]]
        bw = C.nbr_inv[W[:, 0], C.nbr_inv[W[:, 1], g]]
        assert abs(fast[g] - (f[fw].sum() + f[bw].sum())) < 1e-9
    assert np.allclose(apply_A2_fast(X, np.ones(C.n)), 2 * 30927)


def test_gvr_small_ball(ball2_4, cx2_4):
    inner = [v for v in range(ball2_4.n) if ball2_4.dist[v] <= 2]
    g = gvr_structure(cx2_4, 2, 1, inner, n_pairs=30, n_funcs=3, seed=5)
    assert g["ok"] and g["decomposition_mismatches"] == 0


def test_sampler_trivial_sets():
    G = build_pfr2(ring_make("padic", 2, 1, 2))
    draw, lam = line_walk_sampler(G, 4)
    assert lam == 2 / 9
    rng = np.random.default_rng(0)
    for full in (False, True):
        in_S = np.full(G.n_lines, full)
        res = sampler_experiment(draw, in_S, 0.1, 5000, 0.5, rng)
        assert res["bad"] == 0 and res["holds"]


def test_sampler_deviation_shrinks_with_length():
    G = build_pfr2(ring_make("padic", 2, 1, 2))
    in_S = np.zeros(G.n_lines, dtype=bool)
    in_S[: G.n_lines // 3] = True
    fr = []
    for k in (2, 16):
        draw, _ = line_walk_sampler(G, k)
        fr.append(sampler_experiment(draw, in_S, 0.2, 20000, 1.0, np.random.default_rng(k))["bad_fraction"])
    assert fr[1] < fr[0]


def test_geodesic_and_kwalk_samples(cayley_13_5):
    X = cayley_13_5
    rng = np.random.default_rng(3)
    verts, letters = sample_geodesics(X, 3, 500, rng)
    for i in (0, 1):
        assert np.all(np.isin(letters[:, i + 1], X.sig.sigma[letters[:, i]].ravel()))
        assert all(letters[j, i + 1] in X.sig.sigma[letters[j, i]] for j in range(50))
    verts, letters = sample_kwalks(X, 2, 4, 200, rng)
    assert verts.shape == (200, 9)
    for j in range(20):
        for i in range(1, 8):
            if i % 2 == 0:
                assert letters[j, i] in X.closers[letters[j, i - 1]]
            else:
                assert letters[j, i] in X.sig.sigma[letters[j, i - 1]]


def test_double_sampler_structure_and_determinism(cayley_13_5):
    a = double_sampler_experiment(cayley_13_5, 2, 8, 0.2, 0.3, 4000, seed=11)
    b = double_sampler_experiment(cayley_13_5, 2, 8, 0.2, 0.3, 4000, seed=11)
    assert a == b
    assert a["legs_are_only_geodesics"]
    assert a["first_target_trivial"] and a["second_target_trivial"]
    assert 0 < a["first_level"]["bad_fraction"] < 1
    with pytest.raises(ValueError):
        double_sampler_experiment(cayley_13_5, 3, 8, 0.2, 0.3, 10, seed=0)


def test_rwalk_continuations(cayley_13_5):
    X = cayley_13_5
    for k in (1, 2):
        W = RWalk(X, k)
        word = (5,) if k == 1 else (5, int(X.sig.sigma[5][0]))
        cont = W.continuations(word)
        assert len(cont) == 14 * 13 ** (k - 1)
        t = tuple(int(x) for x in cont[3])
        u = W.closing_word(word, t)
        assert len(u) == k
        M = np.eye(3, dtype=complex)
        for a in word + t + u:
            M = M @ X.S[a]
        assert np.allclose(M, M[0, 0] * np.eye(3)) and abs(M[0, 0]) > 0
        # the triangle closes in the group as well
        assert W.end(W.end(W.end(7, word), t), u) == 7


def test_rwalk_mix_runs(cayley_13_5):
    r = rwalk_mix_estimate(cayley_13_5, 1, 6, 400, seed=1, buckets=8)
    assert 0 <= r["tv"] <= 1 and r["null_tv_95"] > 0
    assert r == rwalk_mix_estimate(cayley_13_5, 1, 6, 400, seed=1, buckets=8)


def test_power_edge_transition_symmetric():
    X = build_ball(2, 2).to_colored_complex()
    P = geodesic_power(X, 1)
    edges, T = power_edge_transition(P)
    assert len(edges) > 0
    assert np.allclose(T, T.T)
    assert np.all(T.sum(axis=1) <= 1 + 1e-12)
