import numpy as np
import pytest

from freeflags.cayley import (
    build_cayley,
    decompose_word,
    distinct_projectively,
    enumerate_sp,
    gaussian_prime,
    identity_link,
    iota_root,
    pgl3_order,
    power_generators,
    psl3_order,
    read_cayley,
    reduce_mod_q,
    sigma_tables,
    sqrt_minus_one,
    valid_continuations,
    write_cayley,
)


def _gdiv(x: complex, d: complex) -> bool:
    """d | x in Z[i], by exact integer arithmetic on x * conj(d)."""
    n = int(round(d.real)) ** 2 + int(round(d.imag)) ** 2
    y = complex(x) * complex(d).conjugate()
    return int(round(y.real)) % n == 0 and int(round(y.imag)) % n == 0


@pytest.fixture(scope="module")
def S5():
    return enumerate_sp(5)


@pytest.fixture(scope="module")
def sig5(S5):
    return sigma_tables(S5)


def test_gaussian_prime():
    assert gaussian_prime(5) == complex(1, 2)
    assert gaussian_prime(13) == complex(3, 2)
    with pytest.raises(ValueError):
        gaussian_prime(7)


@pytest.mark.parametrize("p,count", [(5, 31), (13, 183)])
def test_sp_invariants(p, count):
    S = enumerate_sp(p)
    assert len(S) == count == p * p + p + 1
    pi = gaussian_prime(p)
    for s in S:
        assert np.allclose(s.conj().T @ s, p * np.eye(3))
        for z in np.diag(s):
            assert _gdiv(z - 1, complex(2, 2))
        det = complex(np.round(np.linalg.det(s)))
        assert _gdiv(det, pi) and not _gdiv(det, pi * pi)


def test_s5_printed_members(S5):
    printed = [
        np.diag([2j - 1, 2j - 1, -2j - 1]),
        np.array([[1, 1 + 1j, 1 + 1j], [1 + 1j, 1, -1 - 1j], [1 + 1j, -1 - 1j, 1]]),
        np.array([[2j - 1, 0, 0], [0, 1, 2], [0, -2, 1]]),
    ]
    for M in printed:
        assert any(np.allclose(s, M) for s in S5)


def test_sigma_tables(S5, sig5):
    assert sig5.sigma.shape == (31, 25)
    assert all(len(c) == 6 for c in sig5.closers)
    for a in range(31):
        assert set(sig5.sigma[a]).isdisjoint(sig5.closers[a])
        for b in sig5.closers[a]:
            c = sig5.third[(a, b)]
            T = S5[a] @ S5[b] @ S5[c]
            assert np.allclose(T, T[0, 0] * np.eye(3)) and abs(T[0, 0]) > 0


def test_power_generators(S5, sig5):
    w1, P1 = power_generators(S5, sig5, 1)
    assert len(w1) == 31
    w2, P2 = power_generators(S5, sig5, 2)
    assert len(w2) == 775
    assert distinct_projectively(P2)


def test_power_generators_13():
    S = enumerate_sp(13)
    w, P = power_generators(S, sigma_tables(S), 2)
    assert len(w) == 183 * 169 and distinct_projectively(P)


def test_eps_and_orders():
    assert sqrt_minus_one(5) == 2
    assert sqrt_minus_one(13) == 5
    assert pgl3_order(5) == 372000 == psl3_order(5)
    assert psl3_order(7) * 3 == pgl3_order(7)


def test_reduction_injective_and_inverse_closed(S5):
    R = reduce_mod_q(S5, 13)
    assert len({tuple(r) for r in R}) == 31
    # s^-1 = s* projectively; s* is in S_p up to scalar for p = 5?  check mod q
    inv = reduce_mod_q(np.conj(np.transpose(S5, (0, 2, 1))), 13)
    for a in range(31):
        M = (R[a].reshape(3, 3) @ inv[a].reshape(3, 3)) % 13
        assert np.all(M == M[0, 0] * np.eye(3, dtype=np.int64) % 13) and M[0, 0] != 0


def test_reduce_mod_q_errors(S5):
    with pytest.raises(ValueError):
        reduce_mod_q(S5, 7)


@pytest.mark.parametrize("p,q", [(5, 13), (13, 5)])
def test_identity_link_spectrum(p, q):
    S = enumerate_sp(p)
    adj = identity_link(S, q)
    n = 2 * (p * p + p + 1)
    assert len(adj) == n and all(len(a) == p + 1 for a in adj)
    M = np.zeros((n, n))
    for i, nb in enumerate(adj):
        M[i, nb] = 1
    w = np.linalg.eigvalsh(M)
    want = np.array([p + 1, -(p + 1), np.sqrt(p), -np.sqrt(p)])
    assert np.max(np.min(np.abs(w[:, None] - want[None, :]), axis=1)) < 1e-9


def test_build_cayley_budget():
    with pytest.raises(OverflowError):
        build_cayley(13, 5, budget_mb=10)
    with pytest.raises(ValueError):
        build_cayley(5, 5)


def test_cayley_13_5(cayley_13_5, tmp_path):
    C = cayley_13_5.C
    assert C.n == 372000 == pgl3_order(5)
    assert C.degree == 183
    for j in range(0, 183, 37):
        assert np.array_equal(np.sort(C.nbr[j]), np.arange(C.n))
        assert np.array_equal(C.nbr_inv[j][C.nbr[j]], np.arange(C.n))
    assert not C.tripartite()


def test_cayley_roundtrip(tmp_path, cayley_13_5):
    C = cayley_13_5.C
    path = tmp_path / "x.bin"
    write_cayley(C, path)
    raw = path.read_bytes()
    assert raw[:8] == b"HDXCAY01"
    assert np.frombuffer(raw[8:24], dtype="<u4").tolist() == [13, 5, 372000, 183]
    D = read_cayley(path)
    assert np.array_equal(D.nbr, C.nbr) and np.array_equal(D.elements, C.elements)


def test_iota_root():
    for p in (5, 13):
        for k in (1, 2, 3):
            rho = iota_root(p, k)
            assert (rho * rho + 1) % p**k == 0
            pi = gaussian_prime(p)
            assert (int(pi.real) + int(pi.imag) * rho) % p == 0


def test_valid_continuations(S5, sig5):
    for a in (0, 7, 30):
        ts = valid_continuations(S5, sig5, (a,), 1)
        assert sorted(t[0] for t in ts) == sig5.closers[a]
    leg = (0, int(sig5.sigma[0][3]))
    ts = valid_continuations(S5, sig5, leg, 2)
    assert len(ts) == 30  # (q+1) q^(k-1) triangles through a power edge
    for t in ts[:5]:
        M = S5[leg[0]] @ S5[leg[1]] @ S5[t[0]] @ S5[t[1]]
        back = decompose_word(S5, np.conj(M.T), 2)
        # the closing 2-geodesic from the endpoint back to the start exists
        assert back is not None


def test_decompose_word(S5, sig5):
    words, prods = power_generators(S5, sig5, 2)
    for i in range(0, len(words), 97):
        assert decompose_word(S5, prods[i], 2) == words[i]
