import itertools

import pytest

from freeflags.ring import FiniteField, is_free_submodule, parse_ring_spec, ring_make, smith_form, submodule_type


@pytest.mark.parametrize(
    "kind,p,e,r,size,q",
    [("padic", 2, 1, 2, 4, 2), ("laurent", 2, 1, 2, 4, 2), ("padic", 5, 1, 1, 5, 5), ("laurent", 2, 2, 2, 16, 4)],
)
def test_ring_make_sizes(kind, p, e, r, size, q):
    R = ring_make(kind, p, e, r)
    assert R.size == size and R.q == q
    assert R.pi_pow(r - 1) != 0
    assert R.mul(R.pi_pow(r - 1), R.base) == 0


def test_ring_make_errors():
    with pytest.raises(ValueError):
        ring_make("padic", 4, 1, 2)
    with pytest.raises(ValueError):
        ring_make("padic", 2, 2, 2)
    with pytest.raises(ValueError):
        ring_make("laurent", 2, 2, 1, modulus=(1, 0, 1))  # x^2 + 1 = (x+1)^2 over F_2


def test_valuation_examples():
    Z8 = ring_make("padic", 2, 1, 3)
    assert Z8.val(6) == 1
    assert Z8.val(0) == 3
    F = ring_make("laurent", 2, 1, 3)
    t2_plus_t = F.from_coeffs([0, 1, 1])
    assert F.val(t2_plus_t) == 1


@pytest.mark.parametrize("spec", ["zmod:2^3", "zmod:3^2", "ff:2^3", "ff:4^2", "ff:3^2"])
def test_valuation_multiplicative_exhaustive(spec):
    R = parse_ring_spec(spec)
    r = R.r
    for x in range(R.size):
        for y in range(R.size):
            assert R.val(R.mul(x, y)) == min(R.val(x) + R.val(y), r)


@pytest.mark.parametrize("spec", ["zmod:2^3", "ff:4^2", "zmod:5^2"])
def test_units_and_inverses(spec):
    R = parse_ring_spec(spec)
    for x in R.units():
        assert R.val(x) == 0
        assert R.mul(x, R.inv(x)) == 1
    assert len(R.units()) == R.size - R.size // R.q


def test_finite_field_tables():
    F = FiniteField(2, 2)
    assert F.q == 4
    for a in range(1, 4):
        assert F.mul_table[a, F.inv_table[a]] == 1
    # F_4 multiplicative group is cyclic of order 3
    assert all(F.mul_table[F.mul_table[a, a], a] == 1 for a in range(1, 4))


def test_parse_ring_spec():
    assert parse_ring_spec("zmod:2^3").size == 8
    assert parse_ring_spec("ff:4^2").q == 4
    for bad in ["zmod:4^1", "zmod:2", "ff:6^2", "gf:2^2"]:
        with pytest.raises(ValueError):
            parse_ring_spec(bad)


def test_smith_examples():
    Z4 = ring_make("padic", 2, 1, 2)
    assert smith_form(Z4, [[1, 0, 0], [0, 1, 0], [0, 0, 1]]).exponents == (0, 0, 0)
    assert smith_form(Z4, [[2, 0, 0], [0, 1, 0], [0, 0, 1]]).exponents == (0, 0, 1)
    col = [[2], [2], [0]]
    assert smith_form(Z4, col).exponents == (1,)
    assert not is_free_submodule(Z4, [[2, 2, 0]])
    # oracle: no generator of the cyclic module is unimodular
    gens = {tuple((a * x) % 4 for x in (2, 2, 0)) for a in range(4)}
    assert all(all(x % 2 == 0 for x in g) for g in gens)


def _matmul(R, A, B):
    return [[sum(R.mul(A[i][t], B[t][j]) for t in range(len(B))) % R.size if R.kind == "padic" else _lsum(R, [R.mul(A[i][t], B[t][j]) for t in range(len(B))]) for j in range(len(B[0]))] for i in range(len(A))]


def _lsum(R, xs):
    s = 0
    for x in xs:
        s = R.add(s, x)
    return s


@pytest.mark.parametrize("spec", ["zmod:2^2", "zmod:3^2", "ff:2^2", "ff:4^2"])
def test_smith_transforms_reproduce_diagonal(spec):
    import numpy as np

    R = parse_ring_spec(spec)
    rng = np.random.default_rng(5)
    for _ in range(25):
        M = rng.integers(0, R.size, (3, 3)).tolist()
        res = smith_form(R, M)
        D = _matmul(R, _matmul(R, res.U, M), res.V)
        assert D == res.D
        for i, e in enumerate(res.exponents):
            assert D[i][i] == R.pi_pow(e)
        assert list(res.exponents) == sorted(res.exponents)


def test_submodule_type_counts_missing_factors_as_r():
    Z4 = ring_make("padic", 2, 1, 2)
    assert submodule_type(Z4, [[1, 0, 0]]) == (2, 2, 0)
    assert is_free_submodule(Z4, [[1, 0, 0], [0, 1, 2]])
