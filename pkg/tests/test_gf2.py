import numpy as np
import pytest

from qmcpde import gf2


def _poly_mod(a, b):
    db = b.bit_length() - 1
    while a and a.bit_length() - 1 >= db:
        a ^= b << (a.bit_length() - 1 - db)
    return a


def _irreducible_by_trial_division(P):
    m = P.bit_length() - 1
    return all(_poly_mod(P, q) != 0 for q in range(2, 1 << (m // 2 + 1)))


def _clmul(a, b):
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def test_small_moduli():
    assert gf2.default_modulus(1) in (0b10, 0b11)
    assert gf2.default_modulus(2) == 0b111
    quadratics = [q for q in range(4, 8) if _irreducible_by_trial_division(q)]
    assert quadratics == [0b111]


@pytest.mark.parametrize("m", range(1, 33))
def test_modulus_table_irreducible(m):
    P = gf2.default_modulus(m)
    assert gf2.degree(P) == m
    assert _irreducible_by_trial_division(P) if m <= 24 else gf2.is_irreducible(P)


def test_is_irreducible_against_trial_division():
    for P in range(2, 1 << 11):
        assert gf2.is_irreducible(P) == _irreducible_by_trial_division(P), P


def test_arithmetic_against_reference():
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b = (int(x) for x in rng.integers(0, 1 << 30, size=2))
        assert gf2.mul(a, b) == _clmul(a, b)
        if b:
            q, r = gf2.divmod_poly(a, b)
            assert _clmul(q, b) ^ r == a and (r == 0 or gf2.degree(r) < gf2.degree(b))
    P = gf2.default_modulus(16)
    for _ in range(50):
        a, b = (int(x) for x in rng.integers(0, 1 << 16, size=2))
        assert gf2.mulmod(a, b, P) == _poly_mod(_clmul(a, b), P)
        arr = gf2.mulmod_array(np.array([a, b], dtype=np.uint64), b, P)
        assert list(arr) == [_poly_mod(_clmul(a, b), P), _poly_mod(_clmul(b, b), P)]


def test_laurent_example_and_zero():
    assert gf2.laurent_expansion(1, 0b111, 5) == [0, 1, 1, 0, 1]
    assert gf2.laurent_expansion(0, 0b111, 6) == [0] * 6


def test_laurent_multiply_back():
    rng = np.random.default_rng(1)
    for _ in range(100):
        m = int(rng.integers(1, 17))
        P = gf2.default_modulus(m)
        z = int(rng.integers(0, 1 << m))
        L = int(rng.integers(1, 40))
        a = gf2.laurent_expansion(z, P, L)
        A = sum(bit << (L - 1 - i) for i, bit in enumerate(a))
        residual = (z << L) ^ _clmul(P, A)
        assert residual == 0 or residual.bit_length() - 1 < m


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_laurent_period(m):
    P = gf2.default_modulus(m)
    T = (1 << m) - 1
    for z in range(1, 1 << m):
        a = gf2.laurent_expansion(z, P, 3 * T + 5)
        assert all(a[i] == a[i + T] for i in range(len(a) - T))


def test_hankel_examples():
    assert gf2.hankel_matrix(1, 0b111, 2) == [[0, 1], [1, 1]]
    assert gf2.hankel_matrix(0, 0b111, 2) == [[0, 0], [0, 0]]
    P = gf2.default_modulus(7)
    C = gf2.hankel_matrix(77, P)
    for r in range(6):
        for t in range(1, 7):
            assert C[r][t] == C[r + 1][t - 1]
    assert gf2.columns_to_matrix(gf2.matrix_to_columns(C), 7) == C


def test_generator_has_full_order():
    for m in range(2, 13):
        P = gf2.default_modulus(m)
        g = gf2.find_generator(P)
        order = (1 << m) - 1
        seen = set()
        x = 1
        for _ in range(order):
            seen.add(x)
            x = gf2.mulmod(x, g, P)
        assert x == 1 and len(seen) == order


def test_residue_values_msb_first():
    P = 0b1011
    vals = gf2.residue_values(np.array([1, 2, 5], dtype=np.uint64), P)
    for h, v in zip((1, 2, 5), vals):
        digits = gf2.laurent_expansion(h, P, 3)
        assert int(v) == int("".join(map(str, digits)), 2)


def test_polynomial_errors():
    with pytest.raises(gf2.PolynomialError):
        gf2.divmod_poly(5, 0)
    with pytest.raises(gf2.PolynomialError):
        gf2.default_modulus(0)
