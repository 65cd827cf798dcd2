"""Polynomials over GF(2) stored as Python ints (bit k is the coefficient of x^k)."""

from __future__ import annotations

import numpy as np

# Smallest primitive polynomial of each degree 1..32.
_PRIMITIVE = (
    0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D, 0x211, 0x409, 0x805, 0x1053,
    0x201B, 0x402B, 0x8003, 0x1002D, 0x20009, 0x40027, 0x80027, 0x100009,
    0x200005, 0x400003, 0x800021, 0x100001B, 0x2000009, 0x4000047, 0x8000027,
    0x10000009, 0x20000005, 0x40000053, 0x80000009, 0x1000000AF,
)


class PolynomialError(ValueError):
    pass


def degree(a: int) -> int:
    """Degree of ``a``; -1 for the zero polynomial."""
    return a.bit_length() - 1


def mul(a: int, b: int) -> int:
    r = 0
    while b:
        if b & 1:
            r ^= a
        a <<= 1
        b >>= 1
    return r


def divmod_poly(a: int, b: int) -> tuple[int, int]:
    if b == 0:
        raise PolynomialError("division by the zero polynomial")
    db = degree(b)
    q = 0
    while a and degree(a) >= db:
        shift = degree(a) - db
        q ^= 1 << shift
        a ^= b << shift
    return q, a


def mod(a: int, b: int) -> int:
    return divmod_poly(a, b)[1]


def mulmod(a: int, b: int, P: int) -> int:
    m = degree(P)
    a = mod(a, P)
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if a >> m & 1:
            a ^= P
    return r


def powmod(a: int, e: int, P: int) -> int:
    r = 1 if degree(P) > 0 else 0
    a = mod(a, P)
    while e:
        if e & 1:
            r = mulmod(r, a, P)
        a = mulmod(a, a, P)
        e >>= 1
    return r


def gcd(a: int, b: int) -> int:
    while b:
        a, b = b, mod(a, b)
    return a


def is_irreducible(P: int) -> bool:
    """Ben-Or test: ``gcd(x^(2^i) - x, P) = 1`` for i = 1..deg(P)/2."""
    m = degree(P)
    if m < 1:
        return False
    if m == 1:
        return True
    if not P & 1:
        return False
    h = 2
    for _ in range(m // 2):
        h = mulmod(h, h, P)
        if gcd(P, h ^ 2) != 1:
            return False
    return True


def default_modulus(m: int) -> int:
    """Built-in irreducible (in fact primitive) modulus of degree m, 1 <= m <= 32."""
    if not 1 <= m <= len(_PRIMITIVE):
        raise PolynomialError(f"no default modulus of degree {m}")
    P = _PRIMITIVE[m - 1]
    if not is_irreducible(P):
        raise PolynomialError(f"table entry for degree {m} is reducible")
    return P


def _prime_factors(N: int) -> list[int]:
    out, d = [], 2
    while d * d <= N:
        if N % d == 0:
            out.append(d)
            while N % d == 0:
                N //= d
        d += 1
    if N > 1:
        out.append(N)
    return out


def find_generator(P: int) -> int:
    """Smallest generator of the multiplicative group of GF(2)[x]/P (P irreducible)."""
    m = degree(P)
    order = (1 << m) - 1
    if order == 1:
        return 1
    factors = _prime_factors(order)
    for g in range(2, 1 << m):
        if all(powmod(g, order // q, P) != 1 for q in factors):
            return g
    raise PolynomialError("modulus is not irreducible")


def laurent_expansion(z: int, P: int, L: int) -> list[int]:
    """Coefficients a_1..a_L of x^-l in the expansion of z/P over GF(2)((x^-1))."""
    if P == 0:
        raise PolynomialError("zero modulus")
    m = degree(P)
    if degree(z) >= m:
        raise PolynomialError("need deg z < deg P")
    out = []
    r = z
    for _ in range(L):
        r <<= 1
        if r >> m & 1:
            out.append(1)
            r ^= P
        else:
            out.append(0)
    return out


def hankel_matrix(z: int, P: int, m: int | None = None) -> list[list[int]]:
    """``C[r][t] = a_{r+t+1}`` (0-based r, t) from the expansion of z/P."""
    if m is None:
        m = degree(P)
    a = laurent_expansion(z, P, 2 * m - 1)
    return [[a[r + t] for t in range(m)] for r in range(m)]


def matrix_to_columns(C: list[list[int]]) -> list[int]:
    """Encode columns as ints; bit k (from the least significant) is row k+1."""
    rows = len(C)
    cols = len(C[0]) if rows else 0
    return [sum(C[r][t] << r for r in range(rows)) for t in range(cols)]


def columns_to_matrix(cols: list[int], rows: int) -> list[list[int]]:
    return [[(c >> r) & 1 for c in cols] for r in range(rows)]


def mulmod_array(a: np.ndarray, b: int, P: int) -> np.ndarray:
    """Vectorised ``a_i * b mod P`` for residues a_i (uint64) and a fixed residue b."""
    m = degree(P)
    a = np.asarray(a, dtype=np.uint64).copy()
    r = np.zeros_like(a)
    top = np.uint64(1 << m)
    Pu = np.uint64(P)
    b = mod(b, P)
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= np.uint64(1)
        a ^= np.where(a & top, Pu, np.uint64(0))
    return r


def residue_values(h: np.ndarray, P: int) -> np.ndarray:
    """First m digits of h/P as integers ``v`` with point value ``v / 2^m`` (digit 1 most significant)."""
    m = degree(P)
    basis = []
    for i in range(m):
        a = laurent_expansion(1 << i, P, m)
        basis.append(sum(bit << (m - 1 - k) for k, bit in enumerate(a)))
    h = np.asarray(h, dtype=np.uint64)
    out = np.zeros_like(h)
    for i, v in enumerate(basis):
        out ^= np.where((h >> np.uint64(i)) & np.uint64(1), np.uint64(v), np.uint64(0))
    return out
