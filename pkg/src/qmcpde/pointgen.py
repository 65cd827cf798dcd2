"""Point generators: lattice rules and sequences, digital nets in Gray-code order,
random shifts, coordinate maps and the shifted-rule estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .lattice import GeneratingVector
from .special import inv_normal_cdf

__all__ = [
    "lattice_point", "lattice_points", "radical_inverse", "lattice_seq_point",
    "lattice_seq_points", "apply_shift", "ShiftSet", "columns_to_fixed",
    "digital_point", "digital_points", "GrayCodeGenerator", "interlace_bits",
    "fixed_to_float", "map_uniform", "map_lognormal", "inv_normal_cdf",
    "estimate_with_shifts",
]

_U64 = np.uint64


class SequenceExhausted(IndexError):
    pass


def lattice_point(i: int, gv: GeneratingVector) -> np.ndarray:
    if not 0 <= i < gv.n:
        raise IndexError(f"index {i} outside [0, {gv.n})")
    return np.array([(i * z % gv.n) / gv.n for z in gv.z])


def lattice_points(gv: GeneratingVector, start: int = 0, count: int | None = None) -> np.ndarray:
    """Points ``start .. start+count-1`` of the rank-1 rule, shape ``(count, s)``."""
    if count is None:
        count = gv.n - start
    if start < 0 or start + count > gv.n:
        raise IndexError("index range outside the rule")
    k = np.arange(start, start + count, dtype=np.int64)[:, None]
    return (k * np.asarray(gv.z, dtype=np.int64) % gv.n) / gv.n


def radical_inverse(i, m_max: int):
    """Base-2 radical inverse of ``i`` over ``m_max`` bits, as an integer numerator of 2^m_max."""
    i = np.asarray(i, dtype=np.uint64)
    out = np.zeros_like(i)
    for b in range(m_max):
        out |= ((i >> _U64(b)) & _U64(1)) << _U64(m_max - 1 - b)
    return out


def lattice_seq_points(gv: GeneratingVector, m_max: int, start: int = 0, count: int = 1) -> np.ndarray:
    """Lattice sequence points ``frac(phi_2(i) z)``; every 2^k prefix is a rank-1 rule."""
    if start < 0 or start + count > 1 << m_max:
        raise IndexError("index range outside the sequence")
    if m_max > 62:
        raise ValueError("m_max must be at most 62")
    phi = radical_inverse(np.arange(start, start + count, dtype=np.uint64), m_max).astype(np.int64)
    N = 1 << m_max
    z = np.asarray(gv.z, dtype=object) if m_max > 31 else np.asarray(gv.z, dtype=np.int64)
    num = (phi[:, None] * z[None, :]) % N
    return np.asarray(num, dtype=float) / N


def lattice_seq_point(i: int, gv: GeneratingVector, m_max: int) -> np.ndarray:
    return lattice_seq_points(gv, m_max, i, 1)[0]


def apply_shift(points, delta) -> np.ndarray:
    """Componentwise ``frac(t + delta)``."""
    x = np.asarray(points, dtype=float) + np.asarray(delta, dtype=float)
    x -= np.floor(x)
    return x


@dataclass(frozen=True)
class ShiftSet:
    """``r`` uniform shifts in [0,1)^s, reproducible from the seed."""

    r: int
    s: int
    seed: int = 0

    @property
    def shifts(self) -> np.ndarray:
        rng = np.random.Generator(np.random.Philox(self.seed))
        return rng.random((self.r, self.s))


def columns_to_fixed(cols, rows: int, precision: int = 64) -> np.ndarray:
    """Convert column integers (bit k = row k+1) to MSB-aligned uint64 fixed point.

    Only the top ``min(rows, precision, 64)`` rows are kept.
    """
    p = min(rows, precision, 64)
    out = np.zeros(len(cols), dtype=np.uint64)
    for t, c in enumerate(cols):
        v = 0
        for r in range(p):
            if c >> r & 1:
                v |= 1 << (63 - r)
        out[t] = v
    return out


def fixed_to_float(x) -> np.ndarray:
    """MSB-aligned 64-bit fixed point to float, truncated to 53 bits (never rounds up to 1)."""
    x = np.asarray(x, dtype=np.uint64)
    return (x >> _U64(11)).astype(float) * 2.0**-53


def _fixed_matrix(matrices, rows: int, precision: int) -> np.ndarray:
    """Shape (m, s) array: column t of every dimension as fixed point."""
    return np.stack([columns_to_fixed(cols, rows, precision) for cols in matrices], axis=1)


def digital_point(i: int, matrices, rows: int, precision: int = 64) -> np.ndarray:
    """Point i (natural order) of the digital net with the given column-encoded matrices."""
    fixed = _fixed_matrix(matrices, rows, precision)
    if not 0 <= i < 1 << fixed.shape[0]:
        raise IndexError(f"index {i} outside the net")
    return fixed_to_float(_digital_state(np.array([i], dtype=np.uint64), fixed)[0])


def _digital_state(idx: np.ndarray, fixed: np.ndarray) -> np.ndarray:
    state = np.zeros((idx.shape[0], fixed.shape[1]), dtype=np.uint64)
    for t in range(fixed.shape[0]):
        bit = ((idx >> _U64(t)) & _U64(1)).astype(bool)
        state[bit] ^= fixed[t]
    return state


def digital_points(matrices, rows: int, start: int = 0, count: int | None = None,
                   precision: int = 64, fixed: bool = False) -> np.ndarray:
    """Points in natural order by direct matrix-vector products over GF(2)."""
    fx = _fixed_matrix(matrices, rows, precision)
    n = 1 << fx.shape[0]
    if count is None:
        count = n - start
    if start < 0 or start + count > n:
        raise IndexError("index range outside the net")
    state = _digital_state(np.arange(start, start + count, dtype=np.uint64), fx)
    return state if fixed else fixed_to_float(state)


def _ctz(i: np.ndarray) -> np.ndarray:
    i = np.asarray(i, dtype=np.uint64)
    low = i & (~i + _U64(1))
    return np.log2(low.astype(float)).astype(np.int64)


class GrayCodeGenerator:
    """Digital sequence in Gray-code order.

    Step i -> i+1 XORs column ctz(i+1) of every matrix into the running state.
    Starting at ``offset`` sets the state directly from gray(offset).
    """

    def __init__(self, matrices, rows: int, offset: int = 0, precision: int = 64):
        self.fixed = _fixed_matrix(matrices, rows, precision)
        self.m = self.fixed.shape[0]
        self.n = 1 << self.m
        self.s = self.fixed.shape[1]
        if not 0 <= offset <= self.n:
            raise IndexError("offset outside the net")
        self.index = offset
        g = np.array([offset ^ (offset >> 1)], dtype=np.uint64)
        self.state = _digital_state(g, self.fixed)[0] if offset < self.n else np.zeros(self.s, dtype=np.uint64)

    def take_fixed(self, count: int) -> np.ndarray:
        """Next ``count`` states (the current one first), as uint64 fixed point."""
        if count < 0 or self.index + count > self.n:
            raise SequenceExhausted("sequence exhausted")
        if count == 0:
            return np.zeros((0, self.s), dtype=np.uint64)
        steps = np.arange(self.index + 1, self.index + count, dtype=np.uint64)
        deltas = np.empty((count, self.s), dtype=np.uint64)
        deltas[0] = self.state
        if count > 1:
            deltas[1:] = self.fixed[_ctz(steps)]
        out = np.bitwise_xor.accumulate(deltas, axis=0)
        self.index += count
        if self.index < self.n:
            self.state = out[-1] ^ self.fixed[int(_ctz(np.array([self.index]))[0])]
        return out

    def take(self, count: int) -> np.ndarray:
        return fixed_to_float(self.take_fixed(count))

    def next_point(self) -> np.ndarray:
        return self.take(1)[0]


def interlace_bits(values, m: int) -> int:
    """Interlace alpha m-digit numbers (integers, digit 1 most significant).

    Output digit (k-1)*alpha + a is digit k of input a; the result has alpha*m
    digits.
    """
    values = [int(v) for v in values]
    alpha = len(values)
    if any(not 0 <= v < 1 << m for v in values):
        raise ValueError(f"inputs must have at most {m} digits")
    out = 0
    for k in range(m):
        for v in values:
            out = (out << 1) | (v >> (m - 1 - k) & 1)
    return out


def map_uniform(points) -> np.ndarray:
    return np.asarray(points, dtype=float) - 0.5


def map_lognormal(points) -> np.ndarray:
    t = np.asarray(points, dtype=float)
    if np.any((t <= 0.0) | (t >= 1.0)):
        raise ValueError("lognormal map needs coordinates strictly inside (0, 1)")
    return inv_normal_cdf(t)


def estimate_with_shifts(values) -> tuple[float, float]:
    """Mean of r shifted-rule estimates and its standard error."""
    q = np.asarray(values, dtype=float)
    r = q.shape[0]
    if r < 2:
        raise ValueError("need at least two shifts for a standard error")
    mean = float(np.mean(q))
    return mean, math.sqrt(float(np.sum((q - mean) ** 2)) / (r * (r - 1)))
