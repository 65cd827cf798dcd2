"""Interlaced polynomial lattice rules over GF(2) with SPOD weights.

The CBC criterion is

    E(z) = sum_{u != {}} gamma_u (1/n) sum_k prod_{j in u} W_j(k),
    W_j(k) = D (prod_{i=1}^{alpha} (1 + omega(x_{j,i}(k))) - 1),   D = 2^{alpha(alpha-1)/2},

where x_{j,i}(k) is the k-th point of the i-th polynomial component of
dimension j and ``omega(x) = sum_{k>=1} 2^{-alpha mu_1(k)} wal_k(x)``. At x = 0
the per-dimension term equals rho_alpha(1). Components are chosen one at a
time, and the criterion is linear in the kernel of the component being chosen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .weights import SPODWeights, rho_interlaced


class InterlacedConstructionError(ValueError):
    pass


def walsh_kernel(values: np.ndarray, m: int, alpha: int) -> np.ndarray:
    """``omega(v / 2^m)`` for m-digit integers v (digit 1 most significant).

    With ``c = 2^(alpha-1)`` and t the position of the first nonzero digit,
    ``omega = (1 - 2 c^(1-t) + c^(-t)) / (2 (c - 1))``; ``omega(0) = 1/(2^alpha - 2)``.
    """
    v = np.asarray(values, dtype=np.uint64)
    c = 2.0 ** (alpha - 1)
    out = np.full(v.shape, 1.0 / (2.0**alpha - 2.0))
    nz = v > 0
    # bit_length via float log2 is exact for integers below 2^53
    t = m - np.floor(np.log2(v[nz].astype(float)))
    out[nz] = (1.0 - 2.0 * c ** (1.0 - t) + c ** (-t)) / (2.0 * (c - 1.0))
    return out


@dataclass(frozen=True)
class DigitalRule:
    """Generating matrices of a (possibly interlaced) digital net.

    ``C[c]`` and ``B[d]`` are lists of column integers: bit k of a column is
    row k+1, which carries weight 2^-(k+1).
    """

    m: int
    alpha: int
    modulus: int
    gen_polys: tuple[int, ...]
    C: tuple[tuple[int, ...], ...]
    B: tuple[tuple[int, ...], ...]
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def s(self) -> int:
        return len(self.B)

    @property
    def rows(self) -> int:
        return self.alpha * self.m

    @property
    def n(self) -> int:
        return 1 << self.m

    @classmethod
    def from_polys(cls, m: int, alpha: int, modulus: int, polys, meta=None) -> "DigitalRule":
        polys = tuple(int(p) for p in polys)
        if len(polys) % alpha:
            raise InterlacedConstructionError("number of polynomials must be a multiple of alpha")
        C = tuple(tuple(generating_columns(z, modulus)) for z in polys)
        B = tuple(tuple(cols) for cols in interlace_matrices(C, alpha, m))
        return cls(m, alpha, modulus, polys, C, B, dict(meta or {}))

    def truncated_B(self, bits: int) -> list[list[int]]:
        """B matrices keeping only the top ``bits`` rows."""
        mask = (1 << bits) - 1
        return [[c & mask for c in cols] for cols in self.B]


def generating_columns(z: int, P: int) -> list[int]:
    """Columns of the Hankel matrix of z/P, column-encoded."""
    m = gf2.degree(P)
    return gf2.matrix_to_columns(gf2.hankel_matrix(z, P, m))


def interlace_matrices(C_list, alpha: int, m: int | None = None, rows: int | None = None) -> list[list[int]]:
    """Row ``r`` (1-based) of B_d is row ceil(r/alpha) of C_{alpha(d-1) + ((r-1) mod alpha) + 1}.

    Source matrices have m columns and ``rows`` rows (default m).
    """
    C_list = [list(c) for c in C_list]
    if alpha < 1 or len(C_list) % alpha:
        raise InterlacedConstructionError("matrix count must be a multiple of alpha")
    if m is None:
        m = len(C_list[0]) if C_list else 0
    if any(len(c) != m for c in C_list):
        raise InterlacedConstructionError("all matrices must have m columns")
    if rows is None:
        rows = m
    out = []
    for d in range(len(C_list) // alpha):
        group = C_list[alpha * d : alpha * (d + 1)]
        cols = []
        for t in range(m):
            v = 0
            for a, mat in enumerate(group):
                col = mat[t]
                for r in range(rows):
                    if col >> r & 1:
                        v |= 1 << (r * alpha + a)
            cols.append(v)
        out.append(cols)
    return out


class _FieldPlan:
    """Correlation of a point-indexed vector with ``omega(value(k z mod P))`` for all z != 0."""

    def __init__(self, P: int, alpha: int):
        m = gf2.degree(P)
        self.P, self.m, self.n = P, m, 1 << m
        order = self.n - 1
        g = gf2.find_generator(P)
        powers = np.empty(order, dtype=np.uint64)
        block = min(order, 1024)
        cur = 1
        for e in range(block):
            powers[e] = cur
            cur = gf2.mulmod(cur, g, P)
        step = cur  # g^block
        start = block
        while start < order:
            size = min(block, order - start)
            powers[start : start + size] = gf2.mulmod_array(powers[start - block : start - block + size], step, P)
            start += size
        self.powers = powers.astype(np.int64)
        log = np.full(self.n, -1, dtype=np.int64)
        log[self.powers] = np.arange(order)
        self.candidates = np.arange(1, self.n, dtype=np.int64)
        self.cand_log = log[1:]
        self.kernel = walsh_kernel(gf2.residue_values(powers, P), m, alpha)
        self.kf = np.fft.rfft(self.kernel) if order >= 64 else None
        self.omega0 = float(walsh_kernel(np.zeros(1), m, alpha)[0])

    def correlate(self, X: np.ndarray) -> np.ndarray:
        N = self.n - 1
        Y = X[self.powers]
        if self.kf is None:
            idx = (np.arange(N)[:, None] + np.arange(N)[None, :]) % N
            c = self.kernel[idx] @ Y
        else:
            c = np.fft.irfft(np.conj(np.fft.rfft(Y)) * self.kf, n=N)
        return X[0] * self.omega0 + c[self.cand_log]

    def kernel_column(self, z: int, alpha: int) -> np.ndarray:
        res = gf2.mulmod_array(np.arange(self.n, dtype=np.uint64), z, self.P)
        return walsh_kernel(gf2.residue_values(res, self.P), self.m, alpha)


class InterlacedCriterionState:
    """Per-order state ``Q[l, k]`` (order l = |nu| up to alpha*s) plus the dimension in progress."""

    def __init__(self, P: int, alpha: int, weights: SPODWeights):
        if weights.alpha != alpha:
            raise InterlacedConstructionError("SPOD weights built for a different alpha")
        self.alpha = alpha
        self.weights = weights
        self.plan = _FieldPlan(P, alpha)
        self.n = self.plan.n
        self.D = 2.0 ** (alpha * (alpha - 1) / 2)
        self.Q = np.zeros((alpha * weights.s + 1, self.n))
        self.Q[0] = 1.0
        self.polys: list[int] = []
        self._start_dimension()

    @property
    def dim(self) -> int:
        return len(self.polys) // self.alpha

    def _start_dimension(self):
        self.prod = np.ones(self.n)
        j = self.dim
        if j >= self.weights.s:
            self.T = None
            return
        a = self.alpha
        top = a * (j + 1)
        lg = self.weights.log_order
        T = np.zeros(self.n)
        for nu in range(1, a + 1):
            ell = np.arange(nu, top + 1)
            ratio = np.exp(lg[ell] - lg[ell - nu])
            T += self.weights.dim_nu[j, nu - 1] * (ratio @ self.Q[ell - nu])
        self.T = T

    def value(self) -> float:
        base = float(np.sum(np.mean(self.Q[1:], axis=1)))
        if self.T is None:
            return base
        return base + self.D * float(np.mean((self.prod - 1.0) * self.T))

    def candidate_values(self) -> tuple[np.ndarray, float]:
        if self.T is None:
            raise InterlacedConstructionError("weights exhausted")
        X = self.D * self.prod * self.T
        v = self.value()
        vals = v + self.plan.correlate(X) / self.n
        noise = 64 * np.finfo(float).eps * (np.sum(np.abs(X)) / self.n + abs(v))
        return vals, noise

    def add(self, z: int) -> None:
        self.prod = self.prod * (1.0 + self.plan.kernel_column(z, self.alpha))
        self.polys.append(int(z))
        if len(self.polys) % self.alpha == 0:
            j = self.dim - 1
            a = self.alpha
            W = self.D * (self.prod - 1.0)
            lg = self.weights.log_order
            top = a * (j + 1)
            inc = np.zeros((top + 1, self.n))
            for nu in range(1, a + 1):
                ell = np.arange(nu, top + 1)
                ratio = np.exp(lg[ell] - lg[ell - nu])
                inc[ell] += (self.weights.dim_nu[j, nu - 1] * ratio)[:, None] * self.Q[ell - nu]
            self.Q[: top + 1] += W * inc
            self._start_dimension()

    def choose(self) -> int:
        vals, noise = self.candidate_values()
        vmin = vals.min()
        hit = np.flatnonzero(vals <= vmin + noise + 1e-13 * abs(vmin))[0]
        return int(self.plan.candidates[hit])


def cbc_construct_interlaced(m: int, s: int, alpha: int, weights: SPODWeights,
                             modulus: int | None = None) -> DigitalRule:
    """Greedy choice of alpha*s generating polynomials of degree < m."""
    if alpha < 2:
        raise InterlacedConstructionError("interlacing factor must be at least 2")
    if m < 1:
        raise InterlacedConstructionError("m must be positive")
    if s <= 0:
        raise InterlacedConstructionError("s must be positive")
    if weights.s < s:
        raise InterlacedConstructionError(f"weights cover {weights.s} dimensions, need {s}")
    P = gf2.default_modulus(m) if modulus is None else int(modulus)
    if gf2.degree(P) != m or not gf2.is_irreducible(P):
        raise InterlacedConstructionError("modulus must be irreducible of degree m")
    w = SPODWeights(alpha, weights.log_order[: alpha * s + 1], weights.dim_nu[:s])
    state = InterlacedCriterionState(P, alpha, w)
    for _ in range(alpha * s):
        state.add(state.choose())
    meta = {"criterion": state.value()}
    if alpha * m > 64:
        meta["warning"] = f"alpha*m = {alpha * m} exceeds 64 bits; rendered points are truncated"
    return DigitalRule.from_polys(m, alpha, P, state.polys, meta)


def interlaced_criterion(rule: DigitalRule, weights: SPODWeights) -> float:
    """Criterion value of a complete rule, recomputed from its polynomials."""
    state = InterlacedCriterionState(rule.modulus, rule.alpha, SPODWeights(
        rule.alpha, weights.log_order[: rule.alpha * rule.s + 1], weights.dim_nu[: rule.s]))
    for z in rule.gen_polys:
        state.add(z)
    return state.value()


def spod_power_sum(weights: SPODWeights, lam: float, rho: float) -> float:
    """Upper bound on ``sum_{u != {}} gamma_u^lam rho^|u|`` (exact for lam = 1).

    Uses ``(sum_nu t_nu)^lam <= sum_nu t_nu^lam`` so the sum over u stays a
    recursion over the order |nu|.
    """
    a, s = weights.alpha, weights.s
    lg = weights.log_order
    Q = np.zeros(a * s + 1)
    Q[0] = 1.0
    for j in range(s):
        top = a * (j + 1)
        inc = np.zeros(top + 1)
        for nu in range(1, a + 1):
            ell = np.arange(nu, top + 1)
            inc[ell] += weights.dim_nu[j, nu - 1] ** lam * np.exp(lam * (lg[ell] - lg[ell - nu])) * Q[ell - nu]
        Q[: top + 1] += rho * inc
    return float(np.sum(Q[1:]) * math.exp(lam * lg[0]))


def theorem3_bound(weights: SPODWeights, n: int, lam: float) -> float:
    """``((2/n) sum_u gamma_u^lam rho_alpha(lam)^|u|)^(1/lam)`` for lam in (1/alpha, 1]."""
    a = weights.alpha
    if not 1.0 / a < lam <= 1.0:
        raise ValueError("lambda must lie in (1/alpha, 1]")
    return (2.0 / n * spod_power_sum(weights, lam, rho_interlaced(a, lam))) ** (1.0 / lam)
