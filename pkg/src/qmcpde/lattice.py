"""Rank-1 lattice rules: fast CBC construction and error bounds.

The shift-averaged worst-case error in the unanchored Sobolev space is

    e^2(z) = sum_{u != {}} gamma_u (1/n) sum_k prod_{j in u} B2({k z_j / n}),

with ``B2(x) = x^2 - x + 1/6``. For POD weights the sum over ``u`` collapses to
a recursion over the order ``|u|``, and the search over candidates for the next
component is a cyclic correlation over the unit group modulo ``n = p^m``,
evaluated with FFTs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .weights import PODWeights, rho_lattice


class ConstructionError(ValueError):
    pass


def bernoulli2(x):
    x = np.asarray(x, dtype=float)
    return x * x - x + 1.0 / 6.0


def prime_power(n: int) -> tuple[int, int]:
    """Return ``(p, m)`` with ``n = p**m``, p prime, or raise."""
    if n < 2:
        if n == 1:
            return 2, 0
        raise ConstructionError(f"invalid number of points {n}")
    p = next(d for d in range(2, n + 1) if n % d == 0)
    m = 0
    k = n
    while k % p == 0:
        k //= p
        m += 1
    if k != 1:
        raise ConstructionError(f"{n} is not a prime power")
    return p, m


@dataclass(frozen=True)
class GeneratingVector:
    n: int
    z: tuple[int, ...]
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "z", tuple(int(v) for v in self.z))
        for v in self.z:
            if math.gcd(v, self.n) != 1 and self.n > 1:
                raise ConstructionError(f"component {v} not coprime to n={self.n}")

    @property
    def s(self) -> int:
        return len(self.z)

    def truncated(self, s: int) -> "GeneratingVector":
        return GeneratingVector(self.n, self.z[:s], dict(self.meta))

    def points(self) -> np.ndarray:
        """All n points, shape ``(n, s)``."""
        k = np.arange(self.n, dtype=np.int64)[:, None]
        return (k * np.asarray(self.z, dtype=np.int64)[None, :] % self.n) / self.n


def _primitive_root(p: int, m: int) -> int:
    phi_p = p - 1
    factors = [q for q in range(2, phi_p + 1) if phi_p % q == 0 and all(q % r for r in range(2, q))]
    for g in range(2, p * p + 1):
        if g % p == 0:
            continue
        if all(pow(g, phi_p // q, p) != 1 for q in factors) and (m < 2 or pow(g, phi_p, p * p) != 1):
            return g
    raise ConstructionError(f"no primitive root found for {p}")


class _CyclicPlan:
    """Index bookkeeping for correlating a point-indexed vector with B2(k z / n).

    Points ``k`` with p-adic valuation ``t`` are written ``k = p^t u`` with
    ``u`` a unit modulo ``N_t = p^(m-t)``. Units are powers of a generator
    (``+-5^b`` for p = 2, where the sign is irrelevant because B2 is even).
    """

    def __init__(self, n: int):
        p, m = prime_power(n)
        self.n, self.p, self.m = n, p, m
        if p == 2:
            gen = 5
            period = max(n // 4, 1)
        else:
            gen = _primitive_root(p, m)
            period = n - n // p
        powers = np.empty(period, dtype=np.int64)
        v = 1
        for a in range(period):
            powers[a] = v
            v = v * gen % n
        if n == 1:
            # single point at the origin; every z gives the same rule
            self.candidates = np.array([1], dtype=np.int64)
            self.cand_log = np.array([0], dtype=np.int64)
        else:
            log = np.full(n, -1, dtype=np.int64)
            log[powers] = np.arange(period)
            if p == 2:
                log[(n - powers) % n] = np.arange(period)
            self.candidates = np.flatnonzero(log >= 0)
            self.cand_log = log[self.candidates]
        self.blocks = []
        for t in range(m):
            N = p ** (m - t)
            L = max(N // 4, 1) if p == 2 else N - N // p
            reps = powers[:L] % N
            plus = p**t * reps
            minus = p**t * ((N - reps) % N) if (p == 2 and N >= 4) else None
            kernel = bernoulli2(reps / N)
            kf = np.fft.rfft(kernel) if L >= 64 else None
            self.blocks.append((L, plus, minus, kernel, kf))

    def correlate(self, X: np.ndarray) -> np.ndarray:
        """``sum_k X[k] B2({k z / n})`` for every candidate z (in candidate order)."""
        out = np.full(self.candidates.shape[0], X[0] * bernoulli2(0.0))
        for L, plus, minus, kernel, kf in self.blocks:
            Y = X[plus] if minus is None else X[plus] + X[minus]
            if kf is None:
                idx = (np.arange(L)[:, None] + np.arange(L)[None, :]) % L
                c = kernel[idx] @ Y
            else:
                c = np.fft.irfft(np.conj(np.fft.rfft(Y)) * kf, n=L)
            out += c[self.cand_log % L]
        return out


def _pick(values: np.ndarray, candidates: np.ndarray, noise: float) -> int:
    vmin = values.min()
    tol = noise + 1e-13 * abs(vmin)
    return int(candidates[np.flatnonzero(values <= vmin + tol)[0]])


class CriterionState:
    """Working state of the fast CBC construction.

    For general POD weights ``Q[l, k] = Gamma_l * (sum over |u| = l of the
    kernel products at point k)``; with product weights a single running
    product per point suffices.
    """

    def __init__(self, n: int, weights: PODWeights):
        self.n = n
        self.weights = weights
        self.plan = _CyclicPlan(n)
        self.product = weights.is_product
        self.ratios = weights.order_ratios()
        self.z: list[int] = []
        if self.product:
            self.prod = np.ones(n)
        else:
            self.Q = np.zeros((weights.s + 1, n))
            self.Q[0] = 1.0

    @property
    def candidates(self) -> np.ndarray:
        return self.plan.candidates

    def value(self) -> float:
        """Current squared shift-averaged worst-case error."""
        if self.product:
            return float(np.mean(self.prod) - 1.0)
        j = len(self.z)
        return float(np.sum(np.mean(self.Q[1 : j + 1], axis=1)))

    def _linear_part(self) -> np.ndarray:
        j = len(self.z)
        ups = self.weights.dim[j]
        if self.product:
            return ups * self.prod
        return ups * (self.ratios[: j + 1] @ self.Q[: j + 1])

    def candidate_values(self) -> tuple[np.ndarray, float]:
        """Criterion after appending each candidate, and a rounding-noise scale."""
        if len(self.z) >= self.weights.s:
            raise ConstructionError("weights exhausted")
        X = self._linear_part()
        vals = self.value() + self.plan.correlate(X) / self.n
        noise = 64 * np.finfo(float).eps * (np.sum(np.abs(X)) / (6 * self.n) + abs(self.value()))
        return vals, noise

    def kernel_column(self, z: int) -> np.ndarray:
        k = np.arange(self.n, dtype=np.int64)
        return bernoulli2((k * z % self.n) / self.n)

    def add(self, z: int) -> None:
        j = len(self.z)
        omega = self.kernel_column(z)
        ups = self.weights.dim[j]
        if self.product:
            self.prod *= 1.0 + ups * omega
        else:
            self.Q[1 : j + 2] += (ups * self.ratios[: j + 1])[:, None] * omega * self.Q[: j + 1]
        self.z.append(int(z))

    def choose(self) -> int:
        vals, noise = self.candidate_values()
        return _pick(vals, self.candidates, noise)


def cbc_construct(n: int, s: int, weights: PODWeights) -> GeneratingVector:
    """Component-by-component construction for ``n = p^m`` points.

    Each new component minimises the shift-averaged worst-case error over the
    units modulo n; ties go to the smallest integer.
    """
    if s <= 0:
        raise ConstructionError("s must be positive")
    if weights.s < s:
        raise ConstructionError(f"weights cover {weights.s} dimensions, need {s}")
    prime_power(n)
    state = CriterionState(n, weights.truncated(s))
    errors = []
    for _ in range(s):
        state.add(state.choose())
        errors.append(state.value())
    return GeneratingVector(n, state.z, {"e2": errors, "lambda": weights.lam})


def construct_embedded(m_max: int, s: int, weights: PODWeights) -> GeneratingVector:
    """Generating vector for the base-2 lattice sequence with up to ``2**m_max`` points.

    Plain CBC at the largest size; every 2^k prefix of the radical-inverse
    ordered sequence is then the rank-1 rule with the same z modulo 2^k.
    """
    gv = cbc_construct(2**m_max, s, weights)
    return GeneratingVector(gv.n, gv.z, dict(gv.meta, embedded=True, m_max=m_max))


def shift_avg_wce_sq(gv: GeneratingVector, weights: PODWeights) -> float:
    """Squared shift-averaged worst-case error of a rank-1 lattice rule."""
    if weights.s < gv.s:
        raise ConstructionError(f"weights cover {weights.s} dimensions, rule has {gv.s}")
    state = CriterionState(gv.n, weights.truncated(gv.s))
    for z in gv.z:
        state.add(z)
    return state.value()


def pod_power_sum(weights: PODWeights, lam: float, rho) -> float:
    """``sum_{u != {}} gamma_u^lam prod_{j in u} rho_j`` by recursion over |u|."""
    s = weights.s
    rho = np.broadcast_to(np.asarray(rho, dtype=float), (s,))
    ratios = weights.order_ratios() ** lam
    ups = weights.dim**lam * rho
    Q = np.zeros(s + 1)
    Q[0] = 1.0
    for j in range(s):
        Q[1 : j + 2] += ups[j] * ratios[: j + 1] * Q[: j + 1]
    return float(np.sum(Q[1:]) * math.exp(lam * weights.log_order[0]))


def lattice_bound(weights: PODWeights, n: int, lam: float, r: int = 1, rho=None) -> float:
    """RMS error bound ``r^{-1/2} ((2/n) sum gamma_u^lam prod rho_j)^{1/(2 lam)}``.

    ``rho`` defaults to the unit-cube factor; pass per-dimension factors for
    the lognormal weighted space on R^s.
    """
    if r < 1:
        raise ValueError("r must be at least 1")
    if rho is None:
        rho = rho_lattice(lam)
    total = pod_power_sum(weights, lam, rho)
    return (2.0 / n * total) ** (1.0 / (2.0 * lam)) / math.sqrt(r)


def theorem1_bound(weights: PODWeights, n: int, lam: float, r: int = 1) -> float:
    if not 0.5 < lam <= 1.0:
        raise ValueError("lambda must lie in (1/2, 1]")
    return lattice_bound(weights, n, lam, r)
