"""Weight systems for QMC constructions.

POD weights ``gamma_u = Gamma_{|u|} * prod_{j in u} Upsilon_j`` feed the lattice
CBC construction; SPOD weights, which sum POD-like terms over smoothness
multi-indices, feed the interlaced polynomial lattice construction. The order
factors Gamma are kept as logarithms since ``(l + a1)!`` overflows doubles
long before ``l`` reaches typical dimensions.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from .special import norm_cdf, zeta


class WeightError(ValueError):
    """Raised for parameters outside the domain of a weight formula."""


@dataclass(frozen=True)
class PowerDecay:
    """The rule ``B_j = c * j**(-d2)``."""

    c: float = 1.0
    d2: float = 2.0

    def values(self, s: int) -> np.ndarray:
        j = np.arange(1, s + 1, dtype=float)
        return self.c * j ** (-self.d2)

    def power_sum(self, p: float) -> float:
        """``sum_{j>=1} B_j**p`` over the infinite sequence."""
        if self.d2 * p <= 1.0:
            raise WeightError(f"sum of B_j^p diverges: d2*p = {self.d2 * p} <= 1")
        return self.c**p * zeta(self.d2 * p)


@dataclass(frozen=True)
class WeightParams:
    """Parameters of the generalized mixed-derivative bound.

    ``B`` holds ``B_j`` for j = 1..s, either with shape ``(s,)`` or, when the
    bound depends on the derivative order, shape ``(s, alpha)`` with column
    ``nu - 1`` holding ``B_j(nu)``.
    """

    s: int
    B: np.ndarray
    alpha: int = 1
    a1: int = 0
    a2: float = 1.0
    a3: float = 0.0
    d1: float = 1.0
    d2: float = 2.0
    delta: float = 0.125

    def __post_init__(self):
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B[: self.s]
        else:
            B = B[: self.s, : self.alpha]
        object.__setattr__(self, "B", B)
        B.setflags(write=False)
        if self.s < 1:
            raise WeightError("s must be positive")
        if B.shape[0] != self.s:
            raise WeightError(f"need {self.s} values of B_j, got {B.shape[0]}")
        if B.ndim == 2 and B.shape[1] != self.alpha:
            raise WeightError("nu-dependent B must have alpha columns")
        if not np.all(B > 0):
            raise WeightError("all B_j must be positive")
        if int(self.alpha) != self.alpha or self.alpha < 1:
            raise WeightError("alpha must be a positive integer")
        if int(self.a1) != self.a1 or self.a1 < 0:
            raise WeightError("a1 must be a non-negative integer")
        if self.a2 <= 0 or self.a3 < 0 or self.d1 < 0:
            raise WeightError("need a2 > 0, a3 >= 0, d1 >= 0")
        if self.d2 <= 1:
            raise WeightError("d2 must exceed 1")
        if not 0 < self.delta < 0.5:
            raise WeightError("delta must lie in (0, 1/2)")

    @classmethod
    def from_rule(cls, s: int, c: float = 1.0, d2: float = 2.0, **kw) -> "WeightParams":
        return cls(s=s, B=PowerDecay(c, d2).values(s), d2=d2, **kw)

    @property
    def B1(self) -> np.ndarray:
        """``B_j`` at derivative order one."""
        return self.B if self.B.ndim == 1 else self.B[:, 0]

    def B_nu(self, nu: int) -> np.ndarray:
        return self.B if self.B.ndim == 1 else self.B[:, nu - 1]


def log_factorial_ratio(ell, a1: int):
    """``log((ell + a1)! / a1!)``, elementwise."""
    ell = np.asarray(ell, dtype=float)
    return gammaln(ell + a1 + 1.0) - gammaln(a1 + 1.0)


@dataclass(frozen=True)
class PODWeights:
    log_order: np.ndarray  # log Gamma_l, l = 0..s
    dim: np.ndarray  # Upsilon_j, j = 1..s
    lam: float = float("nan")

    def __post_init__(self):
        for name in ("log_order", "dim"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.log_order.shape[0] < self.dim.shape[0] + 1:
            raise WeightError("need order factors for l = 0..s")

    @property
    def s(self) -> int:
        return self.dim.shape[0]

    @property
    def order(self) -> np.ndarray:
        return np.exp(self.log_order)

    def order_ratios(self) -> np.ndarray:
        """``Gamma_l / Gamma_{l-1}`` for l = 1..s."""
        return np.exp(np.diff(self.log_order[: self.s + 1]))

    @property
    def is_product(self) -> bool:
        return bool(np.all(self.log_order[1 : self.s + 1] == self.log_order[0]))

    def gamma(self, u: Iterable[int]) -> float:
        """Weight of the subset ``u`` of 1-based coordinate indices."""
        u = sorted(set(u))
        if not u:
            return 1.0
        logs = self.log_order[len(u)] + np.sum(np.log(self.dim[np.asarray(u) - 1]))
        return float(np.exp(logs))

    def scaled(self, factor: float) -> "PODWeights":
        """Multiply every non-empty-set weight by ``factor``."""
        log_order = self.log_order.copy()
        log_order[1:] += math.log(factor)
        return PODWeights(log_order, self.dim, self.lam)

    def truncated(self, s: int) -> "PODWeights":
        return PODWeights(self.log_order[: s + 1], self.dim[:s], self.lam)


@dataclass(frozen=True)
class SPODWeights:
    alpha: int
    log_order: np.ndarray  # log Gamma_l, l = 0..alpha*s
    dim_nu: np.ndarray  # shape (s, alpha): Upsilon_j(nu)

    def __post_init__(self):
        for name in ("log_order", "dim_nu"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.dim_nu.ndim != 2 or self.dim_nu.shape[1] != self.alpha:
            raise WeightError("dim_nu must have shape (s, alpha)")
        if self.log_order.shape[0] < self.alpha * self.s + 1:
            raise WeightError("need order factors for l = 0..alpha*s")

    @property
    def s(self) -> int:
        return self.dim_nu.shape[0]

    def gamma(self, u: Iterable[int]) -> float:
        """Weight of ``u``: expands the product over ``u`` as a polynomial in |nu|."""
        u = sorted(set(u))
        poly = np.array([1.0])
        for j in u:
            factor = np.concatenate([[0.0], self.dim_nu[j - 1]])
            poly = np.convolve(poly, factor)
        ell = np.arange(poly.shape[0])
        return float(np.sum(poly * np.exp(self.log_order[ell])))

    def scaled(self, factor: float) -> "SPODWeights":
        log_order = self.log_order.copy()
        log_order[1:] += math.log(factor)
        return SPODWeights(self.alpha, log_order, self.dim_nu)


def choose_lambda(d2: float, delta: float = 0.125) -> float:
    """Pick lambda in (1/2, 1] from the decay ``d2`` of ``B_j``.

    ``1/(2 lambda) = 1 - delta`` when ``d2 >= 3/2 - delta``, otherwise
    ``1/(2 lambda) = d2 - 1/2``.
    """
    if not d2 > 1:
        raise WeightError("d2 must exceed 1")
    if not 0 < delta < 0.5:
        raise WeightError("delta must lie in (0, 1/2)")
    inv = 1.0 - delta if d2 >= 1.5 - delta else d2 - 0.5
    return 1.0 / (2.0 * inv)


def choose_lambda_p0(p0: float, delta: float = 0.125) -> float:
    """Alternative selector keyed by the summability exponent ``p0`` (e.g. 1/d2)."""
    if not 0 < p0 < 1:
        raise WeightError("p0 must lie in (0, 1)")
    if not 0 < delta < 0.5:
        raise WeightError("delta must lie in (0, 1/2)")
    if p0 <= 2.0 / 3.0:
        return 1.0 / (2.0 - 2.0 * delta)
    return p0 / (2.0 - p0)


def rho_lattice(lam: float) -> float:
    """``2 zeta(2 lam) / (2 pi^2)^lam``."""
    if not lam > 0.5:
        raise WeightError("rho_lattice diverges for lambda <= 1/2")
    return 2.0 * zeta(2.0 * lam) / (2.0 * math.pi**2) ** lam


def rho_lognormal(lam: float, alpha_j: float) -> float:
    if not lam > 0.5:
        raise WeightError("lambda must exceed 1/2")
    if not alpha_j > 0:
        raise WeightError("alpha_j must be positive")
    eta = (2.0 * lam - 1.0) / (4.0 * lam)
    base = math.sqrt(2.0 * math.pi) * math.exp(alpha_j**2 / eta) / (
        math.pi ** (2.0 - 2.0 * eta) * (1.0 - eta) * eta)
    return 2.0 * base**lam * zeta(lam + 0.5)


def rho_lognormal_alt(lam: float, alpha: float) -> float:
    """Factor for the Gaussian-shaped weight function ``exp(-alpha y^2)``."""
    if not 0 < alpha < 0.5:
        raise WeightError("alpha must lie in (0, 1/2)")
    if not lam > 1.0 / (2.0 - 2.0 * alpha):
        raise WeightError("zeta argument 2(1-alpha)lambda must exceed 1")
    base = math.sqrt(2.0 * math.pi) / (math.pi ** (2.0 - 2.0 * alpha) * (1.0 - alpha) * alpha)
    return 2.0 * base**lam * zeta(2.0 * (1.0 - alpha) * lam)


def rho_interlaced(alpha: int, lam: float) -> float:
    if alpha < 2:
        raise WeightError("interlacing factor must be at least 2")
    if not alpha * lam > 1.0:
        raise WeightError("need alpha * lambda > 1")
    t = 2.0 ** (alpha * lam)
    return 2.0 ** (alpha * lam * (alpha - 1) / 2.0) * ((1.0 + 1.0 / (t - 2.0)) ** alpha - 1.0)


def alpha_j(a3B: float, lam: float) -> float:
    """Decay rate of the weight function that minimises the lognormal bound."""
    if not lam > 0.5:
        raise WeightError("lambda must exceed 1/2")
    if a3B < 0:
        raise WeightError("a3*B_j must be non-negative")
    return 0.5 * (a3B + math.sqrt(a3B * a3B + 1.0 - 1.0 / (2.0 * lam)))


def pod_weights(params: WeightParams, lam: float | None = None, case: str | None = None) -> PODWeights:
    """POD weights for lattice rules; ``case`` defaults to lognormal iff a3 > 0."""
    if lam is None:
        lam = choose_lambda(params.d2, params.delta)
    if not 0.5 < lam <= 1.0:
        raise WeightError("lambda must lie in (1/2, 1]")
    if case is None:
        case = "lognormal" if params.a3 > 0 else "uniform"
    expo = 2.0 / (1.0 + lam)
    ell = np.arange(params.s + 1)
    log_order = expo * params.d1 * log_factorial_ratio(ell, params.a1)
    B = params.B1
    if case == "uniform":
        dim = (params.a2 * B / math.sqrt(rho_lattice(lam))) ** expo
    elif case == "lognormal":
        a3B = params.a3 * B
        alphas = np.array([alpha_j(x, lam) for x in a3B])
        rhos = np.array([rho_lognormal(lam, a) for a in alphas])
        denom = 2.0 * np.exp(a3B**2 / 2.0) * norm_cdf(a3B) * np.sqrt((alphas - a3B) * rhos)
        dim = (params.a2 * B / denom) ** expo
    else:
        raise WeightError(f"unknown case {case!r}")
    return PODWeights(log_order, dim, lam)


def spod_weights(params: WeightParams) -> SPODWeights:
    a = params.alpha
    if a < 2:
        raise WeightError("SPOD weights need alpha >= 2")
    ell = np.arange(a * params.s + 1)
    log_order = params.d1 * log_factorial_ratio(ell, params.a1)
    dim_nu = np.empty((params.s, a))
    for nu in range(1, a + 1):
        dim_nu[:, nu - 1] = (2.0 if nu == a else 1.0) * (params.a2 * params.B_nu(nu)) ** nu
    return SPODWeights(a, log_order, dim_nu)


def fubini_lambda(n: int) -> int:
    """``Lambda_0 = 1``, ``Lambda_n = sum_{i<n} C(n, i) Lambda_i`` (ordered Bell numbers)."""
    if n < 0:
        raise ValueError("n must be non-negative")
    vals = [1]
    for k in range(1, n + 1):
        vals.append(sum(math.comb(k, i) * vals[i] for i in range(k)))
    return vals[n]


def stechkin_tail(B: Sequence[float] | PowerDecay, p0: float, s: int) -> float:
    """Upper bound on ``sum_{j>s} B_j`` for a non-increasing sequence.

    ``B`` is either the whole sequence as explicit values or a ``PowerDecay``
    rule (whose p0-power sum is then evaluated exactly through zeta).
    """
    if not 0 < p0 < 1:
        raise WeightError("p0 must lie in (0, 1)")
    if isinstance(B, PowerDecay):
        total = B.power_sum(p0)
    else:
        total = float(np.sum(np.asarray(B, dtype=float) ** p0))
    if not math.isfinite(total):
        raise WeightError("sum of B_j^p0 is not finite")
    q = 1.0 / p0 - 1.0
    return min(1.0 / q, 1.0) * total ** (1.0 / p0) * s ** (-q)


def _sub_indices(nu: Sequence[int]):
    return itertools.product(*(range(k + 1) for k in nu))


def _multi_binom(nu, m) -> int:
    out = 1
    for a, b in zip(nu, m):
        out *= math.comb(a, b)
    return out


def combinatorial_identities_check(nu: Sequence[int]) -> bool:
    """Verify the multi-index binomial identities by enumerating all m <= nu."""
    nu = tuple(int(k) for k in nu)
    if any(k < 0 for k in nu):
        raise ValueError("multi-index entries must be non-negative")
    n = sum(nu)
    f = math.factorial
    by_order = [0] * (n + 1)
    s1 = s2 = s5 = 0
    for m in _sub_indices(nu):
        c = _multi_binom(nu, m)
        k = sum(m)
        by_order[k] += c
        s1 += c * f(k) * f(n - k)
        s2 += c * f(k) * f(n - k + 1)
        s5 += c * (f(k + 2) // 2) * (f(n - k + 2) // 2)
    ok0 = all(by_order[i] == math.comb(n, i) for i in range(n + 1))
    return ok0 and s1 == f(n + 1) and 2 * s2 == f(n + 2) and 120 * s5 == f(n + 5)


__all__ = [
    "PowerDecay", "WeightParams", "PODWeights", "SPODWeights", "WeightError",
    "choose_lambda", "choose_lambda_p0", "rho_lattice", "rho_lognormal",
    "rho_lognormal_alt", "rho_interlaced", "alpha_j", "pod_weights", "spod_weights",
    "fubini_lambda", "stechkin_tail", "combinatorial_identities_check",
    "log_factorial_ratio",
]
