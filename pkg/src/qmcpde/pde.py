"""1D model problem -(a(x,y) u')' = f on (0,1), u(0) = u(1) = 0.

Piecewise-linear finite elements on a uniform mesh with M elements. The
coefficient is sampled at element midpoints; load and QoI vectors are
integrated exactly for polynomial f and g.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .special import zeta


class FieldError(ValueError):
    pass


@dataclass(frozen=True)
class CoefficientField:
    """``a0 + sum_j y_j psi_j`` (uniform) or ``a0 exp(sum_j y_j psi_j)`` (lognormal).

    ``psi_j(x) = amplitudes[j-1] * sin(j pi x)``; ``a0`` is constant. The
    amplitude sequence may be longer than ``s``; only the first s terms are used
    for evaluation, while ``a_min`` accounts for the whole sequence plus
    ``tail_sum`` (the sup-norm mass of terms beyond the stored ones).
    """

    kind: str
    a0: float
    amplitudes: np.ndarray
    s: int
    tail_sum: float = 0.0

    def __post_init__(self):
        if self.kind not in ("uniform", "lognormal"):
            raise FieldError(f"unknown field kind {self.kind!r}")
        amp = np.array(self.amplitudes, dtype=float)
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)
        if not 0 <= self.s <= amp.shape[0]:
            raise FieldError("truncation dimension exceeds the stored terms")
        if np.any(np.diff(np.abs(amp)) > 0):
            raise FieldError("term sup-norms must be non-increasing")
        if self.a0 <= 0:
            raise FieldError("a0 must be positive")
        if self.kind == "uniform" and self.a_min <= 0:
            raise FieldError("a_min <= 0: coefficient not uniformly positive")

    def truncated(self, s: int) -> "CoefficientField":
        return CoefficientField(self.kind, self.a0, self.amplitudes, s, self.tail_sum)

    @property
    def sup_norms(self) -> np.ndarray:
        return np.abs(self.amplitudes)

    @property
    def a_min(self) -> float:
        return self.a0 - 0.5 * (float(np.sum(self.sup_norms)) + self.tail_sum)

    @property
    def a_max(self) -> float:
        return self.a0 + 0.5 * (float(np.sum(self.sup_norms)) + self.tail_sum)

    def b(self) -> np.ndarray:
        """``b_j = ||psi_j||_inf / a_min`` (uniform) or ``beta_j = ||psi_j||_inf`` (lognormal)."""
        if self.kind == "uniform":
            return self.sup_norms / self.a_min
        return self.sup_norms.copy()

    def b_bar(self) -> np.ndarray:
        """W^{1,inf} variant: ``max(||psi_j||, ||psi_j'||)`` scaled as in :meth:`b`."""
        j = np.arange(1, self.amplitudes.shape[0] + 1)
        w = self.sup_norms * np.maximum(1.0, j * math.pi)
        return w / self.a_min if self.kind == "uniform" else w

    def terms(self, x: np.ndarray, s: int | None = None) -> np.ndarray:
        s = self.s if s is None else s
        j = np.arange(1, s + 1)[:, None]
        return self.amplitudes[:s, None] * np.sin(j * math.pi * np.asarray(x, dtype=float)[None, :])


def uniform_field(s: int, d2: float = 2.0, beta: float = 0.5, a0: float = 2.0, terms: int | None = None) -> CoefficientField:
    """Uniform test field with ``b_j = beta j^{-d2}`` exactly.

    The amplitude constant c solves ``c / (a0 - c zeta(d2)/2) = beta``, with
    a_min taken over the infinite series.
    """
    c = beta * a0 / (1.0 + beta * zeta(d2) / 2.0)
    K = max(s, terms or s)
    amp = c * np.arange(1, K + 1, dtype=float) ** -d2
    tail = c * zeta(d2) - float(np.sum(amp))
    return CoefficientField("uniform", a0, amp, s, max(tail, 0.0))


def lognormal_field(s: int, d2: float = 2.0, c: float = 0.5, a0: float = 1.0, terms: int | None = None) -> CoefficientField:
    K = max(s, terms or s)
    return CoefficientField("lognormal", a0, c * np.arange(1, K + 1, dtype=float) ** -d2, s)


def constant_field(a: float = 1.0, s: int = 1) -> CoefficientField:
    """y-independent coefficient ``a`` (all terms zero)."""
    return CoefficientField("uniform", a, np.zeros(s), s)


def eval_coeff(x, y, field: CoefficientField) -> np.ndarray:
    """Coefficient at points x for a batch of parameters y (shape (N, s) or (s,))."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    y = np.atleast_2d(y)
    if y.shape[1] != field.s:
        raise FieldError(f"expected {field.s} parameters, got {y.shape[1]}")
    expo = y @ field.terms(x) if field.s else np.zeros((y.shape[0], x.shape[0]))
    if field.kind == "uniform":
        a = field.a0 + expo
        if np.any(a <= 0):
            raise FieldError("coefficient is not positive")
    else:
        a = field.a0 * np.exp(expo)
    return a[0] if single else a


@dataclass(frozen=True)
class FESolution:
    """Interior nodal values (shape (N, M-1)) on the mesh with h = 1/M."""

    M: int
    u: np.ndarray

    @property
    def h(self) -> float:
        return 1.0 / self.M

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(1, self.M) / self.M


def _poly(coeffs):
    """Polynomial from coefficients in increasing powers (a constant is allowed)."""
    return np.polynomial.Polynomial(np.atleast_1d(np.asarray(coeffs, dtype=float)))


def hat_moments(coeffs, M: int) -> np.ndarray:
    """``w_i = int_0^1 p(x) phi_i(x) dx`` for interior hat functions, exact for polynomial p."""
    p = _poly(coeffs)
    q = p.degree() // 2 + 2
    t, wt = np.polynomial.legendre.leggauss(q)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    h = 1.0 / M
    left = np.arange(M)[:, None] * h + h * t[None, :]  # element e, quadrature points
    pv = p(left) * wt[None, :] * h
    rising = pv * t[None, :]  # phi_{e+1} on element e
    falling = pv * (1.0 - t[None, :])  # phi_e on element e
    w = np.sum(rising[:-1], axis=1) + np.sum(falling[1:], axis=1)
    return w


def _thomas(lower, diag, upper, rhs):
    """Batched tridiagonal solve; arrays have shape (N, K) (lower[:, 0], upper[:, -1] unused)."""
    N, K = diag.shape
    c = np.empty((N, K))
    d = np.empty((N, K))
    c[:, 0] = upper[:, 0] / diag[:, 0]
    d[:, 0] = rhs[:, 0] / diag[:, 0]
    for i in range(1, K):
        den = diag[:, i] - lower[:, i] * c[:, i - 1]
        c[:, i] = upper[:, i] / den if i < K - 1 else 0.0
        d[:, i] = (rhs[:, i] - lower[:, i] * d[:, i - 1]) / den
    x = np.empty((N, K))
    x[:, -1] = d[:, -1]
    for i in range(K - 2, -1, -1):
        x[:, i] = d[:, i] - c[:, i] * x[:, i + 1]
    return x


def solve_elements(a_elem: np.ndarray, M: int, f=1.0) -> FESolution:
    """Solve with given element coefficients (shape (N, M))."""
    if M < 2:
        raise FieldError("need at least two elements")
    a = np.atleast_2d(np.asarray(a_elem, dtype=float))
    if np.any(a <= 0):
        raise FieldError("coefficient must be positive on every element")
    h = 1.0 / M
    diag = (a[:, :-1] + a[:, 1:]) / h
    off = -a[:, 1:-1] / h
    N = a.shape[0]
    lower = np.zeros((N, M - 1))
    upper = np.zeros((N, M - 1))
    lower[:, 1:] = off
    upper[:, :-1] = off
    rhs = np.broadcast_to(hat_moments(f, M), (N, M - 1))
    return FESolution(M, _thomas(lower, diag, upper, rhs))


def assemble_solve(field: CoefficientField, y, M: int, f=1.0) -> FESolution:
    """FE solution for a batch of parameter vectors y (shape (N, s))."""
    mid = (np.arange(M) + 0.5) / M
    a = eval_coeff(mid, np.atleast_2d(np.asarray(y, dtype=float)), field)
    return solve_elements(a, M, f)


def qoi(sol: FESolution, g=1.0) -> np.ndarray:
    """``G(u_h) = int_0^1 g u_h dx``, exact for polynomial g."""
    return sol.u @ hat_moments(g, sol.M)
