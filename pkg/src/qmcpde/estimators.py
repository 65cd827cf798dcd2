"""Single- and multi-level QMC estimators for the 1D model problem, plus rate studies."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .pde import CoefficientField, assemble_solve, qoi
from .pointgen import apply_shift, estimate_with_shifts, map_lognormal, map_uniform


@dataclass
class EstimatorReport:
    estimate: float
    stderr: float
    shift_values: np.ndarray
    level_means: list = field(default_factory=list)
    level_stderrs: list = field(default_factory=list)
    level_variances: list = field(default_factory=list)
    slopes: dict = field(default_factory=dict)


def shift_generator(seed: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for the shifts of one estimator stream (level)."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(stream,))))


def draw_shifts(r: int, s: int, seed: int, stream: int = 0) -> np.ndarray:
    return shift_generator(seed, stream).random((r, s))


def to_parameters(t: np.ndarray, kind: str) -> np.ndarray:
    return map_uniform(t) if kind == "uniform" else map_lognormal(t)


def pde_integrand(field: CoefficientField, M: int, f=1.0, g=1.0) -> Callable[[np.ndarray], np.ndarray]:
    """Map unit-cube points (N, >= s) to QoI values ``G(u_h^s(y))``."""
    s = field.s

    def F(t: np.ndarray) -> np.ndarray:
        y = to_parameters(t[:, :s], field.kind)
        return qoi(assemble_solve(field, y, M, f), g)

    return F


def _check_points(points: np.ndarray, s: int) -> np.ndarray:
    points = np.asarray(points, dtype=float)
    if points.ndim != 2 or points.shape[1] < s:
        raise ValueError(f"rule dimension {points.shape[1] if points.ndim == 2 else 0} < s = {s}")
    return points


def shifted_values(F, points: np.ndarray, shifts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-shift rule averages and all integrand samples (shape (r, n))."""
    samples = np.stack([F(apply_shift(points[:, : shifts.shape[1]], d)) for d in shifts])
    return samples.mean(axis=1), samples


def single_level_estimate(field: CoefficientField, M: int, points: np.ndarray, r: int = 16,
                          seed: int = 0, randomized: bool = True, f=1.0, g=1.0) -> EstimatorReport:
    """QMC estimate of ``E[G(u_h^s)]`` with an n-point rule given as an (n, >= s) array."""
    s = field.s
    points = _check_points(points, s)
    F = pde_integrand(field, M, f, g)
    if not randomized:
        vals = F(points[:, :s])
        est = float(np.mean(vals))
        return EstimatorReport(est, float("nan"), np.array([est]))
    q, _ = shifted_values(F, points, draw_shifts(r, s, seed))
    mean, se = estimate_with_shifts(q)
    return EstimatorReport(mean, se, q)


@dataclass(frozen=True)
class Level:
    points: np.ndarray
    s: int
    M: int


def validate_levels(levels: Sequence[Level]) -> None:
    for a, b in zip(levels, levels[1:]):
        if b.s < a.s or b.M < a.M:
            raise ValueError("levels must have non-decreasing s and mesh resolution")
    for lv in levels:
        _check_points(lv.points, lv.s)


def multi_level_estimate(field: CoefficientField, levels: Sequence[Level], r: int = 16,
                         seed: int = 0, randomized: bool = True, f=1.0, g=1.0,
                         independent_shifts: bool = True) -> EstimatorReport:
    """Telescoping sum of QMC estimates of ``G(u_l) - G(u_{l-1})`` with coupled parameters.

    The coarse term of level l reuses the level's parameter vector truncated to
    s_{l-1}; level 0 subtracts zero. Each level draws its own shifts unless
    ``independent_shifts`` is False (then all levels reuse stream 0).
    """
    validate_levels(levels)
    means, ses, variances, per_shift = [], [], [], []
    for ell, lv in enumerate(levels):
        fine = pde_integrand(field.truncated(lv.s), lv.M, f, g)
        if ell == 0:
            F = fine
        else:
            prev = levels[ell - 1]
            coarse = pde_integrand(field.truncated(prev.s), prev.M, f, g)
            F = lambda t, fine=fine, coarse=coarse: fine(t) - coarse(t)
        if randomized:
            shifts = draw_shifts(r, lv.s, seed, ell if independent_shifts else 0)
            q, samples = shifted_values(F, lv.points, shifts)
            m, se = estimate_with_shifts(q)
        else:
            samples = F(lv.points[:, : lv.s])[None, :]
            q = samples.mean(axis=1)
            m, se = float(q[0]), float("nan")
        means.append(m)
        ses.append(se)
        variances.append(float(np.var(samples)))
        per_shift.append(q)
    est = float(math.fsum(means))
    se = math.sqrt(sum(x * x for x in ses)) if randomized else float("nan")
    total = np.sum(np.stack(per_shift), axis=0) if len({len(q) for q in per_shift}) == 1 else np.array([est])
    return EstimatorReport(est, se, total, means, ses, variances)


def fit_rate(n_values, errors) -> float:
    """Least-squares slope of log2(error) against log2(n)."""
    n_values = np.asarray(n_values, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if n_values.shape[0] < 3:
        raise ValueError("need at least three points for a rate fit")
    if np.any(errors <= 0):
        raise ValueError("errors must be positive for a log fit")
    return float(np.polyfit(np.log2(n_values), np.log2(errors), 1)[0])


@dataclass
class ConvergenceRow:
    n: int
    estimate: float
    stderr: float
    error: float


def convergence_study(F, rule_for_n: Callable[[int], np.ndarray], n_values, s: int,
                      r: int = 16, seed: int = 0, exact: float | None = None,
                      randomized: bool = True) -> tuple[list[ConvergenceRow], float]:
    """Error per n and the fitted log2 slope.

    Randomized: error is the RMS deviation of single-shift estimates from
    ``exact`` when given, otherwise the standard error. Deterministic: absolute
    error against ``exact`` (required).
    """
    rows = []
    for i, n in enumerate(n_values):
        pts = _check_points(rule_for_n(n), s)
        if randomized:
            q, _ = shifted_values(F, pts, draw_shifts(r, s, seed, i))
            m, se = estimate_with_shifts(q)
            err = math.sqrt(float(np.mean((q - exact) ** 2))) if exact is not None else se
        else:
            if exact is None:
                raise ValueError("deterministic study needs the exact value")
            m = float(np.mean(F(pts[:, :s])))
            se = float("nan")
            err = abs(m - exact)
        rows.append(ConvergenceRow(int(n), m, se, err))
    return rows, fit_rate([row.n for row in rows], [row.error for row in rows])


def monte_carlo_study(F, n_values, s: int, r: int = 16, seed: int = 0,
                      exact: float | None = None) -> tuple[list[ConvergenceRow], float]:
    """Plain Monte Carlo control: r independent point sets of size n per n."""
    rows = []
    for n in n_values:
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(int(n),))))
        q = np.array([float(np.mean(F(rng.random((n, s))))) for _ in range(r)])
        m, se = estimate_with_shifts(q)
        err = math.sqrt(float(np.mean((q - exact) ** 2))) if exact is not None else se
        rows.append(ConvergenceRow(int(n), m, se, err))
    return rows, fit_rate([row.n for row in rows], [row.error for row in rows])


def truncation_study(field: CoefficientField, s_list, reference_s: int, points: np.ndarray,
                     M: int = 32, f=1.0, g=1.0) -> tuple[np.ndarray, float]:
    """``|I(G(u^s)) - I(G(u^ref))|`` for each s, with one fixed rule, and the log-log slope.

    Both integrals use the same points; each point y is paired with -y
    (reflection t -> 1 - t), which removes the odd part of the truncation
    error that the QMC rule would otherwise leave as noise.
    """
    points = _check_points(points, reference_s)[:, :reference_s]
    t = np.vstack([points, (1.0 - points) % 1.0])
    ref = float(np.mean(pde_integrand(field.truncated(reference_s), M, f, g)(t)))
    diffs = []
    for s in s_list:
        val = float(np.mean(pde_integrand(field.truncated(s), M, f, g)(t[:, :s])))
        diffs.append(abs(val - ref))
    diffs = np.array(diffs)
    s_arr = np.asarray(s_list, dtype=float)
    keep = diffs > 0
    slope = float(np.polyfit(np.log(s_arr[keep]), np.log(diffs[keep]), 1)[0]) if keep.sum() >= 2 else float("nan")
    return diffs, slope


def plan_levels(eps: float, level_constants, costs, rate: float = 1.0) -> list[int]:
    """Propose n_l minimising total cost ``sum C_l n_l`` subject to ``sum V_l n_l^(-2 rate) = eps^2 / 2``.

    ``V_l`` is the constant in the level mean-square error ``V_l n_l^(-2 rate)``
    (rate 1/2 is plain Monte Carlo). The Lagrange conditions give
    ``n_l = kappa (V_l / C_l)^(1/(2 rate + 1))``. Values are proposals only.
    """
    V = np.asarray(level_constants, dtype=float)
    C = np.asarray(costs, dtype=float)
    if eps <= 0 or rate <= 0 or np.any(V < 0) or np.any(C <= 0):
        raise ValueError("need eps > 0, rate > 0, V >= 0, C > 0")
    a = (V / C) ** (1.0 / (2.0 * rate + 1.0))
    pos = V > 0
    kappa = (2.0 / eps**2 * float(np.sum(V[pos] * a[pos] ** (-2.0 * rate)))) ** (1.0 / (2.0 * rate))
    return [max(1, math.ceil(kappa * x)) for x in a]
