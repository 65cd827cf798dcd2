import itertools
import math

import mpmath
import numpy as np
import pytest
from scipy.stats import norm

from qmcpde.lattice import cbc_construct
from qmcpde.weights import (PowerDecay, SPODWeights, WeightError, WeightParams, alpha_j, choose_lambda,
                            choose_lambda_p0, combinatorial_identities_check, fubini_lambda, pod_weights,
                            rho_interlaced, rho_lattice, rho_lognormal, rho_lognormal_alt, spod_weights,
                            stechkin_tail)


@pytest.mark.parametrize("d2, lam", [(3.0, 4 / 7), (1.375, 4 / 7), (1.2, 5 / 7), (2.0, 4 / 7)])
def test_choose_lambda(d2, lam):
    assert choose_lambda(d2, 0.125) == pytest.approx(lam, rel=1e-15)


def test_choose_lambda_p0_branches():
    assert choose_lambda_p0(0.5, 0.125) == pytest.approx(4 / 7)
    assert choose_lambda_p0(0.8) == pytest.approx(0.8 / 1.2)
    with pytest.raises(WeightError):
        choose_lambda_p0(1.0)


def test_rho_lattice_values():
    assert rho_lattice(1.0) == pytest.approx(1 / 6, rel=1e-15)
    ref = 2 * float(mpmath.zeta(1.5)) / (2 * math.pi**2) ** 0.75
    assert rho_lattice(0.75) == pytest.approx(ref, rel=1e-13)
    vals = [rho_lattice(0.5 + 10.0**-k) for k in range(1, 6)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(WeightError):
        rho_lattice(0.5)


def test_rho_lognormal_values():
    a = 0.3
    ref = 2 * (math.sqrt(2 * math.pi) * math.exp(4 * a * a) / (math.pi**1.5 * 0.75 * 0.25)) * float(mpmath.zeta(1.5))
    assert rho_lognormal(1.0, a) == pytest.approx(ref, rel=1e-13)
    grid = [rho_lognormal(0.8, x) for x in np.linspace(0.01, 2, 20)]
    assert all(x < y for x, y in zip(grid, grid[1:]))
    assert 0 < rho_lognormal(0.8, 1e-12) < math.inf


def test_rho_lognormal_alt_values():
    ref = 2 * (math.sqrt(2 * math.pi) / (math.pi**1.5 * 0.75 * 0.25)) * float(mpmath.zeta(1.5))
    assert rho_lognormal_alt(1.0, 0.25) == pytest.approx(ref, rel=1e-13)
    assert math.isfinite(rho_lognormal_alt(1.0, 0.4))
    assert rho_lognormal_alt(1.0, 1e-6) > rho_lognormal_alt(1.0, 1e-3)


def test_rho_interlaced_values():
    assert rho_interlaced(2, 1.0) == pytest.approx(2.5, rel=1e-15)
    assert rho_interlaced(3, 1.0) == pytest.approx(127 / 27, rel=1e-14)
    vals = [rho_interlaced(2, lam) for lam in (0.9, 0.75, 0.6, 0.55, 0.51)]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    with pytest.raises(WeightError):
        rho_interlaced(1, 1.0)


def test_alpha_j_values():
    assert alpha_j(0.0, 1.0) == pytest.approx(math.sqrt(0.5) / 2, rel=1e-15)
    assert alpha_j(1.0, 1.0) == pytest.approx((1 + math.sqrt(1.5)) / 2, rel=1e-15)
    for x in (0.0, 0.1, 3.0, 100.0):
        assert alpha_j(x, 0.7) - x > 0


def test_uniform_pod_weight_example():
    w = pod_weights(WeightParams(s=1, B=[0.5]), lam=1.0)
    assert w.gamma([1]) == pytest.approx(0.5 * math.sqrt(6), rel=1e-14)
    assert w.gamma([]) == 1.0


def _paper_script_weight(u, B, lam, a1, a2, a3, d1, case):
    """The weight formula of the construction scripts, evaluated term by term."""
    order = (math.factorial(len(u) + a1) / math.factorial(a1)) ** d1
    prod = 1.0
    for j in u:
        b = B[j - 1]
        if case == "uniform":
            prod *= a2 * b / math.sqrt(2 * float(mpmath.zeta(2 * lam)) / (2 * math.pi**2) ** lam)
        else:
            x = a3 * b
            aj = 0.5 * (x + math.sqrt(x * x + 1 - 1 / (2 * lam)))
            eta = (2 * lam - 1) / (4 * lam)
            rho = 2 * (math.sqrt(2 * math.pi) * math.exp(aj**2 / eta)
                       / (math.pi ** (2 - 2 * eta) * (1 - eta) * eta)) ** lam * float(mpmath.zeta(lam + 0.5))
            prod *= a2 * b / (2 * math.exp(x * x / 2) * norm.cdf(x) * math.sqrt((aj - x) * rho))
    return (order * prod) ** (2 / (1 + lam))


@pytest.mark.parametrize("case, a1, a3", [("uniform", 0, 0.0), ("uniform", 5, 0.0), ("lognormal", 0, 1.0),
                                          ("lognormal", 5, 9.0)])
def test_pod_weights_match_script_formula(case, a1, a3):
    s = 5
    B = 0.1 * np.arange(1, s + 1, dtype=float) ** -3
    params = WeightParams(s=s, B=B, a1=a1, a2=2.0, a3=a3, d1=1.0, d2=3.0)
    w = pod_weights(params, case=case)
    for size in range(1, s + 1):
        for u in itertools.combinations(range(1, s + 1), size):
            ref = _paper_script_weight(u, B, w.lam, a1, 2.0, a3, 1.0, case)
            assert w.gamma(u) == pytest.approx(ref, rel=1e-12)


def test_multilevel_order_ratio():
    lam = 0.8
    w = pod_weights(WeightParams(s=3, B=[0.5, 0.2, 0.1], a1=5), lam=lam)
    assert w.order[2] / w.order[1] == pytest.approx(7 ** (2 / (1 + lam)), rel=1e-13)
    assert w.order[0] == pytest.approx(1.0)


def test_spod_weight_example_and_enumeration():
    w = spod_weights(WeightParams(s=1, B=[0.5], alpha=2))
    assert w.gamma([1]) == pytest.approx(1.5, rel=1e-15)
    s, alpha = 4, 3
    B = np.array([0.6, 0.3, 0.2, 0.1])
    w = spod_weights(WeightParams(s=s, B=B, alpha=alpha, a1=2, a2=1.5))
    for size in range(1, s + 1):
        for u in itertools.combinations(range(1, s + 1), size):
            ref = 0.0
            for nu in itertools.product(range(1, alpha + 1), repeat=size):
                term = math.factorial(sum(nu) + 2) / math.factorial(2)
                for j, v in zip(u, nu):
                    term *= (2 if v == alpha else 1) * (1.5 * B[j - 1]) ** v
                ref += term
            assert w.gamma(u) == pytest.approx(ref, rel=1e-12)


def test_spod_nu_dependent_bounds():
    B = np.array([[0.5, 0.25], [0.2, 0.1]])
    w = spod_weights(WeightParams(s=2, B=B, alpha=2))
    assert w.gamma([1]) == pytest.approx(1 * 0.5 + 2 * 2 * 0.25**2)
    assert w.dim_nu[1, 1] == pytest.approx(2 * 0.1**2)


def test_a1_normalization_leaves_cbc_unchanged():
    """Dividing the order factors by a1! rescales every nonempty weight alike."""
    s = 6
    B = 0.3 * np.arange(1, s + 1, dtype=float) ** -2
    w = pod_weights(WeightParams(s=s, B=B, a1=3))
    unnormalized = w.scaled(math.factorial(3) ** (2 / (1 + w.lam)))
    assert cbc_construct(64, s, w).z == cbc_construct(64, s, unnormalized).z


def test_fubini_numbers():
    assert [fubini_lambda(n) for n in range(6)] == [1, 1, 3, 13, 75, 541]
    assert fubini_lambda(4) <= 24 / math.log(2) ** 4
    for n in range(21):
        assert fubini_lambda(n) <= math.factorial(n) / math.log(2) ** n
    with pytest.raises(ValueError):
        fubini_lambda(-1)


def test_stechkin_tail_dominates_true_tail():
    N = 10**6
    B = np.arange(1, N + 1, dtype=float) ** -2
    tails = np.cumsum(B[::-1])[::-1]
    for p0 in (0.55, 0.6, 0.75):
        for s in (1, 2, 5, 10, 100, 1000):
            true_tail = tails[s] + 1.0 / N
            assert stechkin_tail(B, p0, s) >= true_tail


def test_stechkin_tail_rate():
    rule = PowerDecay(1.0, 2.0)
    p0 = 0.6
    s = np.array([1e2, 1e3, 1e4, 1e5])
    vals = [stechkin_tail(rule, p0, int(x)) for x in s]
    slope = np.polyfit(np.log(s), np.log(vals), 1)[0]
    assert slope == pytest.approx(-(1 / p0 - 1), rel=0.02)
    with pytest.raises(WeightError):
        stechkin_tail(PowerDecay(1.0, 1.5), 0.6, 10)


def test_combinatorial_identities():
    assert sum(math.comb(1, a) * math.comb(1, b) * math.factorial(a + b) * math.factorial(2 - a - b)
               for a in (0, 1) for b in (0, 1)) == 6
    assert combinatorial_identities_check((1, 1))
    assert combinatorial_identities_check((0,))
    assert combinatorial_identities_check((2, 1, 1))
    for nu in itertools.product(range(4), repeat=3):
        assert combinatorial_identities_check(nu)


@pytest.mark.parametrize("kwargs", [dict(B=[0.5, -1.0]), dict(B=[0.5]), dict(B=[0.5, 0.1], d2=1.0),
                                    dict(B=[0.5, 0.1], a1=1.5), dict(B=[0.5, 0.1], delta=0.5),
                                    dict(B=[0.5, 0.1], a2=0.0)])
def test_weight_params_validation(kwargs):
    with pytest.raises(WeightError):
        WeightParams(s=2, **kwargs)


def test_weights_monotone_in_B():
    base = pod_weights(WeightParams(s=3, B=[0.5, 0.2, 0.1]), lam=0.8)
    bigger = pod_weights(WeightParams(s=3, B=[0.6, 0.2, 0.1]), lam=0.8)
    assert bigger.gamma([1, 2]) > base.gamma([1, 2])
    assert bigger.gamma([2, 3]) == pytest.approx(base.gamma([2, 3]))


def test_spod_scaled_and_shape_check():
    w = spod_weights(WeightParams(s=2, B=[0.5, 0.2], alpha=2))
    assert w.scaled(3.0).gamma([1, 2]) == pytest.approx(3 * w.gamma([1, 2]))
    with pytest.raises(WeightError):
        SPODWeights(2, np.zeros(5), np.ones((2, 3)))
