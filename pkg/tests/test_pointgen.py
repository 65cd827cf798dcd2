import time

import numpy as np
import pytest
from scipy.stats import qmc

from qmcpde.lattice import GeneratingVector, cbc_construct
from qmcpde.pointgen import (GrayCodeGenerator, SequenceExhausted, ShiftSet, apply_shift, columns_to_fixed,
                             digital_point, digital_points, estimate_with_shifts, fixed_to_float, interlace_bits,
                             lattice_point, lattice_points, lattice_seq_point, lattice_seq_points, map_lognormal,
                             map_uniform, radical_inverse)
from qmcpde.sobol import interlaced_sobol, sobol_columns
from qmcpde.weights import PODWeights



def identity_columns(m):
    """Column t carries row t+1, i.e. bit t."""
    return [1 << t for t in range(m)]


def test_lattice_point_examples():
    gv = GeneratingVector(8, [1, 5])
    np.testing.assert_array_equal(lattice_point(3, gv), [3 / 8, 7 / 8])
    np.testing.assert_array_equal(lattice_point(0, gv), [0, 0])
    assert sorted(lattice_points(GeneratingVector(4, [1]))[:, 0]) == [0, 0.25, 0.5, 0.75]
    np.testing.assert_array_equal(lattice_points(gv, 2, 3), [lattice_point(i, gv) for i in (2, 3, 4)])
    with pytest.raises(IndexError):
        lattice_point(8, gv)


def test_radical_inverse_and_van_der_corput():
    assert list(radical_inverse(np.arange(4), 2)) == [0, 2, 1, 3]
    seq = lattice_seq_points(GeneratingVector(16, [1]), 4, 0, 16)[:, 0]
    assert list(seq[:4]) == [0, 0.5, 0.25, 0.75]
    vdc = [int(radical_inverse(i, 4)) / 16 for i in range(16)]
    np.testing.assert_array_equal(seq, vdc)
    np.testing.assert_array_equal(lattice_seq_point(5, GeneratingVector(16, [1, 3]), 4),
                                  lattice_seq_points(GeneratingVector(16, [1, 3]), 4, 5, 1)[0])


def test_lattice_sequence_prefix_sets():
    rng = np.random.default_rng(0)
    for s in range(1, 6):
        z = [1] + [int(x) for x in 2 * rng.integers(0, 512, size=s - 1) + 1]
        gv = GeneratingVector(1024, z)
        for k in range(11):
            seq = lattice_seq_points(gv, 10, 0, 1 << k)
            ref = lattice_points(GeneratingVector(1 << k, [v % (1 << k) for v in z]))
            assert sorted(map(tuple, seq)) == sorted(map(tuple, ref))


def test_apply_shift():
    np.testing.assert_array_equal(apply_shift([0.75], [0.5]), [0.25])
    pts = lattice_points(GeneratingVector(16, [1, 7]))
    np.testing.assert_array_equal(apply_shift(pts, [0, 0]), pts)
    delta = np.array([0.3, 0.9])
    shifted = apply_shift(pts, delta)
    d0 = (pts[:, None, :] - pts[None, :, :]) % 1.0
    d1 = (shifted[:, None, :] - shifted[None, :, :]) % 1.0
    np.testing.assert_allclose(np.minimum(np.abs(d0 - d1), 1 - np.abs(d0 - d1)), 0, atol=1e-14)


def test_digital_point_examples():
    # C = [[0, 1], [1, 1]]: column 1 = (0, 1), column 2 = (1, 1), bit k = row k+1
    cols = [0b10, 0b11]
    assert [float(digital_point(i, [cols], 2)[0]) for i in range(4)] == [0, 0.25, 0.75, 0.5]
    m = 5
    pts = digital_points([identity_columns(m)] * 2, m)
    vdc = [int(radical_inverse(i, m)) / 2**m for i in range(2**m)]
    np.testing.assert_array_equal(pts[:, 0], vdc)
    np.testing.assert_array_equal(digital_point(0, [identity_columns(m)], m), [0.0])


def test_gray_code_walk():
    gen = GrayCodeGenerator([identity_columns(2)], 2)
    assert gen.take(4)[:, 0].tolist() == [0, 0.5, 0.75, 0.25]
    gen = GrayCodeGenerator([[0b101, 0b110]], 3)
    first, second = gen.next_point(), gen.next_point()
    assert first[0] == 0.0
    np.testing.assert_array_equal(second, fixed_to_float(columns_to_fixed([0b101], 3)))


@pytest.mark.parametrize("m", [1, 4, 10])
@pytest.mark.parametrize("s", [1, 5])
def test_gray_equals_direct_in_gray_order(m, s):
    mats = sobol_columns(s, m)
    direct = digital_points(mats, 64, fixed=True)
    gray = GrayCodeGenerator(mats, 64).take_fixed(1 << m)
    i = np.arange(1 << m)
    assert np.array_equal(gray, direct[i ^ (i >> 1)])
    assert sorted(map(tuple, gray)) == sorted(map(tuple, direct))


def test_offset_restart():
    mats = sobol_columns(4, 10)
    full = GrayCodeGenerator(mats, 64).take_fixed(1024)
    for k in (0, 1, 300, 512, 1023, 1024):
        a = GrayCodeGenerator(mats, 64).take_fixed(k)
        b = GrayCodeGenerator(mats, 64, offset=k).take_fixed(1024 - k)
        assert np.array_equal(np.vstack([a, b]), full)
    gen = GrayCodeGenerator(mats, 64)
    parts = [gen.take_fixed(c) for c in (7, 100, 0, 917)]
    assert np.array_equal(np.vstack(parts), full)
    with pytest.raises(SequenceExhausted):
        gen.take_fixed(1)


def test_sobol_matches_scipy():
    m, s = 12, 8
    ours = GrayCodeGenerator(sobol_columns(s, m), 64).take(1 << m)
    ref = qmc.Sobol(s, scramble=False, bits=64).random(1 << m)
    np.testing.assert_array_equal(ours, ref)


def test_interlaced_sobol_equals_bit_interlacing():
    alpha, bits, m = 2, 64, 7
    B = digital_points(interlaced_sobol(3, m, alpha, bits), 64, fixed=True)
    C = digital_points(sobol_columns(3 * alpha, m, bits // alpha), 64, fixed=True) >> np.uint64(64 - bits // alpha)
    for i in range(1 << m):
        for d in range(3):
            assert int(B[i, d]) == interlace_bits([int(C[i, alpha * d + a]) for a in range(alpha)], bits // alpha)


def test_interlace_bits_examples():
    assert interlace_bits([0b10, 0b11], 2) == 0b1101  # 13/16
    assert interlace_bits([1, 0, 1], 1) == 0b101  # 5/8
    assert interlace_bits([0b1011], 4) == 0b1011
    with pytest.raises(ValueError):
        interlace_bits([4], 2)


def test_fixed_point_conversion():
    assert fixed_to_float(np.array([np.iinfo(np.uint64).max], dtype=np.uint64))[0] < 1.0
    assert list(columns_to_fixed([0b1], 1)) == [1 << 63]
    assert list(columns_to_fixed([0b11], 2, precision=1)) == [1 << 63]


def test_maps():
    assert map_uniform([0.5])[0] == 0.0
    assert map_lognormal([0.5])[0] == 0.0
    assert map_lognormal([0.975])[0] == pytest.approx(1.959963984540054, abs=1e-12)
    with pytest.raises(ValueError):
        map_lognormal([0.0, 0.5])


def test_estimate_with_shifts():
    assert estimate_with_shifts([1, 3]) == (2.0, 1.0)
    assert estimate_with_shifts([0.3] * 5)[1] == 0.0
    with pytest.raises(ValueError):
        estimate_with_shifts([1.0])
    rng = np.random.default_rng(5)
    r, reps = 16, 2000
    ses = np.array([estimate_with_shifts(rng.standard_normal(r))[1] for _ in range(reps)])
    # E[se^2] = 1/r exactly; the sample mean of se^2 has sd sqrt(2/(r-1))/r/sqrt(reps)
    assert abs(np.mean(ses**2) - 1 / r) <= 3 * np.sqrt(2 / (r - 1)) / r / np.sqrt(reps)


def test_shifted_rule_is_unbiased():
    pts = lattice_points(cbc_construct(32, 3, PODWeights(np.zeros(4), np.ones(3))))
    shifts = ShiftSet(10**4, 3, seed=11).shifts
    q = np.array([apply_shift(pts, d)[:, 0].mean() for d in shifts])
    mean, se = estimate_with_shifts(q)
    assert abs(mean - 0.5) <= 4 * se
    np.testing.assert_array_equal(ShiftSet(4, 3, 1).shifts, ShiftSet(4, 3, 1).shifts)


def test_generation_throughput_scales_linearly():
    mats = sobol_columns(16, 20)

    def timed(n):
        best = np.inf
        for _ in range(5):
            t0 = time.perf_counter()
            GrayCodeGenerator(mats, 64).take_fixed(n)
            best = min(best, time.perf_counter() - t0)
        return best

    t1, t2 = timed(1 << 17), timed(1 << 18)
    assert 2 / 1.25 <= t2 / t1 <= 2 * 1.25
