"""
Tests for the paired statistics and curve utilities.
"""

import itertools

import numpy as np
import pytest
import scipy.stats

from ensemble_vqe.exceptions import SizeLimitError, UndefinedTestError, ValidationError
from ensemble_vqe.statistics import (
    area_under_curve,
    benjamini_hochberg,
    bootstrap_band,
    compare_methods,
    gaussian_smooth,
    wilcoxon_signed_rank,
)

SMALLEST_P_TEN = 2.0 / 2 ** 10


def brute_force_wilcoxon(d):
    """Two-sided exact p-value by enumerating every sign assignment"""
    d = np.asarray(d, dtype=float)
    ranks = scipy.stats.rankdata(np.abs(d))
    observed = np.sum(ranks[d > 0])
    null = [
        sum(r for r, s in zip(ranks, signs) if s > 0)
        for signs in itertools.product((-1, 1), repeat=d.size)
    ]
    null = np.array(null)
    tail = min(np.mean(null <= observed), np.mean(null >= observed))
    return min(1.0, 2.0 * tail)


# ============================================
# Wilcoxon
# ============================================

class TestWilcoxon:
    """Test the exact signed-rank test"""

    def test_ten_positive_differences(self):
        statistic, p = wilcoxon_signed_rank(np.linspace(0.1, 1.0, 10))
        assert statistic == 0.0
        assert p == pytest.approx(SMALLEST_P_TEN, rel=1e-12)

    def test_ten_negative_differences(self):
        _, p = wilcoxon_signed_rank(-np.linspace(0.1, 1.0, 10))
        assert p == pytest.approx(SMALLEST_P_TEN, rel=1e-12)

    def test_single_pair(self):
        statistic, p = wilcoxon_signed_rank([0.3])
        assert p == 1.0
        assert statistic == 0.0

    def test_single_pair_after_dropping_zeros(self):
        assert wilcoxon_signed_rank([0.0, -0.8, 0.0]) == (0.0, 1.0)

    def test_largest_exact_sample(self):
        """Twenty-five one-directional differences at the exact-enumeration limit"""
        statistic, p = wilcoxon_signed_rank(np.linspace(0.1, 2.5, 25))
        assert statistic == 0.0
        assert p == 2.0 / 2 ** 25

    def test_ties_match_enumeration(self):
        d = [1.0, -1.0, 2.0, 2.0, -3.0, 0.5]
        statistic, p = wilcoxon_signed_rank(d)
        assert statistic == 8.5
        assert p == pytest.approx(brute_force_wilcoxon(d), rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_random_samples_match_enumeration(self, seed):
        d = np.random.default_rng(seed).normal(size=12)
        _, p = wilcoxon_signed_rank(d)
        assert p == pytest.approx(brute_force_wilcoxon(d), rel=1e-12)

    def test_matches_enumeration(self):
        d = [0.5, -1.2, 2.0, 3.1, -0.7]
        statistic, p = wilcoxon_signed_rank(d)
        assert statistic == 5.0
        assert p == pytest.approx(brute_force_wilcoxon(d), rel=1e-12)

    def test_zeros_are_dropped(self):
        _, p_with = wilcoxon_signed_rank([0.0, 0.5, -1.2, 2.0, 3.1, -0.7, 0.0])
        _, p_without = wilcoxon_signed_rank([0.5, -1.2, 2.0, 3.1, -0.7])
        assert p_with == p_without

    def test_all_zero(self):
        with pytest.raises(UndefinedTestError):
            wilcoxon_signed_rank(np.zeros(6))

    def test_too_many_pairs(self):
        with pytest.raises(SizeLimitError):
            wilcoxon_signed_rank(np.arange(1, 27, dtype=float))


# ============================================
# Benjamini-Hochberg
# ============================================

class TestBenjaminiHochberg:
    """Test step-up adjustment"""

    def test_scan_of_small_p_values(self):
        p = [SMALLEST_P_TEN] * 23 + [0.2, 0.5, 0.9]
        adjusted, flags = benjamini_hochberg(p)
        assert adjusted.min() == pytest.approx(SMALLEST_P_TEN * 26 / 23, rel=1e-12)
        assert int(flags.sum()) == 23
        assert not flags[-1]

    def test_equal_p_values_unchanged(self):
        adjusted, _ = benjamini_hochberg([0.03] * 4)
        assert np.allclose(adjusted, 0.03)

    def test_single_p_value(self):
        adjusted, flags = benjamini_hochberg([0.04])
        assert adjusted[0] == pytest.approx(0.04)
        assert flags[0]

    def test_monotone_in_raw_order(self):
        p = [0.01, 0.04, 0.03, 0.2]
        adjusted, _ = benjamini_hochberg(p, q=0.1)
        order = np.argsort(p)
        assert np.all(np.diff(adjusted[order]) >= 0)
        assert np.all(adjusted >= np.array(p))

    def test_out_of_range(self):
        with pytest.raises(ValidationError):
            benjamini_hochberg([0.5, 1.2])
        with pytest.raises(ValidationError):
            benjamini_hochberg([])


# ============================================
# Bootstrap
# ============================================

class TestBootstrap:
    """Test percentile bands"""

    def test_identical_trials(self):
        band = bootstrap_band(np.tile([1.0, 2.0, 3.0], (4, 1)), seed=0)
        assert np.array_equal(band.lower, band.upper)
        assert np.array_equal(band.mean, [1.0, 2.0, 3.0])

    def test_binary_trials_stay_in_range(self, rng):
        curves = rng.integers(0, 2, size=(10, 5)).astype(float)
        band = bootstrap_band(curves, resamples=500, seed=1)
        assert np.all(band.lower >= 0.0) and np.all(band.upper <= 1.0)
        assert np.all(band.lower <= band.upper)

    def test_seeded(self, rng):
        curves = rng.normal(size=(8, 4))
        a = bootstrap_band(curves, resamples=300, seed=5)
        b = bootstrap_band(curves, resamples=300, seed=5)
        assert np.array_equal(a.lower, b.lower) and np.array_equal(a.upper, b.upper)
        assert a.resamples == 300

    def test_single_trial(self):
        with pytest.raises(ValidationError):
            bootstrap_band(np.ones((1, 3)))


# ============================================
# Curves
# ============================================

class TestCurves:
    """Test smoothing and the trapezoidal area"""

    def test_zero_sigma_copies(self):
        curve = np.array([1.0, 3.0, 2.0])
        out = gaussian_smooth(curve, 0.0)
        assert np.array_equal(out, curve) and out is not curve

    def test_constant_curve(self):
        assert np.allclose(gaussian_smooth(np.full(12, 0.7), 1.5), 0.7)

    def test_impulse_response(self):
        impulse = np.zeros(41)
        impulse[20] = 1.0
        offsets = np.arange(-8, 9)
        kernel = np.exp(-0.5 * (offsets / 2.0) ** 2)
        expected = np.zeros(41)
        expected[12:29] = kernel / kernel.sum()
        assert np.allclose(gaussian_smooth(impulse, 2.0), expected, atol=1e-10)

    def test_negative_sigma(self):
        with pytest.raises(ValidationError):
            gaussian_smooth([1.0, 2.0], -1.0)

    def test_area(self):
        assert area_under_curve([0.0, 1.0, 2.0], [0.0, 1.0, 2.0]) == 2.0
        assert area_under_curve([0.5], [110.0]) == 0.0

    def test_area_mismatch(self):
        with pytest.raises(ValidationError):
            area_under_curve([1.0, 2.0], [0.0])


# ============================================
# Method Comparison
# ============================================

class TestCompareMethods:
    """Test the paired report"""

    def test_consistently_worse(self, rng):
        b = rng.uniform(0.0, 0.1, size=(10, 3))
        report = compare_methods(b + 1.0, b, [0.0, 1.0, 2.0], "weighted", "equi", seed=0)
        assert report.trials == 10
        assert report.auc_p_value == pytest.approx(SMALLEST_P_TEN, rel=1e-12)
        assert all(t.p_value == pytest.approx(SMALLEST_P_TEN, rel=1e-12) for t in report.point_tests)
        assert all(t.significant for t in report.point_tests)
        assert report.band is not None
        assert np.all(np.array(report.band.lower) > 0.99)

    def test_identical_methods(self, rng):
        a = rng.uniform(size=(4, 2))
        report = compare_methods(a, a.copy(), [1.0, 2.0])
        assert report.auc_statistic is None and report.auc_p_value is None
        for test in report.point_tests:
            assert test.statistic is None
            assert test.p_value == 1.0
            assert not test.significant

    def test_single_trial_has_no_band(self):
        report = compare_methods([[0.2, 0.3]], [[0.1, 0.1]], [0.0, 1.0])
        assert report.band is None
        assert report.point_tests[0].p_value == 1.0

    def test_mismatched_shapes(self):
        with pytest.raises(ValidationError):
            compare_methods(np.ones((3, 2)), np.ones((3, 3)), [0.0, 1.0])
        with pytest.raises(ValidationError):
            compare_methods(np.ones((3, 2)), np.ones((3, 2)), [0.0, 1.0, 2.0])


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, '-v', '--cov=ensemble_vqe', '--cov-report=html'])
