"""
Unit Tests for the summaries package
"""

import numpy as np
import pytest
from scipy.stats import norm

from diffmath import ContractError
from summaries import (
    IntervalSet,
    central_interval,
    default_bins,
    hpd_intervals,
    mode_estimate,
    sample_mean,
    sample_moments,
)


def normal_grid(M: int) -> np.ndarray:
    """Deterministic standard-normal quantile grid"""
    return norm.ppf((np.arange(M) + 0.5) / M)


@pytest.fixture
def two_clusters():
    """40 points near 0 and 41 points near 10"""
    rng = np.random.default_rng(0)
    return np.concatenate([rng.uniform(-0.1, 0.1, 40), rng.uniform(9.9, 10.1, 41)])


class TestMoments:
    """Sample mean and unbiased variance"""

    def test_two_samples(self):
        """Test {1, 3} gives mean 2 and variance 2"""
        mean, var = sample_moments(np.array([[1.0], [3.0]]))
        assert mean.tolist() == [2.0] and var.tolist() == [2.0]

    def test_constant_samples_hit_floor(self):
        """Test identical samples report the floor"""
        _, var = sample_moments(np.full((5, 2), 4.0), floor=1e-8)
        np.testing.assert_array_equal(var, [1e-8, 1e-8])

    def test_standard_normal_draws(self):
        """Test 10^4 draws recover mean 0 and variance 1"""
        mean, var = sample_moments(np.random.default_rng(1).standard_normal((10_000, 1)))
        assert abs(mean[0]) < 0.05 and abs(var[0] - 1.0) < 0.05

    def test_batched_sets(self):
        """Test (N, M, d) inputs reduce over the sample axis"""
        samples = np.arange(24, dtype=float).reshape(2, 4, 3)
        mean, var = sample_moments(samples)
        assert mean.shape == (2, 3) and var.shape == (2, 3)
        np.testing.assert_allclose(sample_mean(samples), mean)

    def test_single_sample_rejected(self):
        """Test M = 1 has no variance"""
        with pytest.raises(ContractError):
            sample_moments(np.zeros((1, 2)))


class TestCentralInterval:
    """Equal-tailed empirical intervals"""

    def test_linear_quantiles(self):
        """Test {1..100} at level 0.5"""
        lo, hi = central_interval(np.arange(1.0, 101.0), 0.5)
        assert lo == pytest.approx(25.75) and hi == pytest.approx(75.25)

    def test_high_level_approaches_range(self):
        """Test level near 1 covers [min, max]"""
        values = np.random.default_rng(2).normal(size=200)
        lo, hi = central_interval(values, 1.0 - 1e-12)
        assert lo == pytest.approx(values.min(), abs=1e-8) and hi == pytest.approx(values.max(), abs=1e-8)

    def test_symmetric_samples(self):
        """Test symmetric samples give a symmetric interval"""
        half = np.random.default_rng(3).exponential(size=50)
        lo, hi = central_interval(np.concatenate([half, -half]), 0.9)
        assert lo == pytest.approx(-hi, abs=1e-12)

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.5])
    def test_level_bounds(self, level):
        """Test the level must lie strictly inside (0, 1)"""
        with pytest.raises(ContractError):
            central_interval(np.arange(5.0), level)


class TestHpdIntervals:
    """Histogram HPD regions"""

    def test_two_clusters_give_two_intervals(self, two_clusters):
        """Test one interval per cluster at level 0.75"""
        result = hpd_intervals(two_clusters, 0.75)
        assert len(result.intervals) == 2
        (lo1, hi1), (lo2, hi2) = result.intervals
        assert lo1 == two_clusters.min() and hi2 == two_clusters.max()
        assert hi1 < 5.0 < lo2
        assert result.achieved_mass >= 0.75

    def test_unimodal_matches_central_interval(self):
        """Test a symmetric unimodal set yields one interval near the central one"""
        values = normal_grid(1000)
        result = hpd_intervals(values, 0.95)
        width = (values.max() - values.min()) / default_bins(values.size)
        assert len(result.intervals) == 1
        lo, hi = central_interval(values, 0.95)
        assert abs(result.intervals[0][0] - lo) <= width + 1e-9
        assert abs(result.intervals[0][1] - hi) <= width + 1e-9

    def test_level_near_one_spans_range(self):
        """Test level close to 1 covers everything"""
        values = normal_grid(400)
        result = hpd_intervals(values, 0.9999)
        assert result.intervals == [(values.min(), values.max())]
        assert result.achieved_mass == 1.0

    def test_constant_samples(self):
        """Test identical samples give a point interval"""
        result = hpd_intervals(np.full(20, 2.5), 0.9)
        assert result.intervals == [(2.5, 2.5)] and result.total_length == 0.0

    def test_contains_and_serialization(self, two_clusters):
        """Test membership and the dict form"""
        result = hpd_intervals(two_clusters, 0.75)
        assert result.contains(0.0) and result.contains(10.0) and not result.contains(5.0)
        assert result.to_dict()["level"] == 0.75

    def test_too_few_samples(self):
        """Test fewer than 10 samples"""
        with pytest.raises(ContractError):
            hpd_intervals(np.arange(9.0), 0.5)

    def test_overlapping_intervals_rejected(self):
        """Test IntervalSet validates ordering"""
        with pytest.raises(ContractError):
            IntervalSet([(0.0, 2.0), (1.0, 3.0)], 0.5, 0.6)


class TestModeEstimate:
    """Histogram mode"""

    def test_constant_samples(self):
        """Test every sample equal to c"""
        assert mode_estimate(np.full(12, -3.0)) == -3.0

    def test_larger_cluster_wins(self, two_clusters):
        """Test the 41-point cluster beats the 40-point one"""
        width = (two_clusters.max() - two_clusters.min()) / default_bins(two_clusters.size)
        assert abs(mode_estimate(two_clusters) - 10.0) < width

    def test_standard_normal_grid(self):
        """Test 10^4 normal quantiles with 50 bins"""
        assert abs(mode_estimate(normal_grid(10_000), bins=50)) < 0.2

    def test_ties_go_to_lower_bin(self):
        """Test equal counts resolve to the lowest bin"""
        values = np.concatenate([np.zeros(5), np.full(5, 9.0)])
        assert mode_estimate(values, bins=3) == pytest.approx(1.5)
