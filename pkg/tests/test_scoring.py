"""
Unit Tests for the scoring package
Energy Scores, Gaussian NLL, beta-NLL and RMSE
"""

import itertools
import math

import numpy as np
import pytest

from diffmath import ConfigError, DomainError, Rng, ShapeError, Tensor
from scoring import (
    BaselineConfig,
    LossConfig,
    beta_nll,
    energy_score,
    gaussian_nll,
    gaussian_samples,
    minibatch_energy_score,
    rmse,
)
from tests.gradcheck import check_gradients, reverse_gradients

HALF_LOG_2PI = 0.5 * math.log(2 * math.pi)


def energy_oracle(samples: np.ndarray, target: np.ndarray) -> float:
    """Double-loop Energy Score of one input"""
    M = samples.shape[0]
    first = sum(np.linalg.norm(samples[i] - target) for i in range(M)) / M
    second = sum(np.linalg.norm(samples[i] - samples[j]) for i in range(M) for j in range(M)) / (2 * M * M)
    return first - second


class TestLossConfigs:
    """Validation of loss settings"""

    def test_defaults(self):
        """Test K follows M and the entropic strength default"""
        cfg = LossConfig(M=50)
        assert cfg.K == 50 and cfg.L == 1 and cfg.epsilon == 0.0025

    @pytest.mark.parametrize(
        "values",
        [{"M": 50, "K": 100}, {"L": 0}, {"eta": -0.1}, {"epsilon": 0.0}, {"prior": "laplace"}],
    )
    def test_invalid_values(self, values):
        """Test each invariant is enforced"""
        with pytest.raises(ConfigError):
            LossConfig(**values)

    def test_unknown_keys_rejected(self):
        """Test from_dict refuses typos"""
        with pytest.raises(ConfigError):
            LossConfig.from_dict({"etta": 1.0})

    def test_beta_range(self):
        """Test beta outside [0, 1]"""
        with pytest.raises(ConfigError):
            BaselineConfig(beta=1.5)


class TestEnergyScore:
    """Full-sample Energy Score"""

    def test_samples_equal_target(self):
        """Test ES is zero when every sample hits the target"""
        samples = np.full((3, 5, 2), 1.5)
        assert energy_score(samples, np.full((3, 2), 1.5)).item() == 0.0

    def test_single_sample_is_mean_distance(self):
        """Test M = 1 reduces to the mean Euclidean error"""
        samples = np.array([[[3.0, 4.0]], [[1.0, 0.0]]])
        targets = np.zeros((2, 2))
        assert energy_score(samples, targets).item() == pytest.approx(3.0, abs=1e-12)

    def test_symmetric_pair(self):
        """Test y = 0, samples {-1, +1} gives 1 - 0.5"""
        samples = np.array([[[-1.0], [1.0]]])
        assert energy_score(samples, np.zeros((1, 1))).item() == pytest.approx(0.5, abs=1e-12)

    def test_matches_double_loop(self):
        """Test against a per-input oracle"""
        rng = np.random.default_rng(4)
        samples, targets = rng.normal(size=(4, 6, 3)), rng.normal(size=(4, 3))
        expected = np.mean([energy_oracle(samples[n], targets[n]) for n in range(4)])
        assert energy_score(samples, targets).item() == pytest.approx(expected, abs=1e-12)

    def test_translation_invariance(self):
        """Test shifting samples and targets together"""
        rng = np.random.default_rng(5)
        samples, targets = rng.normal(size=(3, 7, 2)), rng.normal(size=(3, 2))
        shift = np.array([4.0, -2.5])
        moved = energy_score(samples + shift, targets + shift).item()
        assert moved == pytest.approx(energy_score(samples, targets).item(), abs=1e-12)

    def test_shape_mismatch(self):
        """Test mismatched target dimension"""
        with pytest.raises(ShapeError):
            energy_score(np.zeros((2, 3, 2)), np.zeros((2, 3)))

    def test_strictly_proper_on_gaussian(self):
        """Test the true distribution scores best on average"""
        rng = np.random.default_rng(0)
        n, M = 10_000, 20
        targets = rng.normal(size=(n, 1))
        candidates = {
            "true": rng.normal(size=(n, M, 1)),
            "shifted": rng.normal(loc=1.0, size=(n, M, 1)),
            "wide": rng.normal(scale=2.0, size=(n, M, 1)),
        }
        per_input = {}
        for name, samples in candidates.items():
            first = np.abs(samples - targets[:, None, :]).mean(axis=(1, 2))
            second = np.abs(samples[:, :, None, 0] - samples[:, None, :, 0]).sum(axis=(1, 2)) / (2 * M * M)
            per_input[name] = first - second
        assert per_input["true"].mean() == pytest.approx(
            energy_score(candidates["true"], targets).item(), rel=1e-9
        )
        for other in ("shifted", "wide"):
            diff = per_input[other] - per_input["true"]
            assert diff.mean() > 3 * diff.std(ddof=1) / math.sqrt(n)

    def test_gradients(self):
        """Test ES gradients against finite differences"""
        rng = np.random.default_rng(6)
        for _ in range(20):
            N, M, d = rng.integers(1, 5), rng.integers(1, 7), rng.integers(1, 4)
            samples, targets = rng.normal(size=(N, M, d)), rng.normal(size=(N, d))
            assert check_gradients(lambda s: energy_score(s, Tensor(targets)), [samples], step=1e-5) < 1e-4


class TestMinibatchEnergyScore:
    """Subsampled Energy Score"""

    def test_full_subsets_equal_full_score(self):
        """Test K = M, L = 1 reproduces energy_score exactly"""
        rng = np.random.default_rng(1)
        samples, targets = rng.normal(size=(3, 5, 2)), rng.normal(size=(3, 2))
        full = energy_score(samples, targets).item()
        assert minibatch_energy_score(samples, targets, 5, 1, rng=Rng(0)).item() == pytest.approx(full, abs=1e-12)

    def test_single_element_subsets(self):
        """Test K = 1 is the mean distance of the selected samples"""
        rng = np.random.default_rng(2)
        samples, targets = rng.normal(size=(2, 4, 1)), rng.normal(size=(2, 1))
        subsets = Rng(3).subsets(2, 4, 1, 3)
        value = minibatch_energy_score(samples, targets, 1, 3, subsets=subsets).item()
        expected = np.mean([abs(samples[n, subsets[n, l, 0], 0] - targets[n, 0]) for n in range(2) for l in range(3)])
        assert value == pytest.approx(expected, abs=1e-12)

    def test_exhaustive_subset_average(self):
        """Test M = 3, K = 2: averaging over all subsets matches enumeration"""
        rng = np.random.default_rng(3)
        samples, targets = rng.normal(size=(1, 3, 2)), rng.normal(size=(1, 2))
        pairs = list(itertools.combinations(range(3), 2))
        subsets = np.array([[list(pair) for pair in pairs]])
        value = minibatch_energy_score(samples, targets, 2, len(pairs), subsets=subsets).item()
        oracle = np.mean([energy_oracle(samples[0, list(pair)], targets[0]) for pair in pairs])
        assert value == pytest.approx(oracle, abs=1e-12)

    def test_first_term_unbiased_over_subsets(self):
        """Test averaging minibatch scores over every K-subset recovers the full first term (M = 5)"""
        rng = np.random.default_rng(8)
        samples, targets = rng.normal(size=(1, 5, 2)), rng.normal(size=(1, 2))

        def spread(points):
            return np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1).sum() / (2.0 * len(points) ** 2)

        full_spread = spread(samples[0])
        full_first = energy_score(samples, targets).item() + full_spread
        assert full_first == pytest.approx(np.linalg.norm(samples[0] - targets[0], axis=1).mean(), abs=1e-12)
        for K in range(1, 6):
            combos = list(itertools.combinations(range(5), K))
            value = minibatch_energy_score(samples, targets, K, len(combos), subsets=np.array([combos])).item()
            subset_spread = np.mean([spread(samples[0, list(combo)]) for combo in combos])
            assert value + subset_spread == pytest.approx(full_first, abs=1e-12)
            assert subset_spread == pytest.approx((K - 1) / K * 5 / 4 * full_spread, abs=1e-12)

    def test_k_larger_than_m(self):
        """Test K > M is a configuration error"""
        with pytest.raises(ConfigError):
            minibatch_energy_score(np.zeros((1, 3, 1)), np.zeros((1, 1)), 4, 1, rng=Rng(0))

    def test_seeded_subsets_are_reproducible(self):
        """Test identical seeds give identical values"""
        rng = np.random.default_rng(9)
        samples, targets = rng.normal(size=(4, 10, 2)), rng.normal(size=(4, 2))
        first = minibatch_energy_score(samples, targets, 4, 2, rng=Rng(12)).item()
        second = minibatch_energy_score(samples, targets, 4, 2, rng=Rng(12)).item()
        assert first == second

    def test_gradients(self):
        """Test minibatch ES gradients with fixed subsets"""
        rng = np.random.default_rng(10)
        for _ in range(20):
            N, M, d = rng.integers(1, 5), rng.integers(2, 7), rng.integers(1, 4)
            K = int(rng.integers(1, M + 1))
            samples, targets = rng.normal(size=(N, M, d)), rng.normal(size=(N, d))
            subsets = Rng(int(rng.integers(1000))).subsets(N, M, K, 2)
            fn = lambda s: minibatch_energy_score(s, Tensor(targets), K, 2, subsets=subsets)  # noqa: E731
            assert check_gradients(fn, [samples], step=1e-5) < 1e-4


class TestGaussianLikelihood:
    """Gaussian NLL and beta-NLL"""

    def test_standard_normal_at_mean(self):
        """Test mean 0, var 1, y 0 gives half log 2 pi"""
        assert gaussian_nll([[0.0]], [[1.0]], [[0.0]]).item() == pytest.approx(HALF_LOG_2PI, abs=1e-12)

    def test_constant_per_dimension_at_mean(self):
        """Test y = mean, var 1 is 0.91894 per dimension"""
        mean = np.array([[3.0, -1.0, 7.0]])
        assert gaussian_nll(mean, np.ones((1, 3)), mean).item() == pytest.approx(3 * HALF_LOG_2PI, abs=1e-12)

    def test_wide_variance_case(self):
        """Test mean 0, var 4, y 2 gives half log 8 pi + 0.5"""
        expected = 0.5 * math.log(8 * math.pi) + 0.5
        assert gaussian_nll([[0.0]], [[4.0]], [[2.0]]).item() == pytest.approx(expected, abs=1e-12)
        assert expected == pytest.approx(2.11208, abs=1e-5)

    def test_non_positive_variance(self):
        """Test the variance domain check"""
        with pytest.raises(DomainError):
            gaussian_nll([[0.0]], [[0.0]], [[0.0]])

    def test_minimized_at_squared_residual(self):
        """Test a variance grid scan has its minimum at (y - mean)^2"""
        grid = np.linspace(0.5, 8.0, 751)
        values = [gaussian_nll([[0.0]], [[v]], [[2.0]]).item() for v in grid]
        assert grid[int(np.argmin(values))] == pytest.approx(4.0, abs=0.01)

    def test_beta_zero_equals_nll(self):
        """Test beta = 0 reproduces gaussian_nll"""
        rng = np.random.default_rng(12)
        mean, var, y = rng.normal(size=(5, 2)), rng.uniform(0.5, 2.0, size=(5, 2)), rng.normal(size=(5, 2))
        assert beta_nll(mean, var, y, 0.0).item() == gaussian_nll(mean, var, y).item()

    def test_beta_one_scales_by_variance(self):
        """Test beta = 1, var = 4 is four times the unweighted value"""
        plain = gaussian_nll([[0.5]], [[4.0]], [[1.0]]).item()
        assert beta_nll([[0.5]], [[4.0]], [[1.0]], 1.0).item() == pytest.approx(4.0 * plain, abs=1e-12)

    def test_weight_carries_no_gradient(self):
        """Test the variance gradient ignores the weight path"""
        mean, y = Tensor([[0.5]]), Tensor([[1.0]])
        var = np.array([[2.0]])
        (weighted,) = reverse_gradients(lambda v: beta_nll(mean, v, y, 0.5), [var])
        (plain,) = reverse_gradients(lambda v: gaussian_nll(mean, v, y), [var])
        np.testing.assert_allclose(weighted, np.sqrt(2.0) * plain, atol=1e-12)

    def test_gradients(self):
        """Test NLL and beta-NLL gradients against finite differences"""
        rng = np.random.default_rng(13)
        for beta in (0.0, 0.5, 1.0):
            for _ in range(7):
                N, d = rng.integers(1, 5), rng.integers(1, 4)
                mean, var, y = rng.normal(size=(N, d)), rng.uniform(0.3, 3.0, size=(N, d)), rng.normal(size=(N, d))
                fn = lambda m, v: beta_nll(m, v, Tensor(y), beta)  # noqa: E731
                assert check_gradients(fn, [mean, var], step=1e-5) < 1e-4


class TestPointMetrics:
    """RMSE and Gaussian sample generation"""

    def test_perfect_predictions(self):
        """Test RMSE of exact predictions"""
        assert rmse([[1.0], [2.0]], [[1.0], [2.0]]) == 0.0

    def test_unit_errors(self):
        """Test errors {+1, -1} give RMSE 1"""
        assert rmse([[1.0], [-1.0]], [[0.0], [0.0]]) == pytest.approx(1.0)

    def test_matches_double_loop(self):
        """Test a random 10x2 case"""
        rng = np.random.default_rng(14)
        p, y = rng.normal(size=(10, 2)), rng.normal(size=(10, 2))
        total = sum((p[i, j] - y[i, j]) ** 2 for i in range(10) for j in range(2))
        assert rmse(p, y) == pytest.approx(math.sqrt(total / 20), abs=1e-12)

    def test_gaussian_samples_moments(self):
        """Test drawn samples follow the predicted mean and variance"""
        samples = gaussian_samples([[2.0, -1.0]], [[4.0, 0.25]], 20_000, Rng(1)).values
        assert samples.shape == (1, 20_000, 2)
        np.testing.assert_allclose(samples[0].mean(axis=0), [2.0, -1.0], atol=0.05)
        np.testing.assert_allclose(samples[0].var(axis=0), [4.0, 0.25], rtol=0.05)
