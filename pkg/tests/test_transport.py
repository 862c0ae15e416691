"""
Unit Tests for the transport package
Normalization, prior draws, Sinkhorn solves and the minibatch regularizer
"""

import numpy as np
import pytest
from scipy.special import logsumexp as scipy_logsumexp

from diffmath import ConfigError, ContractError, Rng, ShapeError, Tensor
from scoring import LossConfig
from transport import (
    PointCloud,
    TransportStats,
    divergence_with_status,
    entropic_ot,
    minibatch_sinkhorn,
    normalize_samples,
    sample_prior,
    sinkhorn_divergence,
)
from tests.gradcheck import check_gradients, reverse_gradients


def dense_oracle(x: np.ndarray, y: np.ndarray, epsilon: float, iterations: int = 10_000) -> float:
    """Plain alternating log-domain Sinkhorn on 1-d uniform clouds"""
    cost = 0.5 * (x[:, None] - y[None, :]) ** 2
    log_a = np.full(len(x), -np.log(len(x)))
    log_b = np.full(len(y), -np.log(len(y)))
    f, g = np.zeros(len(x)), np.zeros(len(y))
    for _ in range(iterations):
        f = -epsilon * scipy_logsumexp(log_b[None, :] + (g[None, :] - cost) / epsilon, axis=1)
        g = -epsilon * scipy_logsumexp(log_a[:, None] + (f[:, None] - cost) / epsilon, axis=0)
    return float(np.exp(log_a) @ f + np.exp(log_b) @ g)


def cloud(points) -> PointCloud:
    return PointCloud.uniform(np.asarray(points, dtype=np.float64))


@pytest.fixture
def loose():
    """Solver settings that converge quickly on unit-scale clouds"""
    return {"epsilon": 0.1, "max_iters": 2000, "tol": 1e-10}


class TestNormalization:
    """Per-input sample normalization"""

    def test_uniform_min_max(self):
        """Test {2, 4} maps onto {0, 1}"""
        normalized, degenerate = normalize_samples([[2.0], [4.0]], "uniform")
        np.testing.assert_allclose(normalized.values[:, 0], [0.0, 1.0])
        assert not degenerate.any()

    def test_gaussian_already_standard(self):
        """Test {-1, +1} is left unchanged"""
        normalized, _ = normalize_samples([[-1.0], [1.0]], "gaussian")
        np.testing.assert_allclose(normalized.values[:, 0], [-1.0, 1.0], atol=1e-12)

    def test_gaussian_population_std(self):
        """Test {0, 2, 4} maps onto -sqrt(3/2), 0, sqrt(3/2)"""
        normalized, _ = normalize_samples([[0.0], [2.0], [4.0]], "gaussian")
        root = np.sqrt(1.5)
        np.testing.assert_allclose(normalized.values[:, 0], [-root, 0.0, root], atol=1e-12)

    def test_degenerate_dimension(self):
        """Test a constant dimension maps to zeros and is flagged"""
        samples = np.array([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]])
        for prior in ("uniform", "gaussian"):
            normalized, degenerate = normalize_samples(samples, prior)
            assert degenerate.tolist() == [False, True]
            assert np.all(normalized.values[:, 1] == 0.0)
            assert np.all(np.isfinite(normalized.values))

    def test_batched_statistics_are_per_set(self):
        """Test each leading index is normalized with its own statistics"""
        samples = np.array([[[0.0], [2.0]], [[10.0], [30.0]]])
        normalized, degenerate = normalize_samples(samples, "uniform")
        np.testing.assert_allclose(normalized.values[..., 0], [[0.0, 1.0], [0.0, 1.0]])
        assert degenerate.shape == (2, 1)

    def test_unknown_prior(self):
        """Test an unsupported prior name"""
        with pytest.raises(ConfigError):
            normalize_samples([[0.0], [1.0]], "laplace")


class TestPriorDraws:
    """Prior point clouds"""

    def test_uniform_support(self):
        """Test uniform draws stay in [0, 1)"""
        prior = sample_prior("uniform", 3, 2, Rng(0))
        assert prior.points.shape == (3, 2)
        assert np.all((prior.points.values >= 0.0) & (prior.points.values < 1.0))
        np.testing.assert_allclose(prior.weights, np.full(3, 1.0 / 3.0))

    def test_gaussian_mean(self):
        """Test a large Gaussian draw is centered"""
        prior = sample_prior("gaussian", 100_000, 1, Rng(1))
        assert abs(prior.points.values.mean()) < 0.01

    def test_deterministic(self):
        """Test identical seeds give identical clouds"""
        first = sample_prior("gaussian", 5, 2, Rng(7), batch_shape=(2, 3))
        second = sample_prior("gaussian", 5, 2, Rng(7), batch_shape=(2, 3))
        assert first.points.shape == (2, 3, 5, 2)
        np.testing.assert_array_equal(first.points.values, second.points.values)

    def test_weights_must_sum_to_one(self):
        """Test malformed weights are rejected"""
        with pytest.raises(ContractError):
            PointCloud(np.zeros((2, 1)), np.array([0.7, 0.7]))


class TestEntropicTransport:
    """Sinkhorn solves and the debiased divergence"""

    def test_identical_atoms(self):
        """Test a single shared atom costs nothing"""
        result = entropic_ot(cloud([[1.5]]), cloud([[1.5]]))
        assert result.value.item() == pytest.approx(0.0, abs=1e-12)

    def test_dirac_pair(self):
        """Test atoms at 0 and 2 cost half the squared distance"""
        for epsilon in (0.0025, 0.5):
            result = entropic_ot(cloud([[0.0]]), cloud([[2.0]]), epsilon=epsilon)
            assert result.value.item() == pytest.approx(2.0, abs=1e-9)
            assert result.converged
            assert sinkhorn_divergence(cloud([[0.0]]), cloud([[2.0]]), epsilon=epsilon).item() == pytest.approx(2.0, abs=1e-9)

    def test_matches_long_run_oracle(self):
        """Test two 3-atom clouds at the default strength"""
        x, y = np.array([0.0, 0.3, 0.7]), np.array([0.1, 0.5, 0.9])
        expected = dense_oracle(x, y, 0.0025)
        result = entropic_ot(cloud(x[:, None]), cloud(y[:, None]), epsilon=0.0025, max_iters=10_000, tol=1e-13)
        assert result.value.item() == pytest.approx(expected, abs=1e-6)

    def test_symmetric(self, loose):
        """Test W(a, b) = W(b, a)"""
        rng = np.random.default_rng(0)
        a, b = cloud(rng.normal(size=(5, 2))), cloud(rng.normal(size=(4, 2)))
        forward = entropic_ot(a, b, **loose).value.item()
        assert entropic_ot(b, a, **loose).value.item() == pytest.approx(forward, abs=1e-9)
        assert sinkhorn_divergence(b, a, **loose).item() == pytest.approx(sinkhorn_divergence(a, b, **loose).item(), abs=1e-9)

    def test_self_divergence_and_nonnegativity(self, loose):
        """Test S(a, a) = 0 and S(a, b) >= 0 over random pairs"""
        rng = np.random.default_rng(1)
        for _ in range(100):
            a = cloud(rng.normal(scale=0.5, size=(int(rng.integers(1, 6)), 2)))
            b = cloud(rng.normal(scale=0.5, size=(int(rng.integers(1, 6)), 2)))
            assert abs(sinkhorn_divergence(a, a, **loose).item()) < 1e-6
            assert sinkhorn_divergence(a, b, **loose).item() >= -1e-6

    def test_axioms_at_default_strength(self):
        """Test S(a, a) = 0, symmetry and S(a, b) >= 0 at the default epsilon, iteration cap included"""
        rng = np.random.default_rng(21)
        converged_pairs = 0
        for _ in range(100):
            d = int(rng.integers(1, 4))
            a = cloud(rng.normal(size=(int(rng.integers(1, 17)), d)))
            b = cloud(rng.normal(size=(int(rng.integers(1, 17)), d)))
            value, converged = divergence_with_status(a, b, warn=False)
            reverse, _ = divergence_with_status(b, a, warn=False)
            converged_pairs += converged
            assert np.isfinite(value.item())
            assert value.item() >= -1e-6
            assert reverse.item() == pytest.approx(value.item(), abs=1e-6)
            assert abs(divergence_with_status(a, a, warn=False)[0].item()) < 1e-12
        assert converged_pairs > 0

    def test_iteration_cap_reports_nonconvergence(self):
        """Test the cap returns a value with converged=False"""
        rng = np.random.default_rng(2)
        result = entropic_ot(cloud(rng.normal(size=(6, 1))), cloud(rng.normal(size=(6, 1))), max_iters=2, tol=0.0)
        assert not result.converged
        assert result.iterations == 2
        assert np.isfinite(result.value.item())

    def test_dimension_mismatch(self):
        """Test clouds of different dimension"""
        with pytest.raises(ShapeError):
            entropic_ot(cloud(np.zeros((2, 1))), cloud(np.zeros((2, 2))))

    def test_divergence_gradients(self):
        """Test unrolled gradients against finite differences over random clouds"""
        rng = np.random.default_rng(3)
        for _ in range(20):
            d = int(rng.integers(1, 4))
            x = rng.normal(size=(int(rng.integers(1, 5)), d))
            y = rng.normal(size=(int(rng.integers(1, 5)), d))
            epsilon = float(rng.choice([0.1, 0.25, 0.5]))
            fn = lambda p, q: sinkhorn_divergence(  # noqa: E731
                PointCloud.uniform(p), PointCloud.uniform(q), epsilon=epsilon, max_iters=30, tol=0.0
            )
            assert check_gradients(fn, [x, y], step=1e-6) < 1e-3

    def test_envelope_matches_unroll_at_convergence(self):
        """Test both gradient modes agree once the potentials settle"""
        rng = np.random.default_rng(4)
        x, y = rng.normal(size=(4, 2)), rng.normal(size=(5, 2))
        settings = {"epsilon": 0.5, "max_iters": 5000, "tol": 1e-12}

        def run(mode):
            fn = lambda p, q: sinkhorn_divergence(  # noqa: E731
                PointCloud.uniform(p), PointCloud.uniform(q), gradient=mode, **settings
            )
            return fn(Tensor(x), Tensor(y)).item(), reverse_gradients(fn, [x, y])

        unrolled_value, unrolled_grads = run("unroll")
        envelope_value, envelope_grads = run("envelope")
        assert envelope_value == pytest.approx(unrolled_value, abs=1e-8)
        for unrolled, envelope in zip(unrolled_grads, envelope_grads):
            np.testing.assert_allclose(envelope, unrolled, atol=1e-6)


class TestMinibatchSinkhorn:
    """Subsampled divergence against fresh prior draws"""

    def test_iid_samples_score_below_shifted_prior(self):
        """Test prior-distributed samples beat a shifted prior by a wide margin"""
        rng = Rng(5)
        samples = rng.draw("standard_normal", (2, 200, 1))
        cfg = LossConfig(M=200, K=200, L=1, prior="gaussian")
        prior_points = Rng(6).draw("standard_normal", (2, 1, 200, 1)).values
        subsets = Rng(7).subsets(2, 200, 200, 1)
        matched = minibatch_sinkhorn(samples, cfg, Rng(8), subsets=subsets, prior_points=prior_points).item()
        shifted = minibatch_sinkhorn(samples, cfg, Rng(8), subsets=subsets, prior_points=prior_points + 1.0).item()
        assert shifted >= 5.0 * matched
        assert shifted > 0.1

    def test_full_subsets_repeat_exactly(self):
        """Test K = M, L = 1 has no variance given the same prior draws"""
        samples = np.random.default_rng(9).normal(size=(3, 8, 2))
        cfg = LossConfig(M=8, K=8, L=1, prior="uniform")
        prior_points = Rng(10).draw("uniform01", (3, 1, 8, 2)).values
        first = minibatch_sinkhorn(samples, cfg, Rng(11), prior_points=prior_points).item()
        second = minibatch_sinkhorn(samples, cfg, Rng(99), prior_points=prior_points).item()
        assert first == second

    def test_shape_only_sensitivity(self):
        """Test scaling and translating one input's samples leaves the value unchanged"""
        base = np.random.default_rng(12).normal(size=(2, 10, 2))
        cfg = LossConfig(M=10, K=6, L=2, prior="gaussian", epsilon=0.1, sinkhorn_iters=100, sinkhorn_tol=0.0)
        subsets = Rng(13).subsets(2, 10, 6, 2)
        prior_points = Rng(14).draw("standard_normal", (2, 2, 6, 2)).values
        reference = minibatch_sinkhorn(base, cfg, Rng(0), subsets=subsets, prior_points=prior_points).item()
        for scale, shift in ((0.01, 3.0), (7.5, -40.0)):
            moved = base.copy()
            moved[1] = moved[1] * scale + shift
            value = minibatch_sinkhorn(moved, cfg, Rng(0), subsets=subsets, prior_points=prior_points).item()
            assert value == pytest.approx(reference, abs=1e-8)

    def test_degenerate_input_is_skipped_and_counted(self):
        """Test identical samples for one input contribute zero"""
        samples = np.random.default_rng(15).normal(size=(2, 6, 1))
        samples[0] = 4.0
        cfg = LossConfig(M=6, K=6, L=3, prior="gaussian", epsilon=0.1, sinkhorn_iters=100, sinkhorn_tol=0.0)
        prior_points = Rng(16).draw("standard_normal", (2, 3, 6, 1)).values
        stats = TransportStats()
        both = minibatch_sinkhorn(samples, cfg, Rng(0), stats=stats, prior_points=prior_points).item()
        assert stats.degenerate_skipped == 3
        assert stats.divergences == 6 and stats.evaluations == 1

        alone = minibatch_sinkhorn(samples[1:], cfg, Rng(0), prior_points=prior_points[1:]).item()
        assert both == pytest.approx(alone / 2.0, abs=1e-10)

    def test_all_degenerate_is_zero(self):
        """Test a fully collapsed batch yields a finite zero"""
        cfg = LossConfig(M=4, K=2, L=2, prior="uniform")
        value = minibatch_sinkhorn(np.ones((3, 4, 2)), cfg, Rng(17))
        assert value.item() == 0.0

    def test_k_larger_than_m(self):
        """Test K must fit inside the sample set"""
        cfg = LossConfig(M=10, K=10)
        with pytest.raises(ConfigError):
            minibatch_sinkhorn(np.zeros((1, 5, 1)), cfg, Rng(0))

    def test_gradients_through_normalization(self):
        """Test regularizer gradients against finite differences over random shapes"""
        rng = np.random.default_rng(18)
        for index in range(20):
            N, M = int(rng.integers(1, 4)), int(rng.integers(3, 7))
            d, L = int(rng.integers(1, 4)), int(rng.integers(1, 3))
            K = int(rng.integers(3, M + 1))
            prior = ("gaussian", "uniform")[index % 2]
            cfg = LossConfig(M=M, K=K, L=L, prior=prior, epsilon=float(rng.choice([0.2, 0.5])), sinkhorn_iters=30,
                             sinkhorn_tol=0.0)
            samples = rng.normal(size=(N, M, d))
            subsets = Rng(index).subsets(N, M, K, L)
            prior_points = Rng(100 + index).draw("standard_normal" if prior == "gaussian" else "uniform01",
                                                 (N, L, K, d)).values
            fn = lambda s: minibatch_sinkhorn(s, cfg, Rng(0), subsets=subsets, prior_points=prior_points)  # noqa: E731
            assert check_gradients(fn, [samples], step=1e-6) < 1e-3
