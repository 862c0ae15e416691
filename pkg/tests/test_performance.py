"""
Acceptance Tests for SampleNet training
Desk-scale runs on the toy problems; minutes each, so marked slow
"""

import numpy as np
import pytest

from data import multimodal_curves, outlier_curve
from evaluation import evaluate_model
from experiments import RunConfig, fit_split, prepare_split
from network import forward_samples
from summaries import central_interval

pytestmark = pytest.mark.slow


def toy_run(seed: int, dataset: dict, method: str = "samplenet", loss: dict = None, schedule: dict = None):
    """Train one model on a toy split; returns (config, split data, model)"""
    cfg = RunConfig.from_dict(
        {
            "dataset": {"n": 500, "test_n": 2000, **dataset},
            "method": method,
            "model": {"hidden_sizes": [50], "activation": "tanh"},
            "loss": {"M": 100, "sinkhorn_gradient": "envelope", **(loss or {})},
            "baseline": {"beta": 0.5},
            "schedule": {
                "max_steps": 2500,
                "minibatch_size": None,
                "learning_rate": 0.01,
                "eval_every": 100,
                "patience": 10,
                **(schedule or {}),
            },
            "split": {"validation_fraction": 0.0},
            "evaluation": {"eval_M": 100},
            "seed": seed,
        }
    )
    data = prepare_split(cfg, 0)
    model, _ = fit_split(cfg, data)
    return cfg, data, model


def samples_at(data, model, x_values):
    """Predicted samples (rows x M) at raw input locations"""
    X = data.whitening.apply(np.asarray(x_values, dtype=np.float64)[:, None])
    return forward_samples(model, X).values[:, :, 0]


class TestMultimodalFit:
    """Sample sets against the Gaussian baseline on the two-branch toy"""

    def test_samplenet_beats_baseline_and_covers_both_branches(self):
        """Test lower test ES in at least 4 of 5 seeds and both branches populated at x = 5"""
        wins = 0
        for seed in range(5):
            _, data, samplenet = toy_run(seed, {"name": "multimodal"})
            _, baseline_data, baseline = toy_run(seed, {"name": "multimodal"}, method="beta_nll")
            samplenet_es = evaluate_model(samplenet, data.test, seed=seed).es
            baseline_es = evaluate_model(baseline, baseline_data.test, 100, seed=seed).es
            wins += samplenet_es < baseline_es

            if seed == 0:
                samples = samples_at(data, samplenet, [5.0])[0]
                lower, upper = multimodal_curves(np.array([5.0]))
                assert np.mean(np.abs(samples - lower[0]) <= 1.5) >= 0.1
                assert np.mean(np.abs(samples - upper[0]) <= 1.5) >= 0.1
        assert wins >= 4


class TestOutlierRegularization:
    """Sinkhorn weight against synthetic outliers"""

    def test_eta_trades_outlier_fit_for_underfitting(self):
        """Test eta = 2 ignores outliers more than eta = 0 and eta = 200 underfits"""
        grid = np.linspace(0.0, 10.0, 50)
        near_outliers = {0.0: [], 2.0: [], 200.0: []}
        test_es = {0.0: [], 2.0: [], 200.0: []}
        for seed in range(3):
            for eta in near_outliers:
                _, data, model = toy_run(
                    seed,
                    {"name": "unimodal", "outliers": 20},
                    loss={"M": 50, "K": 10, "L": 1, "eta": eta, "sinkhorn_iters": 50},
                    schedule={"max_steps": 1500, "minibatch_size": 64},
                )
                samples = samples_at(data, model, grid)
                near_outliers[eta].append(np.mean(np.abs(samples - outlier_curve(grid)[:, None]) <= 1.0))
                test_es[eta].append(evaluate_model(model, data.test).es)
        assert np.mean(near_outliers[0.0]) > np.mean(near_outliers[2.0])
        assert np.mean(test_es[200.0]) > np.mean(test_es[2.0])


class TestCalibration:
    """Central intervals on the heteroscedastic unimodal toy"""

    def test_central_interval_coverage(self):
        """Test 95% intervals cover 90-98% of held-out targets over 3 seeds"""
        coverage = []
        for seed in range(3):
            _, data, model = toy_run(seed, {"name": "unimodal"})
            samples = forward_samples(model, data.test.X).values[:, :, 0]
            bounds = np.array([central_interval(row, 0.95) for row in samples])
            y = data.test.Y[:, 0]
            coverage.append(np.mean((bounds[:, 0] <= y) & (y <= bounds[:, 1])))
        assert 0.90 <= float(np.mean(coverage)) <= 0.98
