"""Production-shape wiring checks: the full 784-256x4-10 architecture over
real-size splits, with synthetic pixels standing in for the actual datasets."""

import pytest

from mlpmod.harness import ExperimentConfig, run_experiment
from mlpmod.mlp import TrainConfig
from mlpmod.spectral import SpectralConfig


@pytest.mark.slow
def test_full_architecture_both_methods(full_shape_mnist_dir, tmp_path):
    cache = {}
    reports = {}
    for method in ("weights", "spearman"):
        cfg = ExperimentConfig(
            dataset="mnist",
            activation="relu",
            dropout=False,
            method=method,
            train=TrainConfig(epochs=1, rng_seed=0),
            spectral=SpectralConfig(k=4, rng_seed=0),
        )
        reports[method] = run_experiment(cfg, full_shape_mnist_dir, tmp_path, cache)
    for method, report in reports.items():
        assert report.layer_widths == [784, 256, 256, 256, 256, 10]
        assert sum(report.cluster_sizes) + report.dropped_nodes == 1818
        assert len(report.cluster_sizes) == 4
        assert min(report.cluster_sizes) >= 1
        assert 0.0 < report.ncut <= 4.0
    # the weights graph keeps every neuron: no trained weight is exactly zero
    assert reports["weights"].dropped_nodes == 0
    # both methods analyzed the very same trained model
    assert reports["weights"].checkpoint == reports["spearman"].checkpoint
    assert (
        reports["weights"].test_accuracy_percent
        == reports["spearman"].test_accuracy_percent
    )
