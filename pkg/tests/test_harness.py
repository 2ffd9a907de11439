import json

import numpy as np
import pytest

from mlpmod.data import DataError, load_dataset
from mlpmod.harness import (
    ExperimentConfig,
    ExperimentReport,
    StageError,
    analyze_checkpoint,
    checkpoint_filename,
    config_fingerprint,
    grid_csv_rows,
    load_reports,
    ordering_summary,
    render_method_table,
    report_filename,
    run_experiment,
    run_grid,
)
from mlpmod.mlp import TrainConfig
from mlpmod.spectral import SpectralConfig

from conftest import SMOKE_WIDTHS, smoke_config


def _strip_wall_times(d):
    d = dict(d)
    d.pop("wall_times")
    return d


def test_smoke_experiment_end_to_end(smoke_data_dir, tmp_path):
    report = run_experiment(smoke_config("weights"), smoke_data_dir, tmp_path)
    assert report.ncut > 0.0
    assert sum(report.cluster_sizes) + report.dropped_nodes == sum(SMOKE_WIDTHS)
    assert len(report.cluster_sizes) == 4
    assert min(report.cluster_sizes) >= 1
    json_path = tmp_path / "reports" / report_filename(smoke_config("weights"))
    assert json_path.is_file()
    round_trip = ExperimentReport.read_json(json_path)
    assert round_trip.to_dict() == report.to_dict()
    ckpt = tmp_path / "checkpoints" / report.checkpoint
    assert ckpt.is_file()
    # layer composition covers each layer exactly
    composition = np.array(report.layer_cluster_counts)
    assert composition.shape == (len(SMOKE_WIDTHS), 4)
    assert composition.sum() == sum(SMOKE_WIDTHS) - report.dropped_nodes


def test_experiment_is_deterministic(smoke_data_dir, tmp_path):
    cfg = smoke_config("spearman", activation="sigmoid")
    first = run_experiment(cfg, smoke_data_dir, tmp_path / "a")
    second = run_experiment(cfg, smoke_data_dir, tmp_path / "b")
    assert _strip_wall_times(first.to_dict()) == _strip_wall_times(second.to_dict())


def test_methods_share_one_checkpoint(smoke_data_dir, tmp_path):
    cache = {}
    w = run_experiment(smoke_config("weights"), smoke_data_dir, tmp_path, cache)
    s = run_experiment(smoke_config("spearman"), smoke_data_dir, tmp_path, cache)
    assert w.checkpoint == s.checkpoint
    assert w.test_accuracy_percent == s.test_accuracy_percent
    assert w.ncut != s.ncut  # different adjacency constructions
    ckpts = list((tmp_path / "checkpoints").glob("*.mlpc"))
    assert len(ckpts) == 1


def test_fingerprint_tracks_training_inputs():
    base = smoke_config("weights")
    assert config_fingerprint(base) == config_fingerprint(smoke_config("spearman"))
    changed_seed = smoke_config("weights", seed=1)
    assert config_fingerprint(base) != config_fingerprint(changed_seed)
    changed_data = ExperimentConfig(
        dataset="other", activation="relu", dropout=False, method="weights",
        layer_widths=SMOKE_WIDTHS, train=TrainConfig(epochs=1, rng_seed=0),
    )
    assert config_fingerprint(base) != config_fingerprint(changed_data)
    assert checkpoint_filename(base).endswith(".mlpc")


def test_missing_data_surfaces_stage_and_cause(tmp_path):
    with pytest.raises(StageError, match="load-data") as err:
        run_experiment(smoke_config("weights"), tmp_path / "nowhere", tmp_path)
    assert err.value.stage == "load-data"
    assert isinstance(err.value.__cause__, DataError)


def test_analyze_checkpoint_round_trip(smoke_data_dir, tmp_path):
    cfg = smoke_config("weights")
    pipeline = run_experiment(cfg, smoke_data_dir, tmp_path)
    ckpt = tmp_path / "checkpoints" / pipeline.checkpoint
    analysis = analyze_checkpoint(
        ckpt, "weights", spectral=SpectralConfig(k=4, rng_seed=0), k=4
    )
    assert analysis.ncut == pipeline.ncut  # bit-identical
    assert analysis.cluster_sizes == pipeline.cluster_sizes
    assert analysis.test_accuracy_percent is None
    assert analysis.dataset is None


def test_analyze_spearman_requires_test_split(smoke_data_dir, tmp_path):
    cfg = smoke_config("weights")
    pipeline = run_experiment(cfg, smoke_data_dir, tmp_path)
    ckpt = tmp_path / "checkpoints" / pipeline.checkpoint
    with pytest.raises(ValueError, match="test split"):
        analyze_checkpoint(ckpt, "spearman")


def test_analyze_spearman_with_test_split(smoke_data_dir, tmp_path):
    cache = {}
    pipeline = run_experiment(smoke_config("spearman"), smoke_data_dir, tmp_path, cache)
    ckpt = tmp_path / "checkpoints" / pipeline.checkpoint
    dataset = load_dataset("smoke", smoke_data_dir)
    analysis = analyze_checkpoint(
        ckpt, "spearman", spectral=SpectralConfig(k=4, rng_seed=0),
        test_set=dataset.test, k=4,
    )
    assert analysis.ncut == pipeline.ncut
    assert analysis.test_accuracy_percent == pipeline.test_accuracy_percent


def test_run_grid_on_synthetic(smoke_data_dir, tmp_path):
    result = run_grid(
        smoke_data_dir,
        tmp_path,
        seeds=(0, 1),
        train_cfg=TrainConfig(epochs=1),
        spectral=SpectralConfig(k=4, rng_seed=0),
        datasets=("smoke",),
        layer_widths=SMOKE_WIDTHS,
    )
    # 1 dataset x 2 activations x 2 dropout x 2 seeds x 2 methods
    assert len(result.reports) == 16
    assert result.failures == []
    # models shared across methods: 8 checkpoints, not 16
    assert len(list((tmp_path / "checkpoints").glob("*.mlpc"))) == 8
    assert (tmp_path / "grid.csv").is_file()
    assert (tmp_path / "table_weights.txt").is_file()
    assert (tmp_path / "table_spearman.txt").is_file()
    assert (tmp_path / "grid_summary.json").is_file()
    summary = json.loads((tmp_path / "grid_summary.json").read_text())
    assert summary["seeds"] == [0, 1]
    assert set(summary["activation_ordering"]["per_seed"]) == {"0", "1"}
    # per (method, dataset, dropout): 2 x 1 x 2 = 4 comparisons per seed
    assert all(
        len(v) == 4 for v in summary["activation_ordering"]["per_seed"].values()
    )
    loaded = load_reports(tmp_path / "reports")
    assert len(loaded) == 16


def test_grid_continues_after_cell_failures(tmp_path):
    result = run_grid(
        tmp_path / "missing-data",
        tmp_path / "out",
        seeds=(0,),
        train_cfg=TrainConfig(epochs=1),
        datasets=("smoke",),
        layer_widths=SMOKE_WIDTHS,
    )
    assert result.reports == []
    assert len(result.failures) == 8
    assert all(f["stage"] == "load-data" for f in result.failures)


def _fake_report(method, dataset, activation, dropout, seed, ncut_value, acc=90.0):
    return ExperimentReport(
        dataset=dataset,
        activation=activation,
        dropout=dropout,
        method=method,
        k=4,
        seed=seed,
        layer_widths=[4, 3, 2],
        test_accuracy_percent=acc,
        ncut=ncut_value,
        cluster_sizes=[3, 2, 2, 2],
        layer_cluster_counts=[[1, 1, 1, 1], [1, 1, 1, 0], [1, 0, 0, 1]],
        dropped_nodes=0,
        kmeans_cost=0.1,
        checkpoint="x.mlpc",
        off_protocol_k=False,
        train_config=None,
        spectral_config={},
    )


def test_ordering_summary_logic():
    reports = [
        _fake_report("weights", "mnist", "relu", False, 0, 2.4),
        _fake_report("weights", "mnist", "sigmoid", False, 0, 2.1),
        _fake_report("weights", "mnist", "relu", True, 0, 2.2),
        _fake_report("weights", "mnist", "sigmoid", True, 0, 2.3),  # violated
        _fake_report("weights", "mnist", "relu", False, 1, 2.0),
        _fake_report("weights", "mnist", "sigmoid", False, 1, 1.8),
    ]
    summary = ordering_summary(reports)
    per_seed = summary["activation_ordering"]["per_seed"]
    assert per_seed["0"]["weights|mnist|False"] is True
    assert per_seed["0"]["weights|mnist|True"] is False
    assert summary["activation_ordering"]["per_seed_counts"] == {"0": 1, "1": 1}
    # mean over seeds: relu (2.4+2.0)/2=2.2 vs sigmoid (2.1+1.8)/2=1.95
    assert summary["activation_ordering"]["mean"]["weights|mnist|False"] is True
    dropout_checks = summary["dropout_lowers_ncut"]["per_seed"]["0"]
    assert dropout_checks["weights|mnist|relu"] is True   # 2.2 < 2.4
    assert dropout_checks["weights|mnist|sigmoid"] is False  # 2.3 > 2.1


def test_render_method_table_layout():
    reports = [
        _fake_report("weights", "mnist", "relu", False, 0, 2.37, acc=98.04),
        _fake_report("weights", "mnist", "sigmoid", False, 0, 2.10, acc=97.0),
        _fake_report("weights", "fashion_mnist", "relu", True, 0, 2.11, acc=85.0),
    ]
    table = render_method_table(reports, "weights")
    lines = table.strip().split("\n")
    header = lines[0]
    for column in ("Data Set", "Activation Function", "Dropout",
                   "Test Accuracy(%)", "N-Cut"):
        assert column in header
    assert "MNIST" in lines[2]
    assert "ReLU" in lines[2] and "98.0" in lines[2] and "2.37" in lines[2]
    assert "Sigmoid" in lines[3] and "No" in lines[3]
    assert "FashionMNIST" in lines[4] and "Yes" in lines[4]


def test_grid_csv_has_per_seed_and_mean_rows():
    reports = [
        _fake_report("weights", "mnist", "relu", False, 0, 2.0),
        _fake_report("weights", "mnist", "relu", False, 1, 2.2),
    ]
    rows = grid_csv_rows(reports)
    assert rows[0][0] == "method"
    seeds = [row[4] for row in rows[1:]]
    assert seeds == [0, 1, "mean"]
    assert rows[3][6] == pytest.approx(2.1)


def test_off_protocol_k_flagged(smoke_data_dir, tmp_path):
    cfg = smoke_config("weights", k=3)
    report = run_experiment(cfg, smoke_data_dir, tmp_path)
    assert report.off_protocol_k is True
    assert report.k == 3
    assert len(report.cluster_sizes) == 3


def test_experiment_config_validation():
    with pytest.raises(ValueError, match="method"):
        smoke_config("pearson")
    with pytest.raises(ValueError, match="k must be"):
        ExperimentConfig(k=1)
