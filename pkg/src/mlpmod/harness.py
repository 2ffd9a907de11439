"""Experiment orchestration: train/load models, build both adjacency kinds,
cluster, and emit machine-readable reports plus rendered tables.

The full grid is 2 datasets x 2 activations x dropout on/off, each analyzed
under both edge-weight methods; one trained model (checkpointed under a
config fingerprint) is shared by the two methods of the same cell and seed.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .checkpoint import load_checkpoint, save_checkpoint
from .correlation import build_correlation_adjacency
from .data import LabeledImageSet, load_dataset
from .graph import build_weight_adjacency, neuron_position, validate_adjacency
from .mlp import (
    DEFAULT_LAYER_WIDTHS,
    MlpArchitecture,
    MlpModel,
    TrainConfig,
    evaluate_accuracy,
    record_activations,
    train,
)
from .spectral import ClusteringResult, SpectralConfig, cluster_graph

__all__ = [
    "METHODS",
    "DROPOUT_RATE",
    "StageError",
    "ExperimentConfig",
    "ExperimentReport",
    "GridResult",
    "config_fingerprint",
    "checkpoint_filename",
    "report_filename",
    "run_experiment",
    "analyze_checkpoint",
    "run_grid",
    "render_method_table",
    "grid_csv_rows",
    "write_grid_csv",
    "ordering_summary",
    "load_reports",
]

METHODS = ("weights", "spearman")
DROPOUT_RATE = 0.5  # rate used whenever dropout is enabled

CONVENTIONS = {
    "edge_weights": "absolute trained weight",
    "correlation": "absolute spearman; constant vectors give 0",
    "activation_recording": "inputs=pixels; hidden=post-nonlinearity; outputs=logits",
}

TABLE_COLUMNS = ("Data Set", "Activation Function", "Dropout", "Test Accuracy(%)", "N-Cut")

_DATASET_DISPLAY = {"mnist": "MNIST", "fashion_mnist": "FashionMNIST"}
_ACTIVATION_DISPLAY = {"relu": "ReLU", "sigmoid": "Sigmoid"}

# table row order within one dataset: (activation, dropout)
_ROW_ORDER = (("relu", False), ("sigmoid", False), ("relu", True), ("sigmoid", True))


class StageError(RuntimeError):
    """A pipeline stage failed; carries the stage name, chains the cause."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage


@contextmanager
def _stage(name: str, wall_times: dict):
    start = time.perf_counter()
    try:
        yield
    except Exception as e:
        raise StageError(name, e) from e
    finally:
        wall_times[name] = time.perf_counter() - start


@dataclass(frozen=True)
class ExperimentConfig:
    dataset: str = "mnist"
    activation: str = "relu"
    dropout: bool = False
    method: str = "weights"
    k: int = 4
    layer_widths: tuple[int, ...] = DEFAULT_LAYER_WIDTHS
    train: TrainConfig = field(default_factory=TrainConfig)
    spectral: SpectralConfig = field(default_factory=SpectralConfig)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.k < 2:
            raise ValueError("k must be at least 2")

    @property
    def architecture(self) -> MlpArchitecture:
        return MlpArchitecture(
            layer_widths=self.layer_widths,
            activation=self.activation,
            dropout_rate=DROPOUT_RATE if self.dropout else 0.0,
        )

    @property
    def off_protocol_k(self) -> bool:
        return self.k != 4


@dataclass
class ExperimentReport:
    """One experiment's record; serializes to a fixed-key JSON document."""

    dataset: str | None
    activation: str
    dropout: bool
    method: str
    k: int
    seed: int | None
    layer_widths: list
    test_accuracy_percent: float | None
    ncut: float
    cluster_sizes: list
    layer_cluster_counts: list
    dropped_nodes: int
    kmeans_cost: float
    checkpoint: str | None
    off_protocol_k: bool
    train_config: dict | None
    spectral_config: dict
    conventions: dict = field(default_factory=lambda: dict(CONVENTIONS))
    wall_times: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "dataset": self.dataset,
            "activation": self.activation,
            "dropout": self.dropout,
            "method": self.method,
            "k": self.k,
            "seed": self.seed,
            "layer_widths": list(self.layer_widths),
            "test_accuracy_percent": self.test_accuracy_percent,
            "ncut": self.ncut,
            "cluster_sizes": list(self.cluster_sizes),
            "layer_cluster_counts": [list(row) for row in self.layer_cluster_counts],
            "dropped_nodes": self.dropped_nodes,
            "kmeans_cost": self.kmeans_cost,
            "checkpoint": self.checkpoint,
            "off_protocol_k": self.off_protocol_k,
            "train_config": self.train_config,
            "spectral_config": self.spectral_config,
            "conventions": dict(self.conventions),
            "wall_times": dict(self.wall_times),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(**{k: d[k] for k in (
            "dataset", "activation", "dropout", "method", "k", "seed",
            "layer_widths", "test_accuracy_percent", "ncut", "cluster_sizes",
            "layer_cluster_counts", "dropped_nodes", "kmeans_cost",
            "checkpoint", "off_protocol_k", "train_config", "spectral_config",
            "conventions", "wall_times",
        )})

    def write_json(self, path) -> None:
        payload = json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"
        tmp = Path(str(path) + ".tmp")
        tmp.write_text(payload)
        os.replace(tmp, path)

    @classmethod
    def read_json(cls, path) -> "ExperimentReport":
        return cls.from_dict(json.loads(Path(path).read_text()))


def _train_config_dict(cfg: TrainConfig) -> dict:
    return {
        "epochs": cfg.epochs,
        "batch_size": cfg.batch_size,
        "learning_rate": cfg.learning_rate,
        "beta1": cfg.beta1,
        "beta2": cfg.beta2,
        "eps": cfg.eps,
        "rng_seed": cfg.rng_seed,
        "shuffle_each_epoch": cfg.shuffle_each_epoch,
    }


def _spectral_config_dict(cfg: SpectralConfig, k: int) -> dict:
    return {
        "k": k,
        "kmeans_restarts": cfg.kmeans_restarts,
        "kmeans_max_iters": cfg.kmeans_max_iters,
        "kmeans_tol": cfg.kmeans_tol,
        "eig_tol": cfg.eig_tol,
        "rng_seed": cfg.rng_seed,
    }


def config_fingerprint(cfg: ExperimentConfig) -> str:
    """Hash of everything that determines the trained model."""
    payload = json.dumps(
        {
            "dataset": cfg.dataset,
            "layer_widths": list(cfg.layer_widths),
            "activation": cfg.activation,
            "dropout_rate": DROPOUT_RATE if cfg.dropout else 0.0,
            "train": _train_config_dict(cfg.train),
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:12]


def checkpoint_filename(cfg: ExperimentConfig) -> str:
    drop = "dropout" if cfg.dropout else "nodropout"
    return (
        f"{cfg.dataset}_{cfg.activation}_{drop}_seed{cfg.train.rng_seed}"
        f"_{config_fingerprint(cfg)}.mlpc"
    )


def report_filename(cfg: ExperimentConfig) -> str:
    drop = "dropout" if cfg.dropout else "nodropout"
    return (
        f"report_{cfg.dataset}_{cfg.activation}_{drop}_{cfg.method}"
        f"_seed{cfg.train.rng_seed}.json"
    )


def _layer_cluster_counts(
    result: ClusteringResult, layer_widths
) -> list[list[int]]:
    counts = np.zeros((len(layer_widths), result.n_clusters), dtype=np.int64)
    for node, label in enumerate(result.labels):
        if label >= 0:
            layer, _ = neuron_position(layer_widths, node)
            counts[layer, label] += 1
    return counts.tolist()


def _build_adjacency(method: str, model: MlpModel, test_set: LabeledImageSet | None):
    widths = model.architecture.layer_widths
    if method == "weights":
        adjacency = build_weight_adjacency(model.weights, widths)
    elif method == "spearman":
        if test_set is None:
            raise ValueError("the spearman method needs the test split")
        table = record_activations(model, test_set.images)
        adjacency = build_correlation_adjacency(table, model.architecture)
    else:
        raise ValueError(f"unknown method {method!r}")
    validate_adjacency(adjacency, widths, atol=1e-12)
    return adjacency


def _assemble_report(
    cfg_like: dict,
    model: MlpModel,
    result: ClusteringResult,
    wall_times: dict,
) -> ExperimentReport:
    widths = model.architecture.layer_widths
    sizes = result.cluster_sizes().tolist()
    dropped = int(result.dropped.size)
    if sum(sizes) != model.n_neurons - dropped:
        raise RuntimeError("cluster sizes do not cover the kept nodes")
    return ExperimentReport(
        layer_widths=list(widths),
        ncut=float(result.ncut_value),
        cluster_sizes=sizes,
        layer_cluster_counts=_layer_cluster_counts(result, widths),
        dropped_nodes=dropped,
        kmeans_cost=float(result.kmeans_cost),
        wall_times=wall_times,
        **cfg_like,
    )


def run_experiment(
    cfg: ExperimentConfig,
    data_dir,
    out_dir,
    dataset_cache: dict | None = None,
) -> ExperimentReport:
    """Run one experiment end to end and persist its artifacts.

    Trains the model unless a checkpoint for the same config fingerprint
    already exists under ``out_dir/checkpoints``; writes the report JSON to
    ``out_dir/reports``. Deterministic for fixed seeds.
    """
    out_dir = Path(out_dir)
    (out_dir / "checkpoints").mkdir(parents=True, exist_ok=True)
    (out_dir / "reports").mkdir(parents=True, exist_ok=True)
    wall_times: dict = {}

    with _stage("load-data", wall_times):
        key = (cfg.dataset, str(data_dir))
        if dataset_cache is not None and key in dataset_cache:
            dataset = dataset_cache[key]
        else:
            dataset = load_dataset(cfg.dataset, data_dir)
            if dataset_cache is not None:
                dataset_cache[key] = dataset

    ckpt_path = out_dir / "checkpoints" / checkpoint_filename(cfg)
    with _stage("train-or-load", wall_times):
        if ckpt_path.is_file():
            model = load_checkpoint(ckpt_path)
        else:
            model, _ = train(dataset, cfg.architecture, cfg.train)
            save_checkpoint(model, ckpt_path)
        accuracy = evaluate_accuracy(model, dataset.test.images, dataset.test.labels)

    with _stage("adjacency", wall_times):
        adjacency = _build_adjacency(cfg.method, model, dataset.test)

    with _stage("cluster", wall_times):
        spectral_cfg = replace(cfg.spectral, k=cfg.k)
        result = cluster_graph(adjacency, spectral_cfg)

    report = _assemble_report(
        {
            "dataset": cfg.dataset,
            "activation": cfg.activation,
            "dropout": cfg.dropout,
            "method": cfg.method,
            "k": cfg.k,
            "seed": cfg.train.rng_seed,
            "test_accuracy_percent": 100.0 * accuracy,
            "checkpoint": ckpt_path.name,
            "off_protocol_k": cfg.off_protocol_k,
            "train_config": _train_config_dict(cfg.train),
            "spectral_config": _spectral_config_dict(cfg.spectral, cfg.k),
        },
        model,
        result,
        wall_times,
    )
    report.write_json(out_dir / "reports" / report_filename(cfg))
    return report


def analyze_checkpoint(
    checkpoint_path,
    method: str,
    spectral: SpectralConfig | None = None,
    test_set: LabeledImageSet | None = None,
    k: int = 4,
) -> ExperimentReport:
    """Re-run the graph analysis of a stored model without retraining.

    The weights method needs no data; the spearman method requires the test
    split the activations are recorded over. Test accuracy is filled in
    whenever a test set is supplied.
    """
    if method == "spearman" and test_set is None:
        raise ValueError(
            "analyze with method 'spearman' requires the test split "
            "(pass test_set / --data-dir)"
        )
    spectral = spectral if spectral is not None else SpectralConfig(k=k)
    spectral = replace(spectral, k=k)
    wall_times: dict = {}
    with _stage("load-checkpoint", wall_times):
        model = load_checkpoint(checkpoint_path)
    with _stage("adjacency", wall_times):
        adjacency = _build_adjacency(method, model, test_set)
    with _stage("cluster", wall_times):
        result = cluster_graph(adjacency, spectral)
    accuracy = None
    if test_set is not None:
        with _stage("accuracy", wall_times):
            accuracy = 100.0 * evaluate_accuracy(model, test_set.images, test_set.labels)
    return _assemble_report(
        {
            "dataset": None,
            "activation": model.architecture.activation,
            "dropout": model.architecture.dropout_rate > 0,
            "method": method,
            "k": k,
            "seed": None,
            "test_accuracy_percent": accuracy,
            "checkpoint": Path(checkpoint_path).name,
            "off_protocol_k": k != 4,
            "train_config": None,
            "spectral_config": _spectral_config_dict(spectral, k),
        },
        model,
        result,
        wall_times,
    )


@dataclass
class GridResult:
    reports: list
    failures: list
    tables: dict
    summary: dict


def run_grid(
    data_dir,
    out_dir,
    seeds=(0,),
    train_cfg: TrainConfig | None = None,
    spectral: SpectralConfig | None = None,
    datasets=("mnist", "fashion_mnist"),
    layer_widths=DEFAULT_LAYER_WIDTHS,
    k: int = 4,
    progress=None,
) -> GridResult:
    """All dataset x activation x dropout cells, both methods, every seed.

    A failing cell is recorded and skipped; the rest of the grid continues.
    Writes per-experiment JSON, a grid CSV, one rendered table per method,
    and a summary JSON with the activation-ordering and dropout-effect
    checks.
    """
    train_cfg = train_cfg if train_cfg is not None else TrainConfig()
    spectral = spectral if spectral is not None else SpectralConfig(k=k)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    reports: list[ExperimentReport] = []
    failures: list[dict] = []
    cache: dict = {}
    for dataset in datasets:
        for activation in ("relu", "sigmoid"):
            for dropout in (False, True):
                for seed in seeds:
                    for method in METHODS:
                        cfg = ExperimentConfig(
                            dataset=dataset,
                            activation=activation,
                            dropout=dropout,
                            method=method,
                            k=k,
                            layer_widths=tuple(layer_widths),
                            train=replace(train_cfg, rng_seed=seed),
                            spectral=spectral,
                        )
                        label = (
                            f"{dataset}/{activation}/"
                            f"{'dropout' if dropout else 'nodropout'}/"
                            f"{method}/seed{seed}"
                        )
                        if progress is not None:
                            progress(f"running {label}")
                        try:
                            reports.append(
                                run_experiment(cfg, data_dir, out_dir, cache)
                            )
                        except Exception as e:
                            failures.append(
                                {
                                    "cell": label,
                                    "stage": getattr(e, "stage", None),
                                    "error": str(e),
                                }
                            )
    tables = {}
    for method in METHODS:
        rendered = render_method_table(reports, method)
        tables[method] = rendered
        (out_dir / f"table_{method}.txt").write_text(rendered)
    write_grid_csv(reports, out_dir / "grid.csv")
    summary = ordering_summary(reports)
    summary["failures"] = failures
    summary["seeds"] = list(seeds)
    (out_dir / "grid_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    return GridResult(reports=reports, failures=failures, tables=tables, summary=summary)


def _cell_key(r: ExperimentReport):
    return (r.method, r.dataset, r.activation, r.dropout)


def _cell_means(reports) -> dict:
    cells: dict = {}
    for r in reports:
        cells.setdefault(_cell_key(r), []).append(r)
    means = {}
    for key, rs in cells.items():
        accs = [r.test_accuracy_percent for r in rs if r.test_accuracy_percent is not None]
        means[key] = {
            "test_accuracy_percent": float(np.mean(accs)) if accs else None,
            "ncut": float(np.mean([r.ncut for r in rs])),
            "n_seeds": len(rs),
        }
    return means


def render_method_table(reports, method: str) -> str:
    """Aligned text table for one method, means over seeds per cell."""
    means = _cell_means([r for r in reports if r.method == method])
    datasets = []
    for key in means:
        if key[1] not in datasets:
            datasets.append(key[1])
    rows = [list(TABLE_COLUMNS)]
    for dataset in datasets:
        for activation, dropout in _ROW_ORDER:
            cell = means.get((method, dataset, activation, dropout))
            if cell is None:
                continue
            acc = cell["test_accuracy_percent"]
            rows.append(
                [
                    _DATASET_DISPLAY.get(dataset, dataset),
                    _ACTIVATION_DISPLAY.get(activation, activation),
                    "Yes" if dropout else "No",
                    "-" if acc is None else f"{acc:.1f}",
                    f"{cell['ncut']:.2f}",
                ]
            )
    widths = [max(len(row[i]) for row in rows) for i in range(len(TABLE_COLUMNS))]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in rows]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines) + "\n"


def grid_csv_rows(reports) -> list[list]:
    """Per-seed rows plus per-cell mean rows (seed column 'mean')."""
    header = [
        "method", "dataset", "activation", "dropout", "seed",
        "test_accuracy_percent", "ncut",
    ]
    rows = [header]
    ordered = sorted(
        reports,
        key=lambda r: (r.method, str(r.dataset), r.activation, r.dropout, str(r.seed)),
    )
    for r in ordered:
        rows.append(
            [
                r.method, r.dataset, r.activation, r.dropout, r.seed,
                r.test_accuracy_percent, r.ncut,
            ]
        )
    means = _cell_means(reports)
    if any(cell["n_seeds"] > 1 for cell in means.values()):
        for key in sorted(means, key=lambda k: tuple(str(x) for x in k)):
            method, dataset, activation, dropout = key
            cell = means[key]
            rows.append(
                [
                    method, dataset, activation, dropout, "mean",
                    cell["test_accuracy_percent"], cell["ncut"],
                ]
            )
    return rows


def write_grid_csv(reports, path) -> None:
    with open(path, "w", newline="") as f:
        csv.writer(f).writerows(grid_csv_rows(reports))


def ordering_summary(reports) -> dict:
    """Activation-ordering and dropout-effect checks over grid reports.

    ``activation_ordering`` records, for every (method, dataset, dropout)
    cell, whether the sigmoid run produced a lower ncut than the relu run;
    ``dropout_lowers_ncut`` records, for every (method, dataset, activation),
    whether enabling dropout lowered the ncut. Both are reported per seed
    and on per-cell means, with no claim asserted.
    """
    by_seed: dict = {}
    for r in reports:
        by_seed.setdefault(r.seed, []).append(r)

    def _pairs(rs, fixed_keys, vary_key, lo_value, hi_value):
        index = {}
        for r in rs:
            key = tuple(getattr(r, k) for k in fixed_keys)
            index.setdefault(key, {})[getattr(r, vary_key)] = r.ncut
        out = {}
        for key, vals in sorted(index.items(), key=lambda kv: tuple(map(str, kv[0]))):
            if lo_value in vals and hi_value in vals:
                name = "|".join(str(x) for x in key)
                out[name] = bool(vals[lo_value] < vals[hi_value])
        return out

    ordering_per_seed = {}
    dropout_per_seed = {}
    for seed, rs in sorted(by_seed.items(), key=lambda kv: str(kv[0])):
        ordering_per_seed[str(seed)] = _pairs(
            rs, ("method", "dataset", "dropout"), "activation", "sigmoid", "relu"
        )
        dropout_per_seed[str(seed)] = _pairs(
            rs, ("method", "dataset", "activation"), "dropout", True, False
        )

    means = _cell_means(reports)

    class _MeanRow:
        def __init__(self, key, ncut):
            self.method, self.dataset, self.activation, self.dropout = key
            self.ncut = ncut

    mean_rows = [_MeanRow(k, v["ncut"]) for k, v in means.items()]
    ordering_mean = _pairs(
        mean_rows, ("method", "dataset", "dropout"), "activation", "sigmoid", "relu"
    )
    dropout_mean = _pairs(
        mean_rows, ("method", "dataset", "activation"), "dropout", True, False
    )
    return {
        "activation_ordering": {
            "per_seed": ordering_per_seed,
            "per_seed_counts": {
                s: sum(v.values()) for s, v in ordering_per_seed.items()
            },
            "mean": ordering_mean,
            "mean_count": sum(ordering_mean.values()),
        },
        "dropout_lowers_ncut": {
            "per_seed": dropout_per_seed,
            "mean": dropout_mean,
        },
    }


def load_reports(reports_dir) -> list[ExperimentReport]:
    """Read every report_*.json under a directory (recursively)."""
    paths = sorted(Path(reports_dir).rglob("report_*.json"))
    return [ExperimentReport.read_json(p) for p in paths]
