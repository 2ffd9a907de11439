"""Command-line interface.

Subcommands: ``train``, ``analyze``, ``grid``, ``report``. Exit codes:
0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .checkpoint import CheckpointError, save_checkpoint
from .data import SPLIT_FILES, DataError, load_dataset, load_split_files
from .harness import (
    ExperimentConfig,
    StageError,
    analyze_checkpoint,
    checkpoint_filename,
    load_reports,
    render_method_table,
    run_grid,
    write_grid_csv,
)
from .mlp import (
    DEFAULT_LAYER_WIDTHS,
    MlpArchitecture,
    TrainConfig,
    TrainingDivergedError,
    train,
)
from .spectral import EigensolverError, SpectralConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract here is exit code 1
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="mlpmod", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train one MLP and write a checkpoint")
    p_train.add_argument("--dataset", required=True, choices=["mnist", "fashion_mnist"])
    p_train.add_argument("--activation", required=True, choices=["relu", "sigmoid"])
    p_train.add_argument("--dropout", action="store_true")
    p_train.add_argument("--epochs", type=int, default=20)
    p_train.add_argument("--seed", type=int, default=0)
    p_train.add_argument("--data-dir", required=True)
    p_train.add_argument("--out", required=True)

    p_an = sub.add_parser("analyze", help="cluster a stored checkpoint")
    p_an.add_argument("--checkpoint", required=True)
    p_an.add_argument("--method", required=True, choices=["weights", "spearman"])
    p_an.add_argument("--data-dir", default=None,
                      help="directory holding the t10k-* IDX files (spearman/accuracy)")
    p_an.add_argument("--k", type=int, default=4)
    p_an.add_argument("--seed", type=int, default=0,
                      help="clustering rng seed")
    p_an.add_argument("--out", required=True)

    p_grid = sub.add_parser("grid", help="run the full experiment grid")
    p_grid.add_argument("--seeds", default="0",
                        help="comma-separated training seeds (default: 0)")
    p_grid.add_argument("--epochs", type=int, default=20)
    p_grid.add_argument("--data-dir", required=True)
    p_grid.add_argument("--out", required=True)

    p_rep = sub.add_parser("report", help="render tables from stored report JSON")
    p_rep.add_argument("--in", dest="in_dir", required=True)
    return parser


def _cmd_train(args) -> int:
    dataset = load_dataset(args.dataset, args.data_dir)
    arch = MlpArchitecture(
        layer_widths=DEFAULT_LAYER_WIDTHS,
        activation=args.activation,
        dropout_rate=0.5 if args.dropout else 0.0,
    )
    train_cfg = TrainConfig(epochs=args.epochs, rng_seed=args.seed)
    model, accuracy = train(dataset, arch, train_cfg)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = ExperimentConfig(
        dataset=args.dataset,
        activation=args.activation,
        dropout=args.dropout,
        train=train_cfg,
    )
    ckpt = out_dir / checkpoint_filename(cfg)
    save_checkpoint(model, ckpt)
    summary = {
        "dataset": args.dataset,
        "activation": args.activation,
        "dropout": args.dropout,
        "epochs": args.epochs,
        "seed": args.seed,
        "test_accuracy_percent": 100.0 * accuracy,
        "checkpoint": ckpt.name,
    }
    (out_dir / (ckpt.stem + ".json")).write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n"
    )
    print(f"wrote {ckpt}")
    print(f"test accuracy: {100.0 * accuracy:.2f}%")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    test_set = None
    if args.data_dir is not None:
        images_name, labels_name = SPLIT_FILES["test"]
        directory = Path(args.data_dir)

        def find(base):
            for cand in (directory / base, directory / (base + ".gz")):
                if cand.is_file():
                    return cand
            raise DataError(f"missing test file: {directory / base}[.gz]")

        test_set = load_split_files(find(images_name), find(labels_name), "test")
    if args.method == "spearman" and test_set is None:
        raise UsageError("--method spearman requires --data-dir with the test split")
    report = analyze_checkpoint(
        args.checkpoint,
        args.method,
        spectral=SpectralConfig(k=args.k, rng_seed=args.seed),
        test_set=test_set,
        k=args.k,
    )
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_path = out_dir / f"analysis_{Path(args.checkpoint).stem}_{args.method}.json"
    report.write_json(out_path)
    print(f"wrote {out_path}")
    print(f"ncut: {report.ncut:.6f}")
    return EXIT_OK


def _cmd_grid(args) -> int:
    try:
        seeds = [int(s) for s in args.seeds.split(",") if s.strip() != ""]
    except ValueError as e:
        raise UsageError(f"bad --seeds value {args.seeds!r}") from e
    if not seeds:
        raise UsageError("--seeds must name at least one seed")
    result = run_grid(
        args.data_dir,
        args.out,
        seeds=seeds,
        train_cfg=TrainConfig(epochs=args.epochs),
        progress=lambda msg: print(msg, flush=True),
    )
    for method, table in result.tables.items():
        print(f"\n[{method}]")
        print(table, end="")
    if result.failures:
        print(f"\n{len(result.failures)} cell(s) failed:")
        for failure in result.failures:
            print(f"  {failure['cell']}: {failure['error']}")
    print(f"\nwrote grid outputs under {args.out}")
    return EXIT_OK


def _cmd_report(args) -> int:
    reports = load_reports(args.in_dir)
    if not reports:
        raise DataError(f"no report_*.json files under {args.in_dir}")
    for method in ("weights", "spearman"):
        if any(r.method == method for r in reports):
            rendered = render_method_table(reports, method)
            print(f"[{method}]")
            print(rendered)
            (Path(args.in_dir) / f"table_{method}.txt").write_text(rendered)
    write_grid_csv(reports, Path(args.in_dir) / "grid.csv")
    print(f"wrote tables and grid.csv under {args.in_dir}")
    return EXIT_OK


_COMMANDS = {
    "train": _cmd_train,
    "analyze": _cmd_analyze,
    "grid": _cmd_grid,
    "report": _cmd_report,
}

_DATA_ERRORS = (DataError, CheckpointError, FileNotFoundError)
_NUMERICAL_ERRORS = (
    TrainingDivergedError,
    EigensolverError,
    np.linalg.LinAlgError,
    ArithmeticError,
)


def _classify(exc: BaseException) -> int:
    if isinstance(exc, StageError) and exc.__cause__ is not None:
        return _classify(exc.__cause__)
    if isinstance(exc, _DATA_ERRORS):
        return EXIT_DATA
    if isinstance(exc, _NUMERICAL_ERRORS):
        return EXIT_NUMERICAL
    return EXIT_NUMERICAL


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as e:
        code = _classify(e)
        kind = "data error" if code == EXIT_DATA else "numerical failure"
        print(f"{kind}: {e}", file=sys.stderr)
        return code


if __name__ == "__main__":
    sys.exit(main())
