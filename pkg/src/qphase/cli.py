"""Command-line front end for scripted reproduction of the experiments.

One binary, subcommand style.  Every command prints a machine-readable JSON
summary on stdout, is bit-reproducible given --seed, and writes only under
--out.  A JSON file passed via --config supplies defaults for any flag; a
flag given explicitly on the command line wins.  Exit codes: 0 success,
1 runtime failure, 2 bad flags.  Thread count falls back to the
QPHASE_THREADS environment variable, then to the machine parallelism.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import classifier as clf
from .ansatz import build_checkerboard, build_rank_one, build_tree
from .experiments import (
    ExperimentConfig,
    GridSpec,
    default_config,
    run_energy_comparison,
    run_gue_experiment,
    run_phase_classification,
)
from .hamiltonians import build_gue_interpolation, build_tfim, build_xxz, exact_ground
from .vqe import VQEConfig, double_sweep, read_sweep_csv, sweep, write_sweep_csv

DEFAULT_BOUNDARY = {"tfim": 1.0, "xxz": 1.0, "gue": 0.5}
DEFAULT_GRID_END = {"tfim": 2.0, "xxz": 2.0, "gue": 1.0}


def resolve_threads(value: int | None) -> int:
    if value is not None:
        return max(1, int(value))
    env = os.environ.get("QPHASE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    return json.loads(Path(path).read_text())


def _opt(args, config: dict, name: str, default=None):
    """Flag value if given, else config-file value, else default."""
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _require(value, flag: str):
    if value is None:
        raise SystemExit2(f"missing required option {flag}")
    return value


class SystemExit2(Exception):
    """Bad flags detected after parsing (exit code 2)."""


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _model_builder(model: str, n: int, gue_seed: int):
    if model == "tfim":
        return lambda h: build_tfim(n, 1.0, h)
    if model == "xxz":
        return lambda jz: build_xxz(n, 1.0, jz)
    if model == "gue":
        return lambda alpha: build_gue_interpolation(n, alpha, gue_seed)
    raise SystemExit2(f"unknown model {model!r}")


def _build_ansatz(name: str, n: int, layers: int):
    if name in ("rank1", "rank_one"):
        return build_rank_one(n)
    if name == "tree":
        return build_tree(n)
    if name == "checkerboard":
        return build_checkerboard(n, layers, periodic=True)
    raise SystemExit2(f"unknown ansatz {name!r}")


# ---------------------------------------------------------------------------
# Commands.


def cmd_vqe_sweep(args) -> int:
    config = _load_config(args.config)
    model = _require(_opt(args, config, "model"), "--model")
    n = int(_require(_opt(args, config, "n"), "--n"))
    ansatz = _opt(args, config, "ansatz", "checkerboard")
    layers = int(_opt(args, config, "layers", 4))
    seed = int(_opt(args, config, "seed", 11))
    out = Path(_require(_opt(args, config, "out"), "--out"))
    direction = _opt(args, config, "direction", "both")
    grid = GridSpec(
        points=int(_opt(args, config, "grid_points", 100)),
        start=float(_opt(args, config, "grid_start", 0.0)),
        end=float(_opt(args, config, "grid_end", DEFAULT_GRID_END[model])),
        scheme=_opt(args, config, "grid_scheme", "centered"),
    )
    boundary = float(_opt(args, config, "boundary", DEFAULT_BOUNDARY[model]))
    threads = resolve_threads(_opt(args, config, "threads"))
    vqe_config = VQEConfig(max_iterations=int(_opt(args, config, "max_iterations", 2000)))

    circuit = _build_ansatz(ansatz, n, layers)
    build_h = _model_builder(model, n, int(_opt(args, config, "gue_seed", 7)))
    if direction == "both":
        samples = double_sweep(
            build_h, circuit, grid.values(), vqe_config, seed,
            boundary=boundary, threads=threads,
        )
    elif direction in ("up", "down"):
        samples = sweep(
            build_h, circuit, grid.values(), direction, vqe_config, seed,
            boundary=boundary,
        )
    else:
        raise SystemExit2(f"unknown direction {direction!r}")
    metadata = {
        "model": model,
        "n_qubits": n,
        "ansatz": ansatz,
        "layers": layers,
        "boundary": boundary,
        "grid": {"points": grid.points, "start": grid.start, "end": grid.end, "scheme": grid.scheme},
        "direction": direction,
        "seed": seed,
    }
    write_sweep_csv(out, samples, circuit, vqe_config, metadata=metadata)
    _emit(
        {
            "command": "vqe-sweep",
            "csv": str(out),
            "rows": len(samples),
            "max_abs_error": max(abs(s.energy - s.exact_energy) for s in samples),
        }
    )
    return 0


def cmd_oracle(args) -> int:
    config = _load_config(args.config)
    model = _require(_opt(args, config, "model"), "--model")
    n = int(_require(_opt(args, config, "n"), "--n"))
    param = float(_require(_opt(args, config, "param"), "--param"))
    build_h = _model_builder(model, n, int(_opt(args, config, "gue_seed", 7)))
    energy_value, _state = exact_ground(build_h(param))
    _emit({"command": "oracle", "model": model, "n": n, "param": param, "energy": energy_value})
    return 0


def _read_any_dataset(path: Path, split_fraction: float, split_seed: int) -> clf.LabeledDataset:
    """Dataset CSVs load directly; sweep CSVs get a seeded split attached."""
    with path.open() as fh:
        header = fh.readline()
    if "augmentation_source" in header:
        return clf.read_dataset_csv(path)
    samples, sidecar = read_sweep_csv(path)
    from .ansatz import ParametricCircuit

    layout = ParametricCircuit.from_json_dict(sidecar["layout"])
    return clf.dataset_from_sweep(samples, layout, split_fraction, split_seed)


def cmd_augment(args) -> int:
    config = _load_config(args.config)
    src = Path(_require(_opt(args, config, "inp"), "--in"))
    out = Path(_require(_opt(args, config, "out"), "--out"))
    rotations = int(_require(_opt(args, config, "rotations"), "--rotations"))
    xflip = bool(_opt(args, config, "xflip", False))
    split_fraction = float(_opt(args, config, "split", 0.8))
    split_seed = int(_opt(args, config, "split_seed", 23))
    dataset = _read_any_dataset(src, split_fraction, split_seed)
    augmented = clf.augment_dataset(
        dataset, rotations, "pairs" if xflip else "none"
    )
    clf.write_dataset_csv(out, augmented, metadata={"source": src.name, "rotations": rotations, "xflip": xflip})
    _emit(
        {
            "command": "augment",
            "csv": str(out),
            "rows_in": dataset.n_rows,
            "rows_out": augmented.n_rows,
        }
    )
    return 0


def cmd_train(args) -> int:
    config = _load_config(args.config)
    data = Path(_require(_opt(args, config, "data"), "--data"))
    out = Path(_require(_opt(args, config, "out"), "--out"))
    layers = int(_opt(args, config, "layers", 4))
    seed = int(_opt(args, config, "seed", 101))
    split_fraction = float(_opt(args, config, "split", 0.8))
    split_seed = int(_opt(args, config, "split_seed", 23))
    spsa = clf.SPSAConfig(
        epochs=int(_opt(args, config, "epochs", 300)),
        a0=float(_opt(args, config, "a0", 0.5)),
        c0=float(_opt(args, config, "c0", 0.5)),
        batch_size=_opt(args, config, "batch"),
    )
    dataset = _read_any_dataset(data, split_fraction, split_seed)
    states = clf.prepare_states(dataset.layout, dataset.params)
    model = clf.train(dataset, layers, spsa, seed, states=states)
    out.parent.mkdir(parents=True, exist_ok=True)
    clf.save_model(out, model)
    _emit(
        {
            "command": "train",
            "model_file": str(out),
            "train_accuracy": clf.evaluate(model, dataset, "train", states=states),
            "test_accuracy": clf.evaluate(model, dataset, "test", states=states),
            "first_loss": model.training_history[0][1],
            "final_loss": model.training_history[-1][1],
        }
    )
    return 0


def cmd_evaluate(args) -> int:
    config = _load_config(args.config)
    model_file = Path(_require(_opt(args, config, "model_file"), "--model-file"))
    data = Path(_require(_opt(args, config, "data"), "--data"))
    split = _opt(args, config, "split", "test")
    split_fraction = float(_opt(args, config, "split_fraction", 0.8))
    split_seed = int(_opt(args, config, "split_seed", 23))
    model = clf.load_model(model_file)
    dataset = _read_any_dataset(data, split_fraction, split_seed)
    if _opt(args, config, "resplit", False):
        # reproduce the per-seed source-level split an experiment run used
        dataset = clf.resplit(dataset, split_fraction, split_seed)
    accuracy = clf.evaluate(model, dataset, split)
    _emit({"command": "evaluate", "split": split, "accuracy": accuracy})
    return 0


def cmd_experiment(args) -> int:
    if args.experiment_config is not None:
        cfg = ExperimentConfig.from_json_dict(json.loads(Path(args.experiment_config).read_text()))
        if args.out is not None:
            cfg = ExperimentConfig.from_json_dict({**cfg.to_json_dict(), "out_dir": args.out})
    else:
        model = _require(args.model, "--model (or --config)")
        out = _require(args.out, "--out")
        cfg = default_config(model, out)
    if args.threads is not None or os.environ.get("QPHASE_THREADS"):
        cfg.threads = resolve_threads(args.threads)
    if args.energy_comparison:
        result = run_energy_comparison(cfg)
        _emit(
            {
                "command": "experiment",
                "kind": "energy_comparison",
                "run_dir": str(result["run_dir"]),
                "max_error": {k: float(v.max()) for k, v in result["errors"].items()},
            }
        )
        return 0
    if cfg.model == "gue":
        result = run_gue_experiment(cfg)
    else:
        result = run_phase_classification(cfg)
    _emit(
        {
            "command": "experiment",
            "kind": "phase_classification",
            "run_dir": str(result["run_dir"]),
            "accuracies": result["summary"]["accuracies"],
        }
    )
    return 0


def cmd_knn(args) -> int:
    config = _load_config(args.config)
    train_path = Path(_require(_opt(args, config, "train"), "--train"))
    query_path = Path(_require(_opt(args, config, "query"), "--query"))
    k = int(_opt(args, config, "k", 1))
    split_fraction = float(_opt(args, config, "split", 0.8))
    split_seed = int(_opt(args, config, "split_seed", 23))
    train_ds = _read_any_dataset(train_path, split_fraction, split_seed)
    query_ds = _read_any_dataset(query_path, split_fraction, split_seed)
    if train_ds.layout_hash != query_ds.layout_hash:
        raise ValueError("train and query files use different circuit layouts")
    labels = [
        clf.knn_overlap_label(
            train_ds.params, train_ds.labels, train_ds.layout, query_ds.params[r], k
        )
        for r in range(query_ds.n_rows)
    ]
    payload = {"command": "knn", "k": k, "labels": labels}
    payload["accuracy"] = float(np.mean(np.asarray(labels) == query_ds.labels))
    _emit(payload)
    return 0


# ---------------------------------------------------------------------------
# Parser.


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qphase",
        description="Variational ground-state sweeps and quantum phase classification.",
        epilog="Defaults may come from --config (JSON); explicit flags win.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sweep_p = sub.add_parser("vqe-sweep", help="double-sweep a model parameter grid")
    sweep_p.add_argument("--model", choices=("tfim", "xxz", "gue"))
    sweep_p.add_argument("--n", type=int)
    sweep_p.add_argument("--ansatz", choices=("rank1", "tree", "checkerboard"))
    sweep_p.add_argument("--layers", type=int)
    sweep_p.add_argument("--grid-start", dest="grid_start", type=float)
    sweep_p.add_argument("--grid-end", dest="grid_end", type=float)
    sweep_p.add_argument("--grid-points", dest="grid_points", type=int)
    sweep_p.add_argument("--grid-scheme", dest="grid_scheme", choices=("centered", "endpoint"))
    sweep_p.add_argument("--direction", choices=("both", "up", "down"))
    sweep_p.add_argument("--boundary", type=float)
    sweep_p.add_argument("--seed", type=int)
    sweep_p.add_argument("--gue-seed", dest="gue_seed", type=int)
    sweep_p.add_argument("--max-iterations", dest="max_iterations", type=int)
    sweep_p.add_argument("--out")
    sweep_p.set_defaults(func=cmd_vqe_sweep)

    oracle_p = sub.add_parser("oracle", help="exact ground energy of a model instance")
    oracle_p.add_argument("--model", choices=("tfim", "xxz", "gue"))
    oracle_p.add_argument("--n", type=int)
    oracle_p.add_argument("--param", type=float)
    oracle_p.add_argument("--gue-seed", dest="gue_seed", type=int)
    oracle_p.set_defaults(func=cmd_oracle)

    augment_p = sub.add_parser("augment", help="expand a dataset with symmetry copies")
    augment_p.add_argument("--in", dest="inp")
    augment_p.add_argument("--out")
    augment_p.add_argument("--rotations", type=int)
    augment_p.add_argument("--xflip", action="store_true", default=None)
    augment_p.add_argument("--split", type=float)
    augment_p.add_argument("--split-seed", dest="split_seed", type=int)
    augment_p.set_defaults(func=cmd_augment)

    train_p = sub.add_parser("train", help="train the majority-vote classifier")
    train_p.add_argument("--data")
    train_p.add_argument("--layers", type=int)
    train_p.add_argument("--epochs", type=int)
    train_p.add_argument("--a0", type=float)
    train_p.add_argument("--c0", type=float)
    train_p.add_argument("--batch", type=int)
    train_p.add_argument("--seed", type=int)
    train_p.add_argument("--split", type=float)
    train_p.add_argument("--split-seed", dest="split_seed", type=int)
    train_p.add_argument("--out")
    train_p.set_defaults(func=cmd_train)

    eval_p = sub.add_parser("evaluate", help="accuracy of a saved model on a dataset split")
    eval_p.add_argument("--model-file", dest="model_file")
    eval_p.add_argument("--data")
    eval_p.add_argument("--split", choices=("train", "test", "all"))
    eval_p.add_argument("--split-fraction", dest="split_fraction", type=float)
    eval_p.add_argument("--split-seed", dest="split_seed", type=int)
    eval_p.add_argument("--resplit", action="store_true", default=None,
                        help="re-draw the source-level split from --split-seed")
    eval_p.set_defaults(func=cmd_evaluate)

    exp_p = sub.add_parser("experiment", help="run a full experiment from a config")
    exp_p.add_argument("--config", dest="experiment_config")
    exp_p.add_argument("--model", choices=("tfim", "xxz", "gue"))
    exp_p.add_argument("--out")
    exp_p.add_argument("--energy-comparison", action="store_true")
    exp_p.set_defaults(func=cmd_experiment)

    knn_p = sub.add_parser("knn", help="overlap k-nearest-neighbour labelling")
    knn_p.add_argument("--train")
    knn_p.add_argument("--query")
    knn_p.add_argument("--k", type=int)
    knn_p.add_argument("--split", type=float)
    knn_p.add_argument("--split-seed", dest="split_seed", type=int)
    knn_p.set_defaults(func=cmd_knn)

    for sub_parser in (sweep_p, oracle_p, augment_p, train_p, eval_p, knn_p):
        sub_parser.add_argument("--config", help="JSON file with default option values")
    for sub_parser in (sweep_p, train_p, eval_p, exp_p, knn_p, augment_p, oracle_p):
        sub_parser.add_argument("--threads", type=int)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 2
    except Exception as exc:  # runtime failure contract: exit 1, message on stderr
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
