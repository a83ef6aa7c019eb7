"""End-to-end experiment drivers: energy-error curves for five ansatz
variants on the Ising ring, phase classification for the Ising and XXZ
rings, and classification of a structureless random-matrix family.

Every experiment is a pure function of its config: all randomness is seeded,
outputs are written under a directory named by the config hash, and two runs
produce byte-identical files.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import classifier as clf
from .ansatz import ParametricCircuit, build_checkerboard, build_rank_one, build_tree
from .hamiltonians import build_gue_interpolation, build_tfim, build_xxz
from .vqe import VQEConfig, double_sweep, write_sweep_csv


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid; ``centered`` offsets points by half a step so none can
    land on a phase boundary, ``endpoint`` includes both ends."""

    points: int = 100
    start: float = 0.0
    end: float = 2.0
    scheme: str = "centered"

    def values(self) -> np.ndarray:
        if self.points < 1:
            raise ValueError("grid needs at least one point")
        if self.scheme == "endpoint":
            if self.points == 1:
                return np.array([self.start])
            return np.linspace(self.start, self.end, self.points)
        if self.scheme == "centered":
            step = (self.end - self.start) / self.points
            return self.start + (np.arange(self.points) + 0.5) * step
        raise ValueError(f"unknown grid scheme {self.scheme!r}")


# The five ansatz variants compared on the Ising ring: the two fixed layouts
# plus checkerboards of depth one to four.
ENERGY_COMPARISON_VARIANTS = (
    ("rank_one", 0),
    ("tree", 0),
    ("checkerboard", 1),
    ("checkerboard", 2),
    ("checkerboard", 3),
    ("checkerboard", 4),
)


def build_ansatz(name: str, n_qubits: int, n_layers: int = 0) -> ParametricCircuit:
    if name == "rank_one":
        return build_rank_one(n_qubits)
    if name == "tree":
        return build_tree(n_qubits)
    if name == "checkerboard":
        return build_checkerboard(n_qubits, n_layers, periodic=True)
    raise ValueError(f"unknown ansatz {name!r}")


@dataclass
class ExperimentConfig:
    model: str  # tfim | xxz | gue
    n_qubits: int
    grid: GridSpec
    boundary: float
    out_dir: str
    vqe_layers: int = 4
    classifier_layers: int = 4
    train_fraction: float = 0.8
    epochs: int = 300
    a0: float = 0.5
    c0: float = 0.5
    batch_size: int | None = None
    n_rotations: int = 0  # 0 disables augmentation
    xflip_mode: str = "alternate"
    vqe_seed: int = 11
    split_seed: int = 23
    train_seeds: tuple[int, ...] = (101, 102, 103, 104, 105)
    gue_seed: int = 7
    threads: int = 2
    max_iterations: int = 2000
    convergence_tol: float = 1e-7

    def vqe_config(self) -> VQEConfig:
        return VQEConfig(
            max_iterations=self.max_iterations,
            convergence_tol=self.convergence_tol,
        )

    def build_h(self):
        if self.model == "tfim":
            return lambda h: build_tfim(self.n_qubits, 1.0, h)
        if self.model == "xxz":
            return lambda jz: build_xxz(self.n_qubits, 1.0, jz)
        if self.model == "gue":
            return lambda alpha: build_gue_interpolation(self.n_qubits, alpha, self.gue_seed)
        raise ValueError(f"unknown model {self.model!r}")

    def spsa_config(self) -> clf.SPSAConfig:
        return clf.SPSAConfig(
            epochs=self.epochs, a0=self.a0, c0=self.c0, batch_size=self.batch_size
        )

    def to_json_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["grid"] = dataclasses.asdict(self.grid)
        data["train_seeds"] = list(self.train_seeds)
        return data

    @classmethod
    def from_json_dict(cls, data: dict) -> "ExperimentConfig":
        data = dict(data)
        data["grid"] = GridSpec(**data["grid"])
        data["train_seeds"] = tuple(data["train_seeds"])
        return cls(**data)

    def config_hash(self) -> str:
        payload = {k: v for k, v in self.to_json_dict().items() if k != "out_dir"}
        canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]

    def run_dir(self) -> Path:
        return Path(self.out_dir) / f"{self.model}-{self.config_hash()}"


def default_config(model: str, out_dir: str) -> ExperimentConfig:
    """Shipped configurations for the three experiments."""
    if model == "tfim":
        return ExperimentConfig(
            model="tfim",
            n_qubits=10,
            grid=GridSpec(points=100, start=0.0, end=2.0, scheme="centered"),
            boundary=1.0,
            out_dir=out_dir,
            vqe_layers=4,
            classifier_layers=4,
        )
    if model == "xxz":
        return ExperimentConfig(
            model="xxz",
            n_qubits=10,
            grid=GridSpec(points=100, start=0.0, end=2.0, scheme="centered"),
            boundary=1.0,
            out_dir=out_dir,
            vqe_layers=4,
            classifier_layers=6,
            n_rotations=40,
            xflip_mode="alternate",
            batch_size=400,
        )
    if model == "gue":
        return ExperimentConfig(
            model="gue",
            n_qubits=6,
            grid=GridSpec(points=100, start=0.0, end=1.0, scheme="centered"),
            boundary=0.5,
            out_dir=out_dir,
            vqe_layers=4,
            classifier_layers=4,
            train_fraction=0.7,
        )
    raise ValueError(f"unknown model {model!r}")


def _write_json(path: Path, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, sort_keys=True, indent=1))


def write_gnuplot_dat(path, header: list[str], columns: list[np.ndarray]) -> None:
    """Whitespace-separated table with a commented header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    rows = ["# " + " ".join(header)]
    for values in zip(*columns):
        rows.append(" ".join(repr(float(v)) for v in values))
    path.write_text("\n".join(rows) + "\n")


# ---------------------------------------------------------------------------
# Energy-error comparison across ansatz variants.


def run_energy_comparison(cfg: ExperimentConfig, *, variants=ENERGY_COMPARISON_VARIANTS) -> dict:
    """Sweep every ansatz variant over the grid and record |E_vqe - E_exact|.

    One sweep CSV per variant plus a combined gnuplot-ready error table.
    """
    if cfg.model != "tfim":
        raise ValueError("the energy comparison is defined for the tfim model")
    run_dir = cfg.run_dir()
    grid = cfg.grid.values()
    build_h = cfg.build_h()
    curves: dict[str, list] = {}
    for name, layers in variants:
        circuit = build_ansatz(name, cfg.n_qubits, layers)
        variant = name if name != "checkerboard" else f"checkerboard_l{layers}"
        best = double_sweep(
            build_h,
            circuit,
            grid,
            cfg.vqe_config(),
            cfg.vqe_seed,
            threads=cfg.threads,
        )
        curves[variant] = best
        write_sweep_csv(
            run_dir / f"sweep_{variant}.csv",
            best,
            circuit,
            cfg.vqe_config(),
            metadata={"model": cfg.model, "variant": variant, "boundary": cfg.boundary},
        )
    errors = {
        variant: np.array([abs(s.energy - s.exact_energy) for s in best])
        for variant, best in curves.items()
    }
    write_gnuplot_dat(
        run_dir / "energy_errors.dat",
        ["model_param"] + list(errors),
        [grid] + [errors[v] for v in errors],
    )
    summary = {
        "config": cfg.to_json_dict(),
        "max_error": {v: float(e.max()) for v, e in errors.items()},
        "argmax_param": {v: float(grid[int(np.argmax(e))]) for v, e in errors.items()},
        "endpoint_error": {
            v: [float(e[0]), float(e[-1])] for v, e in errors.items()
        },
    }
    _write_json(run_dir / "energy_summary.json", summary)
    return {"curves": curves, "errors": errors, "grid": grid, "run_dir": run_dir}


# ---------------------------------------------------------------------------
# Phase classification.


def _build_dataset(cfg: ExperimentConfig):
    """Double-sweep the model, label each point, split, then (xxz) augment."""
    circuit = build_checkerboard(cfg.n_qubits, cfg.vqe_layers, periodic=True)
    best, up, down = double_sweep(
        cfg.build_h(),
        circuit,
        cfg.grid.values(),
        cfg.vqe_config(),
        cfg.vqe_seed,
        boundary=cfg.boundary,
        threads=cfg.threads,
        keep_directions=True,
    )
    base = clf.dataset_from_sweep(best, circuit, cfg.train_fraction, cfg.split_seed)
    dataset = base
    if cfg.n_rotations > 0:
        dataset = clf.augment_dataset(base, cfg.n_rotations, cfg.xflip_mode)
    return circuit, best, up, down, base, dataset


def _train_seeds(cfg: ExperimentConfig, dataset, states):
    """Train one model per seed and evaluate each on both splits.

    Each seed draws its own source-level train/test split, so the reported
    accuracies sample the split variability as well as the training noise.
    Seeds are independent and run in parallel.
    """
    spsa = cfg.spsa_config()

    def one(seed: int):
        ds = clf.resplit(dataset, cfg.train_fraction, seed)
        model = clf.train(ds, cfg.classifier_layers, spsa, seed, states=states)
        return {
            "seed": seed,
            "model": model,
            "dataset": ds,
            "train_accuracy": clf.evaluate(model, ds, "train", states=states),
            "test_accuracy": clf.evaluate(model, ds, "test", states=states),
        }

    if cfg.threads > 1 and len(cfg.train_seeds) > 1:
        with ThreadPoolExecutor(max_workers=min(cfg.threads, len(cfg.train_seeds))) as pool:
            results = list(pool.map(one, cfg.train_seeds))
    else:
        results = [one(seed) for seed in cfg.train_seeds]
    return results


def run_phase_classification(cfg: ExperimentConfig) -> dict:
    """Dataset build, training over the configured seeds, accuracy report,
    and the predicted-probability curve over the original grid points."""
    run_dir = cfg.run_dir()
    circuit, best, up, down, base, dataset = _build_dataset(cfg)
    write_sweep_csv(
        run_dir / "sweep_best.csv", best, circuit, cfg.vqe_config(),
        metadata={"model": cfg.model, "boundary": cfg.boundary, "direction": "best"},
    )
    write_sweep_csv(
        run_dir / "sweep_up.csv", up, circuit, cfg.vqe_config(),
        metadata={"model": cfg.model, "boundary": cfg.boundary, "direction": "up"},
    )
    write_sweep_csv(
        run_dir / "sweep_down.csv", down, circuit, cfg.vqe_config(),
        metadata={"model": cfg.model, "boundary": cfg.boundary, "direction": "down"},
    )
    clf.write_dataset_csv(
        run_dir / "dataset.csv", dataset, metadata={"model": cfg.model, "boundary": cfg.boundary}
    )

    states = clf.prepare_states(dataset.layout, dataset.params)
    results = _train_seeds(cfg, dataset, states)
    for res in results:
        clf.save_model(run_dir / f"model_seed{res['seed']}.json", res["model"])

    # Label curve from the best model by training accuracy (deterministic
    # tie-break on seed order).
    best_res = max(results, key=lambda r: (r["train_accuracy"], -r["seed"]))
    curve_p = clf.predict(best_res["model"], base, "all")
    grid = np.array([s.model_param for s in best])
    write_gnuplot_dat(
        run_dir / "label_curve.dat",
        ["model_param", "predicted_p", "label"],
        [grid, curve_p, np.array([float(s.label) for s in best])],
    )
    summary = {
        "config": cfg.to_json_dict(),
        "accuracies": {
            str(r["seed"]): {
                "train": float(r["train_accuracy"]),
                "test": float(r["test_accuracy"]),
            }
            for r in results
        },
        "curve_seed": best_res["seed"],
        "n_rows": dataset.n_rows,
        "n_train": int(dataset.train_idx.size),
        "n_test": int(dataset.test_idx.size),
    }
    _write_json(run_dir / "classification_summary.json", summary)
    return {
        "run_dir": run_dir,
        "circuit": circuit,
        "sweeps": {"best": best, "up": up, "down": down},
        "base_dataset": base,
        "dataset": dataset,
        "states": states,
        "results": results,
        "curve": (grid, curve_p),
        "summary": summary,
    }


# ---------------------------------------------------------------------------
# Random-matrix (GUE interpolation) classification.


def run_gue_experiment(cfg: ExperimentConfig) -> dict:
    """VQE over the interpolation parameter of a seeded random Hermitian
    pair, then train and score the classifier on a 70/30 split."""
    if cfg.model != "gue":
        raise ValueError("config model must be 'gue'")
    out = run_phase_classification(cfg)
    results = out["results"]
    best_res = max(results, key=lambda r: (r["train_accuracy"], -r["seed"]))
    out["model"] = best_res["model"]
    out["accuracy"] = best_res["test_accuracy"]
    return out
