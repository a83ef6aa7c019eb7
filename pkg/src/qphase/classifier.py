"""Quantum majority-vote phase classifier.

A data row is the parameter vector of a state-preparation circuit.  The
classifier applies a trainable checkerboard circuit on top of the prepared
state and reads out the probability that strictly more than half of the
qubits measure 1 (ties excluded).  Training minimizes the logarithmic loss
with simultaneous-perturbation stochastic approximation (SPSA), both the
step size and the perturbation size decaying as 1/sqrt(epoch).

Also provided: the multi-class readout that assigns bitstrings to the
Hamming-nearest codeword, and a k-nearest-neighbour baseline that labels a
query by state overlap with the training rows.
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from .ansatz import ParametricCircuit, augment_rotation, augment_xflip, build_checkerboard
from .simulator import Statevector, apply_circuit_array, apply_circuit_columns, run_circuit

LOSS_CLIP = 1e-12


# ---------------------------------------------------------------------------
# Majority-vote readout.


@lru_cache(maxsize=None)
def _majority_signs(n_qubits: int) -> np.ndarray:
    """+1 where a basis state has a strict majority of ones, -1 for a strict
    majority of zeros, 0 on even-n ties."""
    dim = 1 << n_qubits
    ones = np.array([bin(i).count("1") for i in range(dim)], dtype=np.int64)
    signs = np.zeros(dim, dtype=np.int8)
    signs[2 * ones > n_qubits] = 1
    signs[2 * ones < n_qubits] = -1
    return signs


def _majority_from_probs(probs: np.ndarray, n_qubits: int) -> np.ndarray:
    """Vectorized majority probability for probability rows (..., 2**n)."""
    signs = _majority_signs(n_qubits)
    q1 = probs @ (signs == 1).astype(np.float64)
    q0 = probs @ (signs == -1).astype(np.float64)
    total = q0 + q1
    out = np.full(np.shape(q1), 0.5)
    nz = total > 0.0
    out[nz] = q1[nz] / total[nz]
    return out


def majority_probability(
    state: Statevector,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """P(majority votes 1) / P(any strict majority), ties excluded.

    The all-ties corner case (no strict majority weight at all) is defined
    as 0.5.  ``shots`` switches to sampled counts for realism studies.
    """
    if shots is not None:
        if shots <= 0:
            raise ValueError("shots must be positive")
        if rng is None:
            rng = np.random.default_rng()
        probs = state.probabilities()
        counts = rng.multinomial(shots, probs / probs.sum()).astype(np.float64)
        return float(_majority_from_probs(counts[None, :] / shots, state.n_qubits)[0])
    probs = state.probabilities()
    return float(_majority_from_probs(probs[None, :], state.n_qubits)[0])


# ---------------------------------------------------------------------------
# Datasets.


@dataclass(eq=False)
class LabeledDataset:
    """Parameter-vector rows with binary labels and a recorded train/test split.

    ``source_index`` tracks which original sweep row produced each row, so
    augmented copies of one source never straddle the split.
    """

    params: np.ndarray  # (n_rows, n_params)
    labels: np.ndarray  # (n_rows,) of 0/1
    layout: ParametricCircuit
    train_idx: np.ndarray
    test_idx: np.ndarray
    source_index: np.ndarray | None = None
    model_params: np.ndarray | None = None  # per-row model parameter, if known

    def __post_init__(self):
        self.params = np.asarray(self.params, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.params.ndim != 2 or self.params.shape[0] != self.labels.shape[0]:
            raise ValueError("params and labels row counts differ")
        if self.params.shape[1] != self.layout.n_params:
            raise ValueError("row width does not match the layout")
        if self.source_index is None:
            self.source_index = np.arange(self.params.shape[0])
        self.source_index = np.asarray(self.source_index, dtype=np.int64)
        self.train_idx = np.asarray(self.train_idx, dtype=np.int64)
        self.test_idx = np.asarray(self.test_idx, dtype=np.int64)

    @property
    def layout_hash(self) -> str:
        return self.layout.layout_hash()

    @property
    def n_rows(self) -> int:
        return int(self.params.shape[0])

    def rows(self, split: str) -> np.ndarray:
        if split == "train":
            return self.train_idx
        if split == "test":
            return self.test_idx
        if split == "all":
            return np.arange(self.n_rows)
        raise ValueError(f"unknown split {split!r}")


def split_dataset(
    params: np.ndarray,
    labels: np.ndarray,
    layout: ParametricCircuit,
    train_fraction: float,
    seed: int,
    *,
    model_params: np.ndarray | None = None,
) -> LabeledDataset:
    """Shuffle rows with a recorded seed and split train/test by fraction."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = np.asarray(params).shape[0]
    order = np.random.default_rng(seed).permutation(n)
    n_train = int(round(train_fraction * n))
    if n_train == 0 or n_train == n:
        raise ValueError("split leaves one side empty")
    return LabeledDataset(
        params=params,
        labels=labels,
        layout=layout,
        train_idx=np.sort(order[:n_train]),
        test_idx=np.sort(order[n_train:]),
        model_params=model_params,
    )


def resplit(dataset: LabeledDataset, train_fraction: float, seed: int) -> LabeledDataset:
    """Fresh train/test assignment at the source-row level.

    Shuffling sources (not rows) keeps all augmented copies of one original
    sweep point on the same side of the split for any seed.
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    sources = np.unique(dataset.source_index)
    order = np.random.default_rng(seed).permutation(sources.size)
    n_train = int(round(train_fraction * sources.size))
    if n_train == 0 or n_train == sources.size:
        raise ValueError("split leaves one side empty")
    train_sources = set(sources[order[:n_train]].tolist())
    rows = np.arange(dataset.n_rows)
    in_train = np.array([s in train_sources for s in dataset.source_index.tolist()])
    return LabeledDataset(
        params=dataset.params,
        labels=dataset.labels,
        layout=dataset.layout,
        train_idx=rows[in_train],
        test_idx=rows[~in_train],
        source_index=dataset.source_index,
        model_params=dataset.model_params,
    )


def augment_dataset(
    dataset: LabeledDataset,
    n_rotations: int,
    xflip_mode: str = "alternate",
) -> LabeledDataset:
    """Expand every row into symmetry copies of the same prepared state.

    Rotation angles are ``2*pi*j/n_rotations``.  ``xflip_mode``:

    * ``"none"``      - rotations only (factor n_rotations);
    * ``"alternate"`` - odd-numbered copies also spin-flipped (same factor);
    * ``"pairs"``     - every rotation emitted with and without the flip
                        (factor 2*n_rotations).

    The split is inherited per source row, so copies never leak across it.
    """
    if n_rotations < 1:
        raise ValueError("n_rotations must be positive")
    if xflip_mode not in ("none", "alternate", "pairs"):
        raise ValueError(f"unknown xflip_mode {xflip_mode!r}")
    circuit = dataset.layout
    variants: list[tuple[float, bool]] = []
    for j in range(n_rotations):
        phi = 2.0 * math.pi * j / n_rotations
        if xflip_mode == "pairs":
            variants.append((phi, False))
            variants.append((phi, True))
        else:
            variants.append((phi, xflip_mode == "alternate" and j % 2 == 1))

    out_params = []
    out_labels = []
    out_source = []
    out_model = []
    for row in range(dataset.n_rows):
        base = dataset.params[row]
        for phi, flip in variants:
            circ, vec = augment_rotation(circuit, base, phi)
            if flip:
                circ, vec = augment_xflip(circ, vec)
            if circ is not circuit and circ.layout_hash() != circuit.layout_hash():
                # Odd n upgrades the layout once; adopt it for every row.
                circuit = circ
            out_params.append(vec)
            out_labels.append(dataset.labels[row])
            out_source.append(dataset.source_index[row])
            if dataset.model_params is not None:
                out_model.append(dataset.model_params[row])

    factor = len(variants)
    train = np.concatenate(
        [np.arange(factor) + factor * r for r in dataset.train_idx]
    )
    test = np.concatenate([np.arange(factor) + factor * r for r in dataset.test_idx])
    return LabeledDataset(
        params=np.array(out_params),
        labels=np.array(out_labels),
        layout=circuit,
        train_idx=np.sort(train),
        test_idx=np.sort(test),
        source_index=np.array(out_source),
        model_params=np.array(out_model) if out_model else None,
    )


# ---------------------------------------------------------------------------
# Classifier model and forward pass.


@dataclass(eq=False)
class ClassifierModel:
    """Trained checkerboard classifier: circuit depth, angles, history."""

    n_qubits: int
    n_layers: int
    phi: np.ndarray
    seed: int
    vqe_layout_hash: str
    training_history: list = field(default_factory=list)

    def __post_init__(self):
        self.phi = np.asarray(self.phi, dtype=np.float64)
        if self.phi.shape[0] != self.circuit().n_params:
            raise ValueError("phi length does not match the classifier circuit")

    def circuit(self) -> ParametricCircuit:
        return build_checkerboard(self.n_qubits, self.n_layers, periodic=True)


def prepare_states(circuit: ParametricCircuit, params_rows: np.ndarray) -> np.ndarray:
    """Stack the prepared statevectors of many rows into a (rows, 2**n) matrix."""
    params_rows = np.asarray(params_rows, dtype=np.float64)
    dim = 1 << circuit.n_qubits
    out = np.empty((params_rows.shape[0], dim), dtype=np.complex128)
    for r in range(params_rows.shape[0]):
        out[r] = run_circuit(circuit, params_rows[r]).amplitudes
    return out


def _predict_from_columns(cols: np.ndarray, circuit: ParametricCircuit, phi: np.ndarray) -> np.ndarray:
    cols = apply_circuit_columns(cols.copy(), circuit, phi)
    probs = (cols.real.astype(np.float64)) ** 2 + (cols.imag.astype(np.float64)) ** 2
    return _majority_from_probs(probs.T, circuit.n_qubits)


def _predict_from_states(states: np.ndarray, circuit: ParametricCircuit, phi: np.ndarray) -> np.ndarray:
    # Column layout: basis index major, row minor, for contiguous kernels.
    cols = np.ascontiguousarray(states.T)
    cols = apply_circuit_columns(cols, circuit, phi)
    probs = np.abs(cols) ** 2
    return _majority_from_probs(probs.T, circuit.n_qubits)


def classify(
    data_params,
    vqe_layout: ParametricCircuit,
    model: ClassifierModel,
    *,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> float:
    """Predicted probability of class 1 for one data row.

    Runs the preparation circuit, then the classifier circuit, then the
    majority-vote readout.  Deterministic unless ``shots`` is given.
    """
    if vqe_layout.n_qubits != model.n_qubits:
        raise ValueError("preparation and classifier circuits disagree on qubits")
    if vqe_layout.layout_hash() != model.vqe_layout_hash:
        raise ValueError("layout hash mismatch between data row and model")
    state = run_circuit(vqe_layout, data_params)
    class_circuit = model.circuit()
    vec = apply_circuit_array(state.amplitudes.copy(), class_circuit, model.phi)
    out = Statevector(vec, model.n_qubits, normalize=False)
    return majority_probability(out, shots=shots, rng=rng)


def log_loss(predictions, labels, eps: float = LOSS_CLIP) -> float:
    """Summed Bernoulli negative log-likelihood with clipped predictions."""
    p = np.asarray(predictions, dtype=np.float64).reshape(-1)
    y = np.asarray(labels, dtype=np.float64).reshape(-1)
    if p.shape != y.shape:
        raise ValueError("predictions and labels lengths differ")
    p = np.clip(p, eps, 1.0 - eps)
    return float(-np.sum(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


# ---------------------------------------------------------------------------
# SPSA training.


@dataclass
class SPSAConfig:
    """Schedule for SPSA: step a_k = a0/sqrt(k), perturbation c_k = c0/sqrt(k)."""

    epochs: int = 300
    a0: float = 0.5
    c0: float = 0.5
    batch_size: int | None = None  # None = full batch

    def __post_init__(self):
        if self.epochs < 1:
            raise ValueError("epochs must be positive")
        if self.a0 <= 0 or self.c0 <= 0:
            raise ValueError("a0 and c0 must be positive")
        if self.batch_size is not None and self.batch_size < 1:
            raise ValueError("batch_size must be positive")


def spsa_update(
    phi: np.ndarray,
    loss_fn: Callable[[np.ndarray], float],
    epoch_index: int,
    cfg: SPSAConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, float]:
    """One SPSA step: estimate the gradient from a single random-direction
    finite difference, then descend.  Returns (new phi, mean probed loss)."""
    if epoch_index < 1:
        raise ValueError("epoch_index is 1-based")
    a_k = cfg.a0 / math.sqrt(epoch_index)
    c_k = cfg.c0 / math.sqrt(epoch_index)
    delta = rng.integers(0, 2, size=phi.shape[0]) * 2.0 - 1.0
    loss_plus = loss_fn(phi + c_k * delta)
    loss_minus = loss_fn(phi - c_k * delta)
    grad = (loss_plus - loss_minus) / (2.0 * c_k) * delta
    return phi - a_k * grad, 0.5 * (loss_plus + loss_minus)


def spsa_step(
    model: ClassifierModel,
    batch_states: np.ndarray,
    batch_labels: np.ndarray,
    epoch_index: int,
    cfg: SPSAConfig,
    rng: np.random.Generator,
) -> ClassifierModel:
    """Functional single step on a batch of prepared states; returns a new model."""
    circuit = model.circuit()

    def loss_fn(phi: np.ndarray) -> float:
        preds = _predict_from_states(batch_states, circuit, phi)
        return log_loss(preds, batch_labels) / batch_labels.shape[0]

    phi, probed = spsa_update(model.phi, loss_fn, epoch_index, cfg, rng)
    history = list(model.training_history) + [(epoch_index, probed)]
    return dataclasses.replace(model, phi=phi, training_history=history)


def train(
    dataset: LabeledDataset,
    n_layers: int,
    cfg: SPSAConfig,
    seed: int,
    *,
    phi_init: np.ndarray | None = None,
    states: np.ndarray | None = None,
) -> ClassifierModel:
    """Fit the classifier angles on the training split.

    The per-row preparation states are fixed during training, so they are
    computed once up front (or supplied via ``states`` when shared between
    runs).  The loss recorded per epoch is the mean per-row log loss probed
    by that epoch's SPSA pair.
    """
    train_rows = dataset.rows("train")
    if train_rows.size == 0:
        raise ValueError("training split is empty")
    vqe_circuit = dataset.layout
    class_circuit = build_checkerboard(vqe_circuit.n_qubits, n_layers, periodic=True)
    if states is None:
        states = prepare_states(vqe_circuit, dataset.params[train_rows])
    elif states.shape[0] != dataset.n_rows:
        raise ValueError("states row count does not match the dataset")
    else:
        states = states[train_rows]
    # Single precision is plenty for the stochastic loss probes and halves
    # the memory traffic of the batched kernels.
    states = np.ascontiguousarray(states.T).astype(np.complex64)
    labels = dataset.labels[train_rows]

    rng = np.random.default_rng(seed)
    if phi_init is None:
        phi = rng.uniform(-math.pi, math.pi, class_circuit.n_params)
    else:
        phi = np.asarray(phi_init, dtype=np.float64).copy()
        if phi.shape[0] != class_circuit.n_params:
            raise ValueError("phi_init length does not match the classifier circuit")

    n_train = labels.shape[0]
    batch = cfg.batch_size if cfg.batch_size is not None else n_train
    batch = min(batch, n_train)
    history: list[tuple[int, float]] = []
    for k in range(1, cfg.epochs + 1):
        if batch == n_train:
            batch_cols = states
            batch_labels = labels
        else:
            idx = rng.choice(n_train, size=batch, replace=False)
            batch_cols = np.ascontiguousarray(states[:, idx])
            batch_labels = labels[idx]

        def loss_fn(candidate: np.ndarray) -> float:
            preds = _predict_from_columns(batch_cols, class_circuit, candidate)
            return log_loss(preds, batch_labels) / batch_labels.shape[0]

        phi, probed = spsa_update(phi, loss_fn, k, cfg, rng)
        history.append((k, probed))

    return ClassifierModel(
        n_qubits=vqe_circuit.n_qubits,
        n_layers=n_layers,
        phi=phi,
        seed=seed,
        vqe_layout_hash=vqe_circuit.layout_hash(),
        training_history=history,
    )


def predict(
    model: ClassifierModel,
    dataset: LabeledDataset,
    split: str = "all",
    *,
    states: np.ndarray | None = None,
) -> np.ndarray:
    """Predicted class-1 probabilities for the rows of a split."""
    if dataset.layout_hash != model.vqe_layout_hash:
        raise ValueError("layout hash mismatch between dataset and model")
    rows = dataset.rows(split)
    if states is None:
        states = prepare_states(dataset.layout, dataset.params[rows])
    else:
        states = states[rows]
    return _predict_from_states(states, model.circuit(), model.phi)


def evaluate(
    model: ClassifierModel,
    dataset: LabeledDataset,
    split: str = "test",
    *,
    states: np.ndarray | None = None,
) -> float:
    """Fraction of rows predicted correctly; a prediction of exactly 0.5
    counts as wrong."""
    rows = dataset.rows(split)
    if rows.size == 0:
        raise ValueError(f"split {split!r} is empty")
    preds = predict(model, dataset, split, states=states)
    labels = dataset.labels[rows]
    correct = ((preds > 0.5) & (labels == 1)) | ((preds < 0.5) & (labels == 0))
    return float(np.mean(correct))


# ---------------------------------------------------------------------------
# Multi-class Hamming readout.


def multiclass_scores(distribution: Mapping[str, float], codewords: Sequence[str]) -> np.ndarray:
    """Per-class probability mass, assigning each bitstring to its
    Hamming-nearest codeword; distance ties split evenly among the tied
    classes."""
    if not codewords:
        raise ValueError("codeword list is empty")
    if len(set(codewords)) != len(codewords):
        raise ValueError("codewords must be distinct")
    length = len(codewords[0])
    if any(len(c) != length for c in codewords):
        raise ValueError("codewords must share one length")
    codes = np.array([[int(ch) for ch in c] for c in codewords], dtype=np.int64)
    scores = np.zeros(len(codewords))
    for bits, prob in distribution.items():
        if len(bits) != length:
            raise ValueError(f"bitstring {bits!r} does not match codeword length")
        vec = np.array([int(ch) for ch in bits], dtype=np.int64)
        dists = np.sum(codes != vec, axis=1)
        nearest = np.flatnonzero(dists == dists.min())
        scores[nearest] += prob / nearest.size
    return scores


def multiclass_label(distribution: Mapping[str, float], codewords: Sequence[str]) -> int:
    """Index of the codeword class with the largest assigned probability."""
    return int(np.argmax(multiclass_scores(distribution, codewords)))


# ---------------------------------------------------------------------------
# k-nearest-neighbour overlap baseline.


def state_overlap(
    circuit: ParametricCircuit, params_a, params_b
) -> float:
    """|<psi(a)|psi(b)>|^2, computed as the all-zeros probability after
    running the preparation of ``a`` followed by the inverse preparation of
    ``b``."""
    vec = run_circuit(circuit, params_a).amplitudes.copy()
    vec = apply_circuit_array(vec, circuit, np.asarray(params_b, dtype=np.float64), inverse=True)
    return float(abs(vec[0]) ** 2)


def knn_overlap_label(
    train_params: np.ndarray,
    train_labels: np.ndarray,
    circuit: ParametricCircuit,
    query_params,
    k: int,
) -> int:
    """Majority label among the k training rows with the largest state
    overlap with the query row."""
    train_params = np.asarray(train_params, dtype=np.float64)
    train_labels = np.asarray(train_labels, dtype=np.int64)
    if k % 2 == 0:
        raise ValueError("k must be odd")
    if k < 1 or k > train_params.shape[0]:
        raise ValueError("k must lie in [1, number of training rows]")
    overlaps = np.array(
        [state_overlap(circuit, train_params[i], query_params) for i in range(train_params.shape[0])]
    )
    top = np.argsort(-overlaps, kind="stable")[:k]
    votes = int(np.sum(train_labels[top]))
    return 1 if 2 * votes > k else 0


# ---------------------------------------------------------------------------
# Persistence.


def write_dataset_csv(csv_path, dataset: LabeledDataset, *, metadata: dict | None = None) -> None:
    """Sweep-style CSV with one extra augmentation-source column; the split
    and layout go to the JSON sidecar."""
    import csv as _csv

    from .vqe import sidecar_path

    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    n_params = dataset.params.shape[1]
    header = [
        "model_param",
        "energy",
        "exact_energy",
        "label",
        "sweep_direction",
        "seed",
    ] + [f"param_{k}" for k in range(n_params)] + ["augmentation_source"]
    with csv_path.open("w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow(header)
        for r in range(dataset.n_rows):
            mp = "" if dataset.model_params is None else repr(float(dataset.model_params[r]))
            row = [mp, "", "", str(int(dataset.labels[r])), "best", ""]
            row += [repr(float(v)) for v in dataset.params[r]]
            row.append(str(int(dataset.source_index[r])))
            writer.writerow(row)
    sidecar = {
        "layout": dataset.layout.to_json_dict(),
        "layout_hash": dataset.layout_hash,
        "train_idx": dataset.train_idx.tolist(),
        "test_idx": dataset.test_idx.tolist(),
        "metadata": metadata or {},
    }
    sidecar_path(csv_path).write_text(json.dumps(sidecar, sort_keys=True, indent=1))


def read_dataset_csv(csv_path) -> LabeledDataset:
    import csv as _csv

    from .vqe import sidecar_path

    csv_path = Path(csv_path)
    sidecar = json.loads(sidecar_path(csv_path).read_text())
    layout = ParametricCircuit.from_json_dict(sidecar["layout"])
    params = []
    labels = []
    sources = []
    model_params = []
    with csv_path.open(newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        n_params = len(header) - 7
        for row in reader:
            model_params.append(float(row[0]) if row[0] else math.nan)
            labels.append(int(row[3]))
            params.append([float(v) for v in row[6 : 6 + n_params]])
            sources.append(int(row[6 + n_params]))
    return LabeledDataset(
        params=np.array(params),
        labels=np.array(labels),
        layout=layout,
        train_idx=np.asarray(sidecar["train_idx"], dtype=np.int64),
        test_idx=np.asarray(sidecar["test_idx"], dtype=np.int64),
        source_index=np.array(sources),
        model_params=np.array(model_params),
    )


def dataset_from_sweep(samples, circuit: ParametricCircuit, train_fraction: float, seed: int) -> LabeledDataset:
    """Turn labelled sweep samples into a split dataset (one row per sample)."""
    params = np.array([s.params for s in samples])
    labels = np.array([s.label for s in samples])
    if any(s.label is None for s in samples):
        raise ValueError("sweep samples must be labelled first")
    model_params = np.array([s.model_param for s in samples])
    return split_dataset(
        params, labels, circuit, train_fraction, seed, model_params=model_params
    )


def save_model(path, model: ClassifierModel) -> None:
    payload = {
        "n_qubits": model.n_qubits,
        "n_layers": model.n_layers,
        "phi": model.phi.tolist(),
        "seed": model.seed,
        "vqe_layout_hash": model.vqe_layout_hash,
        "layout_hash": model.circuit().layout_hash(),
        "training_history": [[int(e), float(v)] for e, v in model.training_history],
    }
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1))


def load_model(path) -> ClassifierModel:
    data = json.loads(Path(path).read_text())
    return ClassifierModel(
        n_qubits=data["n_qubits"],
        n_layers=data["n_layers"],
        phi=np.asarray(data["phi"], dtype=np.float64),
        seed=data["seed"],
        vqe_layout_hash=data["vqe_layout_hash"],
        training_history=[(int(e), float(v)) for e, v in data["training_history"]],
    )
