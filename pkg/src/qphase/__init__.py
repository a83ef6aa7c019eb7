"""Statevector VQE on spin chains and a trainable quantum majority-vote
phase classifier."""

from .ansatz import (
    BlockParams,
    ParametricCircuit,
    augment_rotation,
    augment_xflip,
    build_checkerboard,
    build_rank_one,
    build_tree,
    entangler_block,
    schmidt_rank_bound,
)
from .classifier import (
    ClassifierModel,
    LabeledDataset,
    SPSAConfig,
    augment_dataset,
    classify,
    evaluate,
    knn_overlap_label,
    log_loss,
    majority_probability,
    multiclass_label,
    train,
)
from .hamiltonians import (
    DenseHamiltonian,
    PauliString,
    PauliSum,
    build_gue_interpolation,
    build_tfim,
    build_xxz,
    exact_ground,
    to_dense,
)
from .simulator import (
    Bipartition,
    Gate,
    Statevector,
    apply_gate,
    expectation,
    run_circuit,
    schmidt_rank,
    z_basis_distribution,
)
from .vqe import VQEConfig, VQESample, double_sweep, energy, gradient, label_sample, minimize, sweep

__all__ = [
    "Bipartition",
    "BlockParams",
    "ClassifierModel",
    "DenseHamiltonian",
    "Gate",
    "LabeledDataset",
    "ParametricCircuit",
    "PauliString",
    "PauliSum",
    "SPSAConfig",
    "Statevector",
    "VQEConfig",
    "VQESample",
    "apply_gate",
    "augment_dataset",
    "augment_rotation",
    "augment_xflip",
    "build_checkerboard",
    "build_gue_interpolation",
    "build_rank_one",
    "build_tfim",
    "build_tree",
    "build_xxz",
    "classify",
    "double_sweep",
    "energy",
    "entangler_block",
    "evaluate",
    "exact_ground",
    "expectation",
    "gradient",
    "knn_overlap_label",
    "label_sample",
    "log_loss",
    "majority_probability",
    "minimize",
    "multiclass_label",
    "run_circuit",
    "schmidt_rank",
    "schmidt_rank_bound",
    "sweep",
    "to_dense",
    "train",
    "z_basis_distribution",
]
