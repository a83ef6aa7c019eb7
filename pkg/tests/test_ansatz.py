import math

import numpy as np
import pytest
import scipy.optimize
from hypothesis import given, strategies as st

from qphase.ansatz import (
    BlockParams,
    ParametricCircuit,
    augment_rotation,
    augment_xflip,
    build_checkerboard,
    build_rank_one,
    build_tree,
    checkerboard_layer_pairs,
    entangler_block,
    params_from_json,
    params_to_json,
    schmidt_rank_bound,
    tree_layer_pairs,
)
from qphase.hamiltonians import build_xxz
from qphase.simulator import Bipartition, Statevector, apply_gates, run_circuit, schmidt_rank
from qphase.vqe import energy

from oracles import flip_unitary, gate_matrix, rotation_unitary


def contiguous_cut(n, size):
    return Bipartition(n, set(range(size)))


# ---------------------------------------------------------------------------
# Entangler block


def test_block_zero_angles_is_identity():
    gates = entangler_block(0, 1, BlockParams(0, 0, 0, 0, 0))
    out = apply_gates(Statevector.random(2, np.random.default_rng(0)), gates)
    ref = Statevector.random(2, np.random.default_rng(0))
    assert np.allclose(out.amplitudes, ref.amplitudes)


def test_block_without_coupling_keeps_product_states():
    gates = entangler_block(0, 1, BlockParams(0.3, -0.8, 0.0, 1.1, 0.4))
    out = apply_gates(Statevector.zero(2), gates)
    assert schmidt_rank(out, Bipartition(2, {0})) == 1


def test_block_matches_dense_product():
    p = BlockParams(0.37, -1.2, 0.55, 2.0, -0.9)
    out = apply_gates(Statevector.zero(2), entangler_block(0, 1, p))
    mat = np.eye(4, dtype=complex)
    mat = np.kron(gate_matrix("rx", p.x_first), np.eye(2)) @ mat
    mat = np.kron(np.eye(2), gate_matrix("rx", p.x_second)) @ mat
    mat = gate_matrix("rzz", p.zz) @ mat
    mat = np.kron(gate_matrix("rz", p.z_first), np.eye(2)) @ mat
    mat = np.kron(np.eye(2), gate_matrix("rz", p.z_second)) @ mat
    expected = mat @ np.array([1, 0, 0, 0], dtype=complex)
    assert np.max(np.abs(out.amplitudes - expected)) < 1e-12


def test_block_gate_order():
    kinds = [g.kind for g in entangler_block(2, 5, BlockParams(1, 2, 3, 4, 5))]
    assert kinds == ["rx", "rx", "rzz", "rz", "rz"]


def test_block_rejects_equal_qubits():
    with pytest.raises(ValueError):
        entangler_block(1, 1, BlockParams(0, 0, 0, 0, 0))


# ---------------------------------------------------------------------------
# Rank-one layout


def test_rank_one_single_qubit_zero_params():
    out = run_circuit(build_rank_one(1), [0.0, 0.0])
    assert out.amplitudes[0] == pytest.approx(1.0)


def test_rank_one_always_product():
    circ = build_rank_one(3)
    assert circ.n_params == 6
    rng = np.random.default_rng(4)
    for _ in range(5):
        out = run_circuit(circ, rng.uniform(-math.pi, math.pi, 6))
        for a in ({0}, {1}, {2}, {0, 1}, {0, 2}):
            assert schmidt_rank(out, Bipartition(3, a)) == 1


def test_rank_one_reaches_arbitrary_single_qubit_states():
    circ = build_rank_one(1)
    rng = np.random.default_rng(9)
    for _ in range(4):
        target = Statevector.random(1, rng)

        def infidelity(x):
            out = run_circuit(circ, x)
            return 1.0 - abs(np.vdot(target.amplitudes, out.amplitudes)) ** 2

        best = min(
            scipy.optimize.minimize(infidelity, rng.uniform(-math.pi, math.pi, 2), method="Nelder-Mead",
                                    options={"xatol": 1e-12, "fatol": 1e-14, "maxiter": 2000}).fun
            for _ in range(4)
        )
        assert best < 1e-9


# ---------------------------------------------------------------------------
# Tree layout


def test_tree_two_qubits():
    circ = build_tree(2)
    assert circ.n_params == 5
    assert circ.two_qubit_pairs() == [(0, 1)]


def test_tree_eight_qubit_block_map():
    layers = tree_layer_pairs(8)
    assert layers == [
        [(0, 4)],
        [(0, 2), (4, 6)],
        [(0, 1), (2, 3), (4, 5), (6, 7)],
    ]
    assert build_tree(8).n_params == 35


@pytest.mark.parametrize("n", range(2, 13))
def test_tree_block_count(n):
    assert sum(len(layer) for layer in tree_layer_pairs(n)) == n - 1
    assert build_tree(n).n_params == 5 * n - 5


def test_tree_rank_bounded_by_crossing_blocks():
    circ = build_tree(8)
    rng = np.random.default_rng(10)
    for size in (1, 2, 3, 4, 6):
        cut = contiguous_cut(8, size)
        bound = schmidt_rank_bound(circ, cut.subset_a)
        for _ in range(5):
            out = run_circuit(circ, rng.uniform(-math.pi, math.pi, circ.n_params))
            assert schmidt_rank(out, cut) <= bound


# ---------------------------------------------------------------------------
# Checkerboard layout


def test_checkerboard_counts():
    assert build_checkerboard(4, 1).n_params == 10
    assert build_checkerboard(10, 4).n_params == 100


@pytest.mark.parametrize("n", range(2, 13))
@pytest.mark.parametrize("layers", range(1, 7))
def test_checkerboard_param_formula(n, layers):
    if n == 2 and layers > 1:
        with pytest.raises(ValueError):
            build_checkerboard(n, layers, periodic=True)
        return
    circ = build_checkerboard(n, layers, periodic=True)
    assert circ.n_params == 5 * layers * (n // 2)


def test_checkerboard_layer_structure():
    assert checkerboard_layer_pairs(10, 1, True) == [(0, 1), (2, 3), (4, 5), (6, 7), (8, 9)]
    assert checkerboard_layer_pairs(10, 2, True) == [(1, 2), (3, 4), (5, 6), (7, 8), (9, 0)]
    assert checkerboard_layer_pairs(5, 2, True) == [(1, 2), (3, 4)]


def test_checkerboard_single_layer_rank_cap_on_ring():
    circ = build_checkerboard(6, 1, periodic=True)
    rng = np.random.default_rng(11)
    cut = contiguous_cut(6, 3)
    assert schmidt_rank_bound(circ, cut.subset_a) <= 4
    for _ in range(10):
        out = run_circuit(circ, rng.uniform(-math.pi, math.pi, circ.n_params))
        assert schmidt_rank(out, cut) <= 4


def test_checkerboard_reaches_maximal_rank_n6_l3():
    circ = build_checkerboard(6, 3, periodic=True)
    cut = contiguous_cut(6, 3)
    rng = np.random.default_rng(12)
    best = 0
    for _ in range(40):
        out = run_circuit(circ, rng.uniform(-math.pi, math.pi, circ.n_params))
        best = max(best, schmidt_rank(out, cut))
        if best == 8:
            break
    assert best == 8


# ---------------------------------------------------------------------------
# Symmetry transforms on checkerboard parameters


@pytest.fixture
def cb_even():
    circ = build_checkerboard(4, 2, periodic=True)
    params = np.random.default_rng(13).uniform(-math.pi, math.pi, circ.n_params)
    return circ, params


def test_rotation_zero_angle_is_identity(cb_even):
    circ, params = cb_even
    out_circ, out = augment_rotation(circ, params, 0.0)
    assert out_circ is circ
    assert np.allclose(out, params)


def test_rotation_matches_global_z_rotation(cb_even):
    circ, params = cb_even
    phi = 0.7
    out_circ, out = augment_rotation(circ, params, phi)
    psi = run_circuit(circ, params).amplitudes
    rotated = run_circuit(out_circ, out).amplitudes
    target = rotation_unitary(4, phi) @ psi
    assert abs(np.vdot(target, rotated)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_xflip_matches_global_flip(cb_even):
    circ, params = cb_even
    out_circ, out = augment_xflip(circ, params)
    psi = run_circuit(circ, params).amplitudes
    flipped = run_circuit(out_circ, out).amplitudes
    target = flip_unitary(4) @ psi
    assert abs(np.vdot(target, flipped)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_xflip_twice_restores_state(cb_even):
    circ, params = cb_even
    c1, once = augment_xflip(circ, params)
    c2, twice = augment_xflip(c1, once)
    a = run_circuit(circ, params).amplitudes
    b = run_circuit(c2, twice).amplitudes
    assert abs(np.vdot(a, b)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_augmentations_preserve_energy(cb_even):
    circ, params = cb_even
    h = build_xxz(4, 1.0, 1.3)
    base = energy(circ, params, h)
    for phi in (0.3, 1.9, -2.2):
        c, p = augment_rotation(circ, params, phi)
        assert energy(c, p, h) == pytest.approx(base, abs=1e-9)
    c, p = augment_xflip(circ, params)
    assert energy(c, p, h) == pytest.approx(base, abs=1e-9)


def test_augmentations_preserve_layout_and_count_even_n(cb_even):
    circ, params = cb_even
    c1, p1 = augment_rotation(circ, params, 1.1)
    c2, p2 = augment_xflip(circ, params)
    assert c1 is circ and c2 is circ
    assert p1.shape == params.shape and p2.shape == params.shape


def test_augmentation_odd_n_uses_correction_layer():
    circ = build_checkerboard(5, 2, periodic=True)
    params = np.random.default_rng(14).uniform(-math.pi, math.pi, circ.n_params)
    out_circ, out = augment_xflip(circ, params)
    assert out_circ.correction
    assert out_circ.n_params == circ.n_params + 2  # one uncovered qubit
    psi = run_circuit(circ, params).amplitudes
    flipped = run_circuit(out_circ, out).amplitudes
    target = flip_unitary(5) @ psi
    assert abs(np.vdot(target, flipped)) ** 2 == pytest.approx(1.0, abs=1e-10)

    out_circ2, out2 = augment_rotation(circ, params, 0.9)
    rotated = run_circuit(out_circ2, out2).amplitudes
    target2 = rotation_unitary(5, 0.9) @ psi
    assert abs(np.vdot(target2, rotated)) ** 2 == pytest.approx(1.0, abs=1e-10)


def test_augmentation_rejects_other_layouts():
    circ = build_tree(4)
    with pytest.raises(ValueError):
        augment_rotation(circ, np.zeros(circ.n_params), 0.3)
    with pytest.raises(ValueError):
        augment_xflip(circ, np.zeros(circ.n_params))


# ---------------------------------------------------------------------------
# Serialization


def test_layout_json_round_trip():
    for circ in (build_rank_one(3), build_tree(6), build_checkerboard(6, 2)):
        again = ParametricCircuit.from_json(circ.to_json())
        assert again == circ
        assert again.layout_hash() == circ.layout_hash()


def test_layout_hash_distinguishes_layouts():
    assert build_tree(6).layout_hash() != build_checkerboard(6, 2).layout_hash()
    assert build_checkerboard(6, 2).layout_hash() != build_checkerboard(6, 3).layout_hash()


def test_params_json_pairing():
    circ = build_checkerboard(4, 1)
    params = np.linspace(-1, 1, circ.n_params)
    text = params_to_json(circ, params)
    assert np.allclose(params_from_json(circ, text), params)
    with pytest.raises(ValueError):
        params_from_json(build_checkerboard(4, 2), text)


# ---------------------------------------------------------------------------
# Properties


@given(n=st.integers(1, 12))
def test_rank_one_param_count(n):
    assert build_rank_one(n).n_params == 2 * n


@given(seed=st.integers(0, 40))
def test_checkerboard_rank_never_exceeds_layout_bound(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, 8))
    layers = int(rng.integers(1, 4))
    circ = build_checkerboard(n, layers, periodic=True)
    size = int(rng.integers(1, n))
    subset = set(rng.choice(n, size=size, replace=False).tolist())
    out = run_circuit(circ, rng.uniform(-math.pi, math.pi, circ.n_params))
    assert schmidt_rank(out, Bipartition(n, subset)) <= schmidt_rank_bound(circ, subset)
