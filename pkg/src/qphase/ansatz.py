"""Parametric circuit families built from a five-parameter two-qubit block,
plus the parameter-vector symmetry transforms used for data augmentation.

The block applies, in order, RX on each qubit, RZZ across the pair, then RZ
on each qubit (full-angle convention, see :mod:`qphase.simulator`).  Three
layouts are provided:

* ``rank_one``    - RY and RZ per qubit; product states only, 2n parameters.
* ``tree``        - binary-tree block pattern, n - 1 blocks, 5n - 5 parameters.
* ``checkerboard``- L alternating layers of blocks on even/odd ring bonds,
                    5 * L * floor(n/2) parameters when periodic.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .simulator import Gate, PARAMETRIC_KINDS


class CircuitSlot(NamedTuple):
    kind: str
    qubits: tuple[int, ...]
    param_index: int | None


@dataclass(frozen=True)
class ParametricCircuit:
    """Ordered gate slots with named parameter positions."""

    n_qubits: int
    layout: str
    slots: tuple[CircuitSlot, ...]
    n_layers: int | None = None
    periodic: bool = False
    correction: bool = False

    def __post_init__(self):
        seen = set()
        for slot in self.slots:
            if slot.kind not in PARAMETRIC_KINDS and slot.kind != "x":
                raise ValueError(f"slot kind {slot.kind!r} not allowed in circuits")
            if any(q < 0 or q >= self.n_qubits for q in slot.qubits):
                raise ValueError(f"slot {slot} targets out-of-range qubits")
            if len(set(slot.qubits)) != len(slot.qubits):
                raise ValueError(f"slot {slot} repeats a qubit")
            if slot.param_index is not None:
                if slot.kind not in PARAMETRIC_KINDS:
                    raise ValueError(f"non-parametric slot {slot} carries a parameter")
                if slot.param_index in seen:
                    raise ValueError(f"parameter index {slot.param_index} reused")
                seen.add(slot.param_index)
        if seen and (min(seen) != 0 or max(seen) != len(seen) - 1):
            raise ValueError("parameter indices must be contiguous from 0")

    @property
    def n_params(self) -> int:
        return sum(1 for s in self.slots if s.param_index is not None)

    def two_qubit_pairs(self) -> list[tuple[int, int]]:
        """Qubit pairs of the entangling slots, in application order."""
        return [tuple(s.qubits) for s in self.slots if len(s.qubits) == 2]

    def to_json_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "layout": self.layout,
            "n_layers": self.n_layers,
            "periodic": self.periodic,
            "correction": self.correction,
            "slots": [
                [s.kind, list(s.qubits), s.param_index] for s in self.slots
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json_dict(cls, data: dict) -> "ParametricCircuit":
        slots = tuple(
            CircuitSlot(kind, tuple(qubits), param_index)
            for kind, qubits, param_index in data["slots"]
        )
        return cls(
            n_qubits=data["n_qubits"],
            layout=data["layout"],
            slots=slots,
            n_layers=data.get("n_layers"),
            periodic=bool(data.get("periodic", False)),
            correction=bool(data.get("correction", False)),
        )

    @classmethod
    def from_json(cls, text: str) -> "ParametricCircuit":
        return cls.from_json_dict(json.loads(text))

    def layout_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def params_to_json(circuit: ParametricCircuit, params) -> str:
    """Serialize a parameter vector together with its layout hash."""
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != circuit.n_params:
        raise ValueError("parameter count does not match the circuit")
    return json.dumps(
        {"layout_hash": circuit.layout_hash(), "params": params.tolist()},
        sort_keys=True,
    )


def params_from_json(circuit: ParametricCircuit, text: str) -> np.ndarray:
    data = json.loads(text)
    if data["layout_hash"] != circuit.layout_hash():
        raise ValueError("layout hash mismatch")
    return np.asarray(data["params"], dtype=np.float64)


# ---------------------------------------------------------------------------
# The two-qubit entangler block.


@dataclass(frozen=True)
class BlockParams:
    """Five angles of one block: two X rotations, the ZZ coupling, two Z
    rotations (first/second refer to the block's two target qubits)."""

    x_first: float
    x_second: float
    zz: float
    z_first: float
    z_second: float

    def __post_init__(self):
        for value in (self.x_first, self.x_second, self.zz, self.z_first, self.z_second):
            if not math.isfinite(value):
                raise ValueError("block angles must be finite")


def entangler_block(q_a: int, q_b: int, p: BlockParams) -> list[Gate]:
    """Bound gate sequence of one block on qubits (q_a, q_b)."""
    if q_a == q_b:
        raise ValueError("block qubits must differ")
    return [
        Gate("rx", (q_a,), p.x_first),
        Gate("rx", (q_b,), p.x_second),
        Gate("rzz", (q_a, q_b), p.zz),
        Gate("rz", (q_a,), p.z_first),
        Gate("rz", (q_b,), p.z_second),
    ]


def _block_slots(q_a: int, q_b: int, base: int) -> list[CircuitSlot]:
    return [
        CircuitSlot("rx", (q_a,), base),
        CircuitSlot("rx", (q_b,), base + 1),
        CircuitSlot("rzz", (q_a, q_b), base + 2),
        CircuitSlot("rz", (q_a,), base + 3),
        CircuitSlot("rz", (q_b,), base + 4),
    ]


# ---------------------------------------------------------------------------
# Layout builders.


def build_rank_one(n: int) -> ParametricCircuit:
    """Product-state preparation: one RY then one RZ slot per qubit."""
    if n < 1:
        raise ValueError("need at least one qubit")
    slots = []
    for q in range(n):
        slots.append(CircuitSlot("ry", (q,), 2 * q))
        slots.append(CircuitSlot("rz", (q,), 2 * q + 1))
    return ParametricCircuit(n, "rank_one", tuple(slots))


def tree_layer_pairs(n: int) -> list[list[tuple[int, int]]]:
    """Block pairs of the binary-tree layout, grouped by layer.

    The recursion halves a virtual register padded to the next power of two;
    a block pairs the first qubit of a segment with the first qubit of its
    second half.  Blocks whose second qubit falls outside the register are
    dropped, leaving the last layer incomplete and n - 1 blocks in total.
    """
    if n < 2:
        raise ValueError("need at least two qubits")
    size = 1
    while size < n:
        size <<= 1
    layers: list[list[tuple[int, int]]] = []
    segments = [(0, size)]
    while segments:
        pairs = []
        next_segments = []
        for start, length in segments:
            half = length // 2
            if start + half < n:
                pairs.append((start, start + half))
            if half >= 2:
                next_segments.append((start, half))
                next_segments.append((start + half, half))
        if pairs:
            layers.append(pairs)
        segments = [s for s in next_segments if s[0] < n]
    return layers


def build_tree(n: int) -> ParametricCircuit:
    """Binary-tree arrangement of blocks enabling long-range correlations."""
    slots: list[CircuitSlot] = []
    base = 0
    for layer in tree_layer_pairs(n):
        for q_a, q_b in layer:
            slots.extend(_block_slots(q_a, q_b, base))
            base += 5
    return ParametricCircuit(n, "tree", tuple(slots))


def checkerboard_layer_pairs(n: int, layer: int, periodic: bool) -> list[tuple[int, int]]:
    """Block pairs of one checkerboard layer (1-based layer index).

    Odd layers tile bonds (0,1),(2,3),...; even layers tile (1,2),(3,4),...
    and, on a periodic even-sized ring, the wrap-around bond (n-1, 0).
    """
    if layer % 2 == 1:
        return [(i, i + 1) for i in range(0, n - 1, 2)]
    pairs = [(i, i + 1) for i in range(1, n - 1, 2)]
    if periodic and n % 2 == 0:
        if n == 2:
            raise ValueError("periodic even-layer wrap requires n >= 3")
        pairs.append((n - 1, 0))
    return pairs


def build_checkerboard(
    n: int, n_layers: int, periodic: bool = True, *, correction_layer: bool = False
) -> ParametricCircuit:
    """Alternating layers of blocks on the even/odd bonds of a qubit ring.

    With periodic boundaries every layer holds floor(n/2) blocks, giving
    5 * L * floor(n/2) parameters.  ``correction_layer`` appends one RX and
    one RZ slot for each qubit the final layer leaves untouched; the symmetry
    transforms below use it when n is odd.
    """
    if n < 2:
        raise ValueError("need at least two qubits")
    if n_layers < 1:
        raise ValueError("need at least one layer")
    slots: list[CircuitSlot] = []
    base = 0
    for layer in range(1, n_layers + 1):
        for q_a, q_b in checkerboard_layer_pairs(n, layer, periodic):
            slots.extend(_block_slots(q_a, q_b, base))
            base += 5
    if correction_layer:
        for q in _uncovered_qubits(n, n_layers, periodic):
            slots.append(CircuitSlot("rx", (q,), base))
            slots.append(CircuitSlot("rz", (q,), base + 1))
            base += 2
    return ParametricCircuit(
        n,
        "checkerboard",
        tuple(slots),
        n_layers=n_layers,
        periodic=periodic,
        correction=correction_layer,
    )


def _uncovered_qubits(n: int, n_layers: int, periodic: bool) -> list[int]:
    covered = set()
    for q_a, q_b in checkerboard_layer_pairs(n, n_layers, periodic):
        covered.add(q_a)
        covered.add(q_b)
    return sorted(set(range(n)) - covered)


# ---------------------------------------------------------------------------
# Layout-derived entanglement bounds.


def schmidt_rank_bound(circuit: ParametricCircuit, subset_a) -> int:
    """Upper bound on the Schmidt rank across a cut, from the layout alone.

    Every entangling slot is a ZZ rotation, whose operator-Schmidt rank
    across any cut is at most 2, so the state rank is at most 2^(number of
    blocks straddling the cut), capped by the subsystem dimension.
    """
    subset = frozenset(int(q) for q in subset_a)
    if not subset or len(subset) >= circuit.n_qubits:
        raise ValueError("cut must leave both sides non-empty")
    crossings = sum(
        1 for qa, qb in circuit.two_qubit_pairs() if (qa in subset) != (qb in subset)
    )
    cap = min(len(subset), circuit.n_qubits - len(subset))
    return 1 << min(crossings, cap)


# ---------------------------------------------------------------------------
# Checkerboard parameter-vector symmetry transforms.
#
# A global Z rotation by phi multiplies every qubit by exp(i phi/2 Z), which
# merges into the trailing RZ slot of each qubit's final block as a shift of
# -phi/2 (full-angle convention).  A global X flip pushes one X through each
# final block: the two Z angles negate, the ZZ angle is unchanged (X x X
# commutes with Z x Z) and each X merges into the leading RX slot as +pi/2.


def _final_layer_blocks(circuit: ParametricCircuit) -> tuple[list[dict], list[dict]]:
    """Parameter-index maps for the last block layer and the correction slots."""
    if circuit.layout != "checkerboard":
        raise ValueError("symmetry transforms require a checkerboard circuit")
    n, n_layers, periodic = circuit.n_qubits, circuit.n_layers, circuit.periodic
    blocks_before = sum(
        len(checkerboard_layer_pairs(n, layer, periodic))
        for layer in range(1, n_layers)
    )
    last_pairs = checkerboard_layer_pairs(n, n_layers, periodic)
    blocks = []
    for k, _pair in enumerate(last_pairs):
        base = 5 * (blocks_before + k)
        blocks.append({"x": (base, base + 1), "z": (base + 3, base + 4)})
    corrections = []
    if circuit.correction:
        base = 5 * (blocks_before + len(last_pairs))
        for _q in _uncovered_qubits(n, n_layers, periodic):
            corrections.append({"x": (base,), "z": (base + 1,)})
            base += 2
    return blocks, corrections


def _with_correction(circuit: ParametricCircuit, params: np.ndarray):
    """Extend the circuit with a correction layer when the final layer does
    not touch every qubit (odd n); new slots start at angle zero."""
    if circuit.layout != "checkerboard":
        raise ValueError("symmetry transforms require a checkerboard circuit")
    if circuit.correction or not _uncovered_qubits(
        circuit.n_qubits, circuit.n_layers, circuit.periodic
    ):
        return circuit, params.copy()
    extended = build_checkerboard(
        circuit.n_qubits,
        circuit.n_layers,
        circuit.periodic,
        correction_layer=True,
    )
    padded = np.zeros(extended.n_params)
    padded[: params.shape[0]] = params
    return extended, padded


def augment_rotation(
    circuit: ParametricCircuit, params, phi: float
) -> tuple[ParametricCircuit, np.ndarray]:
    """Reparameterize so the prepared state gains a global Z rotation by phi.

    Returns the (possibly correction-extended) circuit and the new parameter
    vector; for even n the circuit object is unchanged.
    """
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != circuit.n_params:
        raise ValueError("parameter count does not match the circuit")
    circuit, out = _with_correction(circuit, params)
    blocks, corrections = _final_layer_blocks(circuit)
    for block in blocks:
        for idx in block["z"]:
            out[idx] -= phi / 2.0
    for corr in corrections:
        for idx in corr["z"]:
            out[idx] -= phi / 2.0
    return circuit, out


def augment_xflip(
    circuit: ParametricCircuit, params
) -> tuple[ParametricCircuit, np.ndarray]:
    """Reparameterize so the prepared state gains a global X flip (up to a
    global phase): final-layer Z angles negate, X angles shift by +pi/2."""
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != circuit.n_params:
        raise ValueError("parameter count does not match the circuit")
    circuit, out = _with_correction(circuit, params)
    blocks, corrections = _final_layer_blocks(circuit)
    for entry in blocks + corrections:
        for idx in entry["z"]:
            out[idx] = -out[idx]
        for idx in entry["x"]:
            out[idx] += math.pi / 2.0
    return circuit, out
