"""Exact statevector simulation of small qubit registers.

Conventions used throughout the package:

* A parametric gate with generator ``P`` implements the full-angle unitary
  ``exp(-i * angle * P)``.
* Qubit 0 is the most significant bit of the basis-state index, so on two
  qubits the amplitude of ``|10>`` sits at index 2.

Measurement statistics are exact (computed from amplitudes); an optional
shot-sampling mode exists for realism studies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable

import numpy as np

if TYPE_CHECKING:
    from .ansatz import ParametricCircuit

NORM_ATOL = 1e-9
IMAG_RESIDUE_TOL = 1e-10
DEFAULT_SCHMIDT_TOL = 1e-10

PARAMETRIC_KINDS = ("rx", "ry", "rz", "rzz")
GATE_KINDS = PARAMETRIC_KINDS + ("x", "g1", "g2")

_ONE_QUBIT_KINDS = ("rx", "ry", "rz", "x", "g1")
_TWO_QUBIT_KINDS = ("rzz", "g2")


class Statevector:
    """Normalized vector of 2**n complex amplitudes."""

    __slots__ = ("n_qubits", "amplitudes")

    def __init__(self, amplitudes, n_qubits: int | None = None, *, normalize: bool = False):
        vec = np.array(amplitudes, dtype=np.complex128).reshape(-1)
        dim = vec.shape[0]
        n = dim.bit_length() - 1
        if dim <= 0 or (1 << n) != dim:
            raise ValueError(f"amplitude count {dim} is not a power of two")
        if n_qubits is not None and n_qubits != n:
            raise ValueError(f"{dim} amplitudes do not match n_qubits={n_qubits}")
        nrm = float(np.linalg.norm(vec))
        if normalize:
            if nrm == 0.0:
                raise ValueError("cannot normalize the zero vector")
            vec = vec / nrm
        elif abs(nrm - 1.0) > NORM_ATOL:
            raise ValueError(f"state norm {nrm} deviates from 1 beyond {NORM_ATOL}")
        self.n_qubits = n
        self.amplitudes = vec

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        """|0...0> on ``n_qubits`` qubits."""
        if n_qubits < 1:
            raise ValueError("need at least one qubit")
        vec = np.zeros(1 << n_qubits, dtype=np.complex128)
        vec[0] = 1.0
        return _wrap(vec, n_qubits)

    @classmethod
    def from_bits(cls, bits: str) -> "Statevector":
        """Computational basis state for a bitstring, qubit 0 leftmost."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid bitstring {bits!r}")
        n = len(bits)
        vec = np.zeros(1 << n, dtype=np.complex128)
        vec[int(bits, 2)] = 1.0
        return _wrap(vec, n)

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator) -> "Statevector":
        """Haar-random state (normalized complex Gaussian vector)."""
        dim = 1 << n_qubits
        vec = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        return cls(vec, normalize=True)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def inner(self, other: "Statevector") -> complex:
        """<self|other>."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("qubit counts differ")
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def fidelity(self, other: "Statevector") -> float:
        """|<self|other>|^2."""
        return abs(self.inner(other)) ** 2

    def copy(self) -> "Statevector":
        return _wrap(self.amplitudes.copy(), self.n_qubits)

    def __repr__(self) -> str:
        return f"Statevector(n_qubits={self.n_qubits})"


def _wrap(vec: np.ndarray, n_qubits: int) -> Statevector:
    """Wrap a trusted buffer without re-validating (norm preserved by gates)."""
    state = Statevector.__new__(Statevector)
    state.n_qubits = n_qubits
    state.amplitudes = vec
    return state


@dataclass(frozen=True)
class Gate:
    """A concrete gate application: kind, target qubits, bound angle or matrix."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        arity = 1 if self.kind in _ONE_QUBIT_KINDS else 2
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} acts on {arity} qubit(s), got {self.qubits}")
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError("target qubits must be distinct")
        if self.kind in PARAMETRIC_KINDS:
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle, got {self.angle}")
        elif self.angle is not None:
            raise ValueError(f"{self.kind} takes no angle")
        if self.kind in ("g1", "g2"):
            dim = 2 if self.kind == "g1" else 4
            mat = np.asarray(self.matrix, dtype=np.complex128)
            if mat.shape != (dim, dim):
                raise ValueError(f"{self.kind} needs a {dim}x{dim} matrix")
            if not np.allclose(mat.conj().T @ mat, np.eye(dim), atol=1e-10):
                raise ValueError(f"{self.kind} matrix is not unitary")
            object.__setattr__(self, "matrix", mat)
        elif self.matrix is not None:
            raise ValueError(f"{self.kind} takes no matrix")


# ---------------------------------------------------------------------------
# Array-level kernels.  They accept arrays of shape (..., 2**n) or, with
# ``tail=m``, column batches of shape (2**n, m), and return the transformed
# array (usually the same buffer mutated in place).  The column form keeps
# the innermost axis contiguous, which is what makes batched classifier
# evaluation fast.


def _apply_rx(arr: np.ndarray, n: int, q: int, angle: float, tail: int = 1) -> np.ndarray:
    b = (1 << (n - 1 - q)) * tail
    view = arr.reshape(-1, 2, b)
    v0 = view[:, 0, :]
    v1 = view[:, 1, :]
    c = arr.dtype.type(math.cos(angle))
    ms = arr.dtype.type(-1j * math.sin(angle))
    t0 = v0 * c
    t0 += v1 * ms
    v1 *= c
    v1 += v0 * ms
    v0[:] = t0
    return arr


def _apply_ry(arr: np.ndarray, n: int, q: int, angle: float, tail: int = 1) -> np.ndarray:
    b = (1 << (n - 1 - q)) * tail
    view = arr.reshape(-1, 2, b)
    v0 = view[:, 0, :]
    v1 = view[:, 1, :]
    c = arr.dtype.type(math.cos(angle))
    s = arr.dtype.type(math.sin(angle))
    t0 = v0 * c
    t0 -= v1 * s
    v1 *= c
    v1 += v0 * s
    v0[:] = t0
    return arr


def _apply_rz(arr: np.ndarray, n: int, q: int, angle: float, tail: int = 1) -> np.ndarray:
    b = (1 << (n - 1 - q)) * tail
    view = arr.reshape(-1, 2, b)
    view[:, 0, :] *= arr.dtype.type(complex(math.cos(angle), -math.sin(angle)))
    view[:, 1, :] *= arr.dtype.type(complex(math.cos(angle), math.sin(angle)))
    return arr


def _apply_x(arr: np.ndarray, n: int, q: int, tail: int = 1) -> np.ndarray:
    b = (1 << (n - 1 - q)) * tail
    view = arr.reshape(-1, 2, b)
    view[:, [0, 1], :] = view[:, [1, 0], :]
    return arr


def _apply_rzz(arr: np.ndarray, n: int, qa: int, qb: int, angle: float, tail: int = 1) -> np.ndarray:
    qa, qb = (qa, qb) if qa < qb else (qb, qa)
    mid = 1 << (qb - qa - 1)
    b = (1 << (n - 1 - qb)) * tail
    view = arr.reshape(-1, 2, mid, 2, b)
    even = arr.dtype.type(complex(math.cos(angle), -math.sin(angle)))
    odd = arr.dtype.type(complex(math.cos(angle), math.sin(angle)))
    view[:, 0, :, 0, :] *= even
    view[:, 1, :, 1, :] *= even
    view[:, 0, :, 1, :] *= odd
    view[:, 1, :, 0, :] *= odd
    return arr


def _apply_g1(arr: np.ndarray, n: int, q: int, mat: np.ndarray, tail: int = 1) -> np.ndarray:
    b = (1 << (n - 1 - q)) * tail
    view = arr.reshape(-1, 2, b)
    v0 = view[:, 0, :]
    v1 = view[:, 1, :]
    m = [arr.dtype.type(mat[i, j]) for i in range(2) for j in range(2)]
    t0 = v0 * m[0]
    t0 += v1 * m[1]
    v1 *= m[3]
    v1 += v0 * m[2]
    v0[:] = t0
    return arr


def _apply_g2(arr: np.ndarray, n: int, qa: int, qb: int, mat: np.ndarray) -> np.ndarray:
    lead = arr.shape[:-1]
    t = arr.reshape(lead + (2,) * n)
    off = len(lead)
    t = np.moveaxis(t, (off + qa, off + qb), (-2, -1))
    shape = t.shape
    t = t.reshape(-1, 4) @ mat.T
    t = t.reshape(shape)
    t = np.moveaxis(t, (-2, -1), (off + qa, off + qb))
    return np.ascontiguousarray(t).reshape(lead + (1 << n,))


def _apply_kind(
    arr: np.ndarray,
    n: int,
    kind: str,
    qubits: tuple[int, ...],
    angle: float | None = None,
    matrix: np.ndarray | None = None,
    tail: int = 1,
) -> np.ndarray:
    if kind == "rx":
        return _apply_rx(arr, n, qubits[0], angle, tail)
    if kind == "ry":
        return _apply_ry(arr, n, qubits[0], angle, tail)
    if kind == "rz":
        return _apply_rz(arr, n, qubits[0], angle, tail)
    if kind == "rzz":
        return _apply_rzz(arr, n, qubits[0], qubits[1], angle, tail)
    if kind == "x":
        return _apply_x(arr, n, qubits[0], tail)
    if kind == "g1":
        return _apply_g1(arr, n, qubits[0], matrix, tail)
    if kind == "g2":
        if tail != 1:
            raise ValueError("g2 does not support column batches")
        return _apply_g2(arr, n, qubits[0], qubits[1], matrix)
    raise ValueError(f"unknown gate kind {kind!r}")


def _apply_generator(arr: np.ndarray, n: int, kind: str, qubits: tuple[int, ...]) -> np.ndarray:
    """Apply the Pauli generator of a parametric kind to a fresh copy of ``arr``."""
    out = arr.copy()
    if kind == "rx":
        return _apply_x(out, n, qubits[0])
    if kind == "ry":
        b = 1 << (n - 1 - qubits[0])
        view = out.reshape(-1, 2, b)
        v0 = view[:, 0, :].copy()
        view[:, 0, :] = -1j * view[:, 1, :]
        view[:, 1, :] = 1j * v0
        return out
    if kind == "rz":
        b = 1 << (n - 1 - qubits[0])
        view = out.reshape(-1, 2, b)
        view[:, 1, :] *= -1.0
        return out
    if kind == "rzz":
        qa, qb = sorted(qubits)
        mid = 1 << (qb - qa - 1)
        b = 1 << (n - 1 - qb)
        view = out.reshape(-1, 2, mid, 2, b)
        view[:, 0, :, 1, :] *= -1.0
        view[:, 1, :, 0, :] *= -1.0
        return out
    raise ValueError(f"kind {kind!r} has no involutory generator")


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply one gate and return the new state."""
    n = state.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"qubit {q} out of range for {n} qubits")
    vec = state.amplitudes.copy()
    vec = _apply_kind(vec, n, gate.kind, gate.qubits, gate.angle, gate.matrix)
    return _wrap(vec, n)


def apply_gates(state: Statevector, gates: Iterable[Gate]) -> Statevector:
    out = state
    for gate in gates:
        out = apply_gate(out, gate)
    return out


# ---------------------------------------------------------------------------
# Circuit execution.


def apply_circuit_array(
    arr: np.ndarray,
    circuit: "ParametricCircuit",
    params: np.ndarray,
    *,
    inverse: bool = False,
) -> np.ndarray:
    """Run a circuit's slots over an array of shape (..., 2**n), in place.

    With ``inverse=True`` the adjoint circuit is applied (slots reversed,
    angles negated); only parametric and x slots are invertible this way.
    """
    n = circuit.n_qubits
    slots = reversed(circuit.slots) if inverse else circuit.slots
    sign = -1.0 if inverse else 1.0
    for slot in slots:
        if slot.param_index is not None:
            arr = _apply_kind(arr, n, slot.kind, slot.qubits, sign * float(params[slot.param_index]))
        elif slot.kind == "x":
            arr = _apply_kind(arr, n, "x", slot.qubits)
        else:
            raise ValueError(f"cannot apply slot kind {slot.kind!r} without parameters")
    return arr


def apply_circuit_columns(
    cols: np.ndarray,
    circuit: "ParametricCircuit",
    params: np.ndarray,
    *,
    inverse: bool = False,
) -> np.ndarray:
    """Run a circuit over a (2**n, m) column batch of states, in place.

    Equivalent to applying the circuit to each column; the layout keeps the
    batch axis contiguous so gate kernels stream through memory.
    """
    n = circuit.n_qubits
    if cols.ndim != 2 or cols.shape[0] != (1 << n):
        raise ValueError("expected a (2**n_qubits, batch) array")
    m = cols.shape[1]
    slots = reversed(circuit.slots) if inverse else circuit.slots
    sign = -1.0 if inverse else 1.0
    for slot in slots:
        if slot.param_index is not None:
            cols = _apply_kind(
                cols, n, slot.kind, slot.qubits,
                sign * float(params[slot.param_index]), tail=m,
            )
        elif slot.kind == "x":
            cols = _apply_kind(cols, n, "x", slot.qubits, tail=m)
        else:
            raise ValueError(f"cannot apply slot kind {slot.kind!r} without parameters")
    return cols


def run_circuit(circuit: "ParametricCircuit", params) -> Statevector:
    """Apply the circuit to |0...0> with the given parameter vector."""
    params = np.asarray(params, dtype=np.float64).reshape(-1)
    if params.shape[0] != circuit.n_params:
        raise ValueError(
            f"circuit expects {circuit.n_params} parameters, got {params.shape[0]}"
        )
    if not np.all(np.isfinite(params)):
        raise ValueError("parameters must be finite")
    vec = np.zeros(1 << circuit.n_qubits, dtype=np.complex128)
    vec[0] = 1.0
    vec = apply_circuit_array(vec, circuit, params)
    return _wrap(vec, circuit.n_qubits)


# ---------------------------------------------------------------------------
# Observables and measurement statistics.


def _operator_apply(operator, vec: np.ndarray) -> np.ndarray:
    """H @ vec for PauliSum / DenseHamiltonian / ndarray / scipy sparse."""
    apply_to = getattr(operator, "apply_to", None)
    if apply_to is not None:
        return apply_to(vec)
    return operator @ vec


def _operator_dim(operator) -> int:
    n = getattr(operator, "n_qubits", None)
    if n is not None:
        return 1 << n
    return operator.shape[0]


def expectation(state: Statevector, hamiltonian) -> float:
    """<psi|H|psi> for a Hermitian operator; the tiny imaginary residue is checked."""
    vec = state.amplitudes
    if _operator_dim(hamiltonian) != vec.shape[0]:
        raise ValueError("operator dimension does not match the state")
    value = complex(np.vdot(vec, _operator_apply(hamiltonian, vec)))
    if abs(value.imag) >= IMAG_RESIDUE_TOL:
        raise ValueError(f"expectation has non-negligible imaginary part {value.imag}")
    return value.real


def z_basis_distribution(
    state: Statevector,
    shots: int | None = None,
    rng: np.random.Generator | None = None,
) -> dict[str, float]:
    """Map bitstring -> probability of observing it in the Z basis.

    Exact by default.  Passing ``shots`` samples a multinomial instead, for
    noise-realism studies.
    """
    n = state.n_qubits
    probs = state.probabilities()
    if shots is not None:
        if shots <= 0:
            raise ValueError("shots must be positive")
        if rng is None:
            rng = np.random.default_rng()
        counts = rng.multinomial(shots, probs / probs.sum())
        return {
            format(i, f"0{n}b"): counts[i] / shots for i in np.flatnonzero(counts)
        }
    return {format(i, f"0{n}b"): float(p) for i, p in enumerate(probs) if p > 0.0}


# ---------------------------------------------------------------------------
# Entanglement diagnostics.


@dataclass(frozen=True)
class Bipartition:
    """A cut of the register into two non-empty complementary subsets."""

    n_qubits: int
    subset_a: frozenset[int]

    def __post_init__(self):
        subset = frozenset(int(q) for q in self.subset_a)
        object.__setattr__(self, "subset_a", subset)
        if not subset:
            raise ValueError("subset_a must be non-empty")
        if any(q < 0 or q >= self.n_qubits for q in subset):
            raise ValueError("subset_a contains out-of-range qubits")
        if len(subset) >= self.n_qubits:
            raise ValueError("subset_b must be non-empty")

    @property
    def subset_b(self) -> frozenset[int]:
        return frozenset(range(self.n_qubits)) - self.subset_a


def schmidt_coefficients(state: Statevector, cut: Bipartition) -> np.ndarray:
    """Singular values of the state reshaped to 2^|A| x 2^|B| (descending)."""
    if cut.n_qubits != state.n_qubits:
        raise ValueError("bipartition does not match the state")
    n = state.n_qubits
    axes_a = sorted(cut.subset_a)
    axes_b = sorted(cut.subset_b)
    tensor = state.amplitudes.reshape((2,) * n)
    matrix = tensor.transpose(axes_a + axes_b).reshape(1 << len(axes_a), 1 << len(axes_b))
    return np.linalg.svd(matrix, compute_uv=False)


def schmidt_rank(state: Statevector, cut: Bipartition, tol: float = DEFAULT_SCHMIDT_TOL) -> int:
    """Number of Schmidt coefficients above ``tol`` across the cut."""
    if not 0.0 < tol < 1.0:
        raise ValueError("tol must lie strictly between 0 and 1")
    return int(np.sum(schmidt_coefficients(state, cut) > tol))


def permute_qubits(state: Statevector, perm) -> Statevector:
    """Relabel qubits: output qubit ``j`` carries input qubit ``perm[j]``."""
    n = state.n_qubits
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(n)):
        raise ValueError(f"perm must be a permutation of range({n})")
    tensor = state.amplitudes.reshape((2,) * n)
    return _wrap(np.ascontiguousarray(tensor.transpose(perm)).reshape(-1), n)
