"""Spin-chain Hamiltonians as Pauli sums, a dense random-matrix family, and
an exact-diagonalization oracle for systems of up to 12 qubits.

All couplings are in units of the bond coupling J, which the experiments fix
to 1.  Ring models use periodic boundary conditions (site n is site 1).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .simulator import Statevector, _wrap

MAX_DENSE_QUBITS = 12
HERMITICITY_ATOL = 1e-12

_PAULI_CHARS = "IXYZ"

_PAULI_MATS = {
    "I": sp.csr_matrix(np.eye(2, dtype=np.complex128)),
    "X": sp.csr_matrix(np.array([[0, 1], [1, 0]], dtype=np.complex128)),
    "Y": sp.csr_matrix(np.array([[0, -1j], [1j, 0]], dtype=np.complex128)),
    "Z": sp.csr_matrix(np.array([[1, 0], [0, -1]], dtype=np.complex128)),
}


@dataclass(frozen=True)
class PauliString:
    """One weighted tensor product of Pauli operators, e.g. 0.5 * XIXZ."""

    ops: str
    coefficient: float

    def __post_init__(self):
        if not self.ops or set(self.ops) - set(_PAULI_CHARS):
            raise ValueError(f"invalid Pauli word {self.ops!r}")
        if not math.isfinite(self.coefficient):
            raise ValueError("coefficient must be finite")
        object.__setattr__(self, "coefficient", float(self.coefficient))

    def to_sparse(self) -> sp.csr_matrix:
        mat = sp.csr_matrix(np.array([[1.0]], dtype=np.complex128))
        for ch in self.ops:
            mat = sp.kron(mat, _PAULI_MATS[ch], format="csr")
        return mat * self.coefficient


class PauliSum:
    """Hamiltonian as a merged list of weighted Pauli words.

    Duplicate words are merged on construction (coefficients summed) and
    exact-zero terms dropped, so term counts are deterministic.
    """

    __slots__ = ("n_qubits", "terms", "_sparse")

    def __init__(self, n_qubits: int, terms: Iterable[PauliString]):
        merged: dict[str, float] = {}
        for term in terms:
            if len(term.ops) != n_qubits:
                raise ValueError(
                    f"term {term.ops!r} does not act on {n_qubits} qubits"
                )
            merged[term.ops] = merged.get(term.ops, 0.0) + term.coefficient
        self.n_qubits = int(n_qubits)
        self.terms = tuple(
            PauliString(ops, coeff) for ops, coeff in merged.items() if coeff != 0.0
        )
        self._sparse = None

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self.n_qubits == other.n_qubits and sorted(
            (t.ops, t.coefficient) for t in self.terms
        ) == sorted((t.ops, t.coefficient) for t in other.terms)

    def __repr__(self) -> str:
        return f"PauliSum(n_qubits={self.n_qubits}, n_terms={len(self.terms)})"

    def coefficients(self) -> dict[str, float]:
        return {t.ops: t.coefficient for t in self.terms}

    def to_sparse(self) -> sp.csr_matrix:
        if self._sparse is None:
            dim = 1 << self.n_qubits
            acc = sp.csr_matrix((dim, dim), dtype=np.complex128)
            for term in self.terms:
                acc = acc + term.to_sparse()
            self._sparse = acc
        return self._sparse

    def apply_to(self, vec: np.ndarray) -> np.ndarray:
        return self.to_sparse() @ vec

    def to_text(self) -> str:
        """One term per line: 'coefficient pauli_word' after an n_qubits header.

        Coefficients are written with repr so the round trip is bit-exact.
        """
        lines = [f"n_qubits={self.n_qubits}"]
        lines.extend(f"{t.coefficient!r} {t.ops}" for t in self.terms)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "PauliSum":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines or not lines[0].startswith("n_qubits="):
            raise ValueError("missing n_qubits header")
        n = int(lines[0].split("=", 1)[1])
        terms = []
        for ln in lines[1:]:
            coeff_str, word = ln.split()
            terms.append(PauliString(word, float(coeff_str)))
        return cls(n, terms)


@dataclass
class DenseHamiltonian:
    """Explicit Hermitian matrix on n qubits (dense models, n <= 12)."""

    n_qubits: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.matrix = np.asarray(self.matrix, dtype=np.complex128)
        dim = 1 << self.n_qubits
        if self.matrix.shape != (dim, dim):
            raise ValueError(f"matrix shape {self.matrix.shape} != ({dim}, {dim})")
        if np.max(np.abs(self.matrix - self.matrix.conj().T)) > HERMITICITY_ATOL:
            raise ValueError("matrix is not Hermitian")

    def apply_to(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec


# ---------------------------------------------------------------------------
# Model builders.


def _bond_word(n: int, i: int, j: int, op: str) -> str:
    chars = ["I"] * n
    chars[i] = op
    chars[j] = op
    return "".join(chars)


def _site_word(n: int, i: int, op: str) -> str:
    chars = ["I"] * n
    chars[i] = op
    return "".join(chars)


def build_tfim(n: int, j_coupling: float, field_h: float) -> PauliSum:
    """Ising ring with a transverse field:

        H = J sum_i Z_i Z_{i+1} + h sum_i X_i,   J > 0, h >= 0,

    with the periodic bond (n, 1) included.  The phase transition sits at
    h = J.
    """
    if n < 2:
        raise ValueError("need at least two sites")
    if j_coupling <= 0:
        raise ValueError("J must be positive")
    if field_h < 0:
        raise ValueError("h must be non-negative")
    terms = []
    for i in range(n):
        terms.append(PauliString(_bond_word(n, i, (i + 1) % n, "Z"), j_coupling))
    for i in range(n):
        terms.append(PauliString(_site_word(n, i, "X"), field_h))
    return PauliSum(n, terms)


def build_xxz(n: int, j_perp: float, j_z: float) -> PauliSum:
    """Anisotropic Heisenberg ring:

        H = sum_i [ J_perp (X_i X_{i+1} + Y_i Y_{i+1}) + J_z Z_i Z_{i+1} ],

    periodic, J_perp > 0.  The planar-to-Ising transition sits at J_z = J_perp.
    """
    if n < 2:
        raise ValueError("need at least two sites")
    if j_perp <= 0:
        raise ValueError("J_perp must be positive")
    if not math.isfinite(j_z):
        raise ValueError("J_z must be finite")
    terms = []
    for i in range(n):
        nxt = (i + 1) % n
        terms.append(PauliString(_bond_word(n, i, nxt, "X"), j_perp))
        terms.append(PauliString(_bond_word(n, i, nxt, "Y"), j_perp))
        terms.append(PauliString(_bond_word(n, i, nxt, "Z"), j_z))
    return PauliSum(n, terms)


def _gue_matrix(n: int, rng: np.random.Generator) -> np.ndarray:
    dim = 1 << n
    # Entries of A are standard complex Gaussians (unit variance).
    a = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    return (a + a.conj().T) / 2.0


def build_gue_interpolation(n: int, alpha: float, seed: int) -> DenseHamiltonian:
    """Convex combination (1 - alpha) H1 + alpha H2 of two random Hermitian
    matrices drawn once per seed from the Gaussian unitary ensemble."""
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"dense model limited to {MAX_DENSE_QUBITS} qubits")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    h1, h2 = gue_endpoints(n, seed)
    return DenseHamiltonian(n, (1.0 - alpha) * h1 + alpha * h2)


def gue_endpoints(n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """The two GUE endpoint matrices for a seed (H1 drawn first, then H2)."""
    rng = np.random.default_rng(seed)
    return _gue_matrix(n, rng), _gue_matrix(n, rng)


# ---------------------------------------------------------------------------
# Exact diagonalization oracle.


def to_dense(h: PauliSum) -> DenseHamiltonian:
    """Kronecker-product expansion of a Pauli sum."""
    if h.n_qubits > MAX_DENSE_QUBITS:
        raise ValueError(f"dense expansion limited to {MAX_DENSE_QUBITS} qubits")
    return DenseHamiltonian(h.n_qubits, h.to_sparse().toarray())


_GROUND_CACHE: dict[str, tuple[float, np.ndarray]] = {}


def _ground_cache_key(h) -> str:
    if isinstance(h, PauliSum):
        return "p:" + h.to_text()
    return "d:" + hashlib.sha256(np.ascontiguousarray(h.matrix).tobytes()).hexdigest()


def clear_ground_cache() -> None:
    _GROUND_CACHE.clear()


def exact_ground(h) -> tuple[float, Statevector]:
    """Smallest eigenvalue and a unit ground eigenvector of H.

    Results are cached per Hamiltonian; sweeps over a parameter grid reuse
    them freely.
    """
    n = h.n_qubits
    if n > MAX_DENSE_QUBITS:
        raise ValueError(f"system too large for exact diagonalization (n={n})")
    key = _ground_cache_key(h)
    hit = _GROUND_CACHE.get(key)
    if hit is None:
        hit = _compute_ground(h)
        _GROUND_CACHE[key] = hit
    energy, vec = hit
    return energy, _wrap(vec.copy(), n)


def _compute_ground(h) -> tuple[float, np.ndarray]:
    dim = 1 << h.n_qubits
    if isinstance(h, DenseHamiltonian) or dim <= 64:
        matrix = h.matrix if isinstance(h, DenseHamiltonian) else h.to_sparse().toarray()
        vals, vecs = np.linalg.eigh(matrix)
        vec = vecs[:, 0]
        return float(vals[0]), vec / np.linalg.norm(vec)
    sparse = h.to_sparse()
    # Fixed start vector keeps the Lanczos run reproducible.
    v0 = np.full(dim, 1.0 / math.sqrt(dim))
    try:
        vals, vecs = spla.eigsh(sparse, k=1, which="SA", v0=v0)
    except spla.ArpackNoConvergence:
        vals, vecs = np.linalg.eigh(sparse.toarray())
        vecs = vecs[:, :1]
    vec = vecs[:, 0]
    return float(vals[0]), vec / np.linalg.norm(vec)
