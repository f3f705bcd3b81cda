"""
One-body (Kohn-Sham-like) layer: binary numeral mapping of an N x N matrix
onto log2(N) qubits, model chain Hamiltonians and occupied-subspace utilities.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence, Union

import numpy as np
import scipy.linalg

from .config import settings
from .exceptions import ParseError, SizeLimitError, ValidationError
from .operators import (
    DenseHermitian,
    PauliOperator,
    PauliWord,
    Statevector,
    eigendecompose,
)

logger = logging.getLogger(__name__)


@dataclass
class OneBodyMatrix:
    """Real symmetric N x N one-body matrix, N a power of two"""
    entries: np.ndarray
    label: str = ""

    def __post_init__(self):
        mat = np.asarray(self.entries, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError(f"Expected a square matrix, got shape {mat.shape}")
        n = mat.shape[0]
        if n < 2 or n & (n - 1):
            raise ValidationError(f"Dimension {n} is not a power of two (>= 2)")
        if np.max(np.abs(mat - mat.T)) > settings.HERMITICITY_TOLERANCE * max(1.0, np.max(np.abs(mat))):
            raise ValidationError("One-body matrix is not symmetric")
        self.entries = mat

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    @property
    def qubit_count(self) -> int:
        return self.dimension.bit_length() - 1


@dataclass
class OccupiedSubspace:
    """Occupied orbitals (columns) and their ascending orbital energies"""
    orbital_energies: np.ndarray
    orbitals: np.ndarray

    def __post_init__(self):
        self.orbital_energies = np.asarray(self.orbital_energies, dtype=float).reshape(-1)
        self.orbitals = np.asarray(self.orbitals)
        if self.orbitals.ndim != 2 or self.orbitals.shape[1] != self.orbital_energies.size:
            raise ValidationError("Need one orbital column per orbital energy")
        if self.orbitals.shape[1] > self.orbitals.shape[0]:
            raise ValidationError("More occupied orbitals than basis functions")

    @property
    def occupied_count(self) -> int:
        return self.orbital_energies.size

    def check_orthonormal(self) -> None:
        overlap = self.orbitals.conj().T @ self.orbitals
        err = float(np.max(np.abs(overlap - np.eye(self.occupied_count)))) if self.occupied_count else 0.0
        if err > settings.ORTHONORMALITY_TOLERANCE:
            raise ValidationError(f"Occupied orbitals are not orthonormal (deviation {err:.3e})")


# ============================================
# Mapping
# ============================================

def _popcount_array(values: np.ndarray, bits: int) -> np.ndarray:
    counts = np.zeros(values.shape, dtype=np.int64)
    for bit in range(bits):
        counts += (values >> bit) & 1
    return counts


def binary_map(h: OneBodyMatrix) -> PauliOperator:
    """
    Encode orbital i as computational basis state |i> on log2(N) qubits

    The coefficient of word P = i^{|x&z|} X^x Z^z is Tr(P h) / 2^M. For fixed x
    the traces over all z are one Walsh-Hadamard transform of the band
    h[y ^ x, y]; words with an odd number of Y letters vanish for real
    symmetric h.
    """
    n = h.dimension
    if n > settings.MAX_BINARY_DIMENSION:
        raise SizeLimitError("Binary-mapped dimension", n, settings.MAX_BINARY_DIMENSION)
    m = h.qubit_count
    idx = np.arange(n)
    bands = h.entries[idx[:, None] ^ idx[None, :], idx[:, None]]  # bands[y, x] = h[y ^ x, y]
    transformed = scipy.linalg.hadamard(n) @ bands  # transformed[z, x]
    y_counts = _popcount_array(idx[:, None] & idx[None, :], m)  # y_counts[z, x] = |x & z|

    odd = (y_counts % 2) == 1
    if np.any(np.abs(transformed[odd]) > 1e-12 * n * max(1.0, np.max(np.abs(h.entries)))):
        raise ValidationError("Binary mapping produced a complex coefficient")
    coeffs = np.where(odd, 0.0, np.where(y_counts % 4 == 2, -1.0, 1.0) * transformed / n)

    terms = {
        PauliWord(m, int(x_mask), int(z_mask)): float(coeffs[z_mask, x_mask])
        for z_mask, x_mask in zip(*np.nonzero(np.abs(coeffs) >= settings.PRUNE_TOLERANCE))
    }
    op = PauliOperator(m, terms)
    logger.debug("Binary mapping of %dx%d matrix: %d Pauli terms", n, n, len(op))
    return op


def chain_hamiltonian(sites: int, onsite: float, hopping: float, label: str = "") -> OneBodyMatrix:
    """Open-boundary tight-binding chain"""
    mat = onsite * np.eye(sites) + hopping * (np.eye(sites, k=1) + np.eye(sites, k=-1))
    return OneBodyMatrix(mat, label or f"chain(sites={sites}, onsite={onsite}, hopping={hopping})")


def hydrogen_chain(sites: int, spacing: float, onsite: float = -0.5, decay: float = 1.0) -> OneBodyMatrix:
    """
    Equidistant hydrogen-chain surrogate: nearest-neighbour hopping
    t(R) = -exp(-R / decay) (Hartree, R in Angstrom)
    """
    if spacing <= 0:
        raise ValidationError("Spacing must be positive")
    hopping = -float(np.exp(-spacing / decay))
    return chain_hamiltonian(sites, onsite, hopping, label=f"R={spacing:g}")


def read_matrix(path: Union[str, Path]) -> OneBodyMatrix:
    """First line N, then N rows of N whitespace-separated reals"""
    path = Path(path)
    source = str(path)
    with open(path, "r", encoding="utf-8") as fin:
        lines = [(i, ln.split()) for i, ln in enumerate(fin, start=1) if ln.strip()]
    if not lines:
        raise ParseError(source, 1, "empty matrix file")
    line_number, head = lines[0]
    try:
        n = int(head[0])
    except (ValueError, IndexError):
        raise ParseError(source, line_number, "first line must hold the dimension N")
    if len(head) != 1 or n < 1:
        raise ParseError(source, line_number, "first line must hold a single positive N")
    if len(lines) - 1 != n:
        raise ParseError(source, lines[-1][0], f"expected {n} rows, found {len(lines) - 1}")
    rows: List[List[float]] = []
    for line_number, tokens in lines[1:]:
        if len(tokens) != n:
            raise ParseError(source, line_number, f"expected {n} values, found {len(tokens)}")
        try:
            rows.append([float(t) for t in tokens])
        except ValueError as e:
            raise ParseError(source, line_number, str(e))
    return OneBodyMatrix(np.array(rows), label=path.stem)


def write_matrix(path: Union[str, Path], h: OneBodyMatrix) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8") as fout:
        fout.write(f"{h.dimension}\n")
        for row in h.entries:
            fout.write(" ".join(repr(float(v)) for v in row) + "\n")
    return path


def computational_basis_states(qubit_count: int, count: int) -> List[Statevector]:
    """The first `count` computational basis states |0...0>, |0...01>, ..."""
    if count > 1 << qubit_count:
        raise ValidationError(f"{count} basis states requested on {qubit_count} qubits")
    return [Statevector.basis(qubit_count, k) for k in range(count)]


# ============================================
# Occupied subspace
# ============================================

def exact_occupied_subspace(h: OneBodyMatrix, occupied_count: int) -> OccupiedSubspace:
    if not 1 <= occupied_count <= h.dimension:
        raise ValidationError(f"Cannot occupy {occupied_count} of {h.dimension} orbitals")
    values, vectors = eigendecompose(DenseHermitian(h.entries))
    return OccupiedSubspace(values[:occupied_count], vectors[:, :occupied_count])


def occupied_subspace_from_states(
    eigenvalues: Sequence[float], mixing: np.ndarray, states: np.ndarray
) -> OccupiedSubspace:
    """
    Orbitals from a post-diagonalised ensemble: columns of states @ mixing

    Args:
        eigenvalues: ascending subspace eigenvalues
        mixing: K x K eigenvector matrix of the subspace Hamiltonian
        states: (N, K) ensemble amplitudes in the binary-mapped basis
    """
    orbitals = np.asarray(states) @ np.asarray(mixing)
    return OccupiedSubspace(np.asarray(eigenvalues, dtype=float), orbitals)


def occupied_trace(sub: OccupiedSubspace) -> float:
    """2 * sum of occupied orbital energies"""
    if sub.occupied_count == 0:
        raise ValidationError("Occupied subspace is empty")
    return 2.0 * float(np.sum(sub.orbital_energies))


def occupied_density_matrix(sub: OccupiedSubspace) -> DenseHermitian:
    """gamma = 2 sum_k |phi_k><phi_k| (gamma^2 = 2 gamma)"""
    sub.check_orthonormal()
    phi = sub.orbitals
    return DenseHermitian(2.0 * phi @ phi.conj().T)
