"""
Operator core: Pauli-word algebra, dense statevector simulation and the
dense Hermitian eigensolver every other module uses as its exactness oracle.

Conventions:
    - qubit 0 is the least-significant bit of an amplitude index;
    - a Pauli word is stored in symplectic form (x_mask, z_mask) with
      P = i^{|x & z|} X^x Z^z, so Y = iXZ on each qubit;
    - letters are listed qubit 0 first ("XZ" means X on qubit 0, Z on qubit 1);
    - a rotation by `angle` about word P applies exp(angle * (-iP)), i.e. the
      anti-Hermitian generator -iP with (-iP)^2 = -I.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property, lru_cache, reduce
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse

from .config import settings
from .exceptions import DimensionError, SizeLimitError, ValidationError

logger = logging.getLogger(__name__)

LETTERS = "IXYZ"
_LETTER_BITS = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_SINGLE_QUBIT = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_I_POWERS = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def _popcount(value: int) -> int:
    return bin(value).count("1")


@lru_cache(maxsize=None)
def _basis_indices(qubit_count: int) -> np.ndarray:
    idx = np.arange(1 << qubit_count, dtype=np.int64)
    idx.setflags(write=False)
    return idx


def _parity(indices: np.ndarray, mask: int) -> np.ndarray:
    parity = np.zeros(indices.shape, dtype=np.int64)
    qubit = 0
    while mask:
        if mask & 1:
            parity ^= (indices >> qubit) & 1
        mask >>= 1
        qubit += 1
    return parity


@lru_cache(maxsize=65536)
def _word_action(qubit_count: int, x_mask: int, z_mask: int) -> Tuple[np.ndarray, np.ndarray]:
    """(source index, phase) such that (P psi)[y] = phase[y] * psi[source[y]]"""
    idx = _basis_indices(qubit_count)
    source = idx ^ x_mask
    signs = 1 - 2 * _parity(source, z_mask)
    phase = _I_POWERS[_popcount(x_mask & z_mask) % 4] * signs
    source.setflags(write=False)
    phase.setflags(write=False)
    return source, phase


# ============================================
# Pauli words
# ============================================

@dataclass(frozen=True, order=True)
class PauliWord:
    """Tensor product of single-qubit Paulis on `qubit_count` qubits"""
    qubit_count: int
    x_mask: int = 0
    z_mask: int = 0

    def __post_init__(self):
        if self.qubit_count < 1:
            raise ValidationError("A Pauli word needs at least one qubit")
        limit = 1 << self.qubit_count
        if not (0 <= self.x_mask < limit and 0 <= self.z_mask < limit):
            raise ValidationError(
                f"Pauli masks ({self.x_mask}, {self.z_mask}) do not fit on {self.qubit_count} qubits"
            )

    @classmethod
    def identity(cls, qubit_count: int) -> "PauliWord":
        return cls(qubit_count, 0, 0)

    @classmethod
    def from_letters(cls, letters: str) -> "PauliWord":
        """Build from letters listed qubit 0 first, e.g. "XIZ" """
        x_mask = z_mask = 0
        for qubit, letter in enumerate(letters.upper()):
            if letter not in _LETTER_BITS:
                raise ValidationError(f"Unknown Pauli letter {letter!r}")
            x_bit, z_bit = _LETTER_BITS[letter]
            x_mask |= x_bit << qubit
            z_mask |= z_bit << qubit
        return cls(len(letters), x_mask, z_mask)

    @classmethod
    def from_sparse(cls, qubit_count: int, letters: Mapping[int, str]) -> "PauliWord":
        """Build from {qubit: letter}, identity elsewhere"""
        chars = ["I"] * qubit_count
        for qubit, letter in letters.items():
            if not 0 <= qubit < qubit_count:
                raise DimensionError(f"Qubit {qubit} outside a {qubit_count}-qubit register")
            chars[qubit] = letter
        return cls.from_letters("".join(chars))

    @property
    def letters(self) -> str:
        out = []
        for qubit in range(self.qubit_count):
            bits = ((self.x_mask >> qubit) & 1, (self.z_mask >> qubit) & 1)
            out.append({(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}[bits])
        return "".join(out)

    @property
    def is_identity(self) -> bool:
        return self.x_mask == 0 and self.z_mask == 0

    @property
    def weight(self) -> int:
        return _popcount(self.x_mask | self.z_mask)

    def compose(self, other: "PauliWord") -> Tuple[complex, "PauliWord"]:
        """Product self @ other as (phase, word)"""
        _check_qubits(self.qubit_count, other.qubit_count)
        x = self.x_mask ^ other.x_mask
        z = self.z_mask ^ other.z_mask
        power = (
            _popcount(self.x_mask & self.z_mask)
            + _popcount(other.x_mask & other.z_mask)
            - _popcount(x & z)
            + 2 * _popcount(self.z_mask & other.x_mask)
        ) % 4
        return _I_POWERS[power], PauliWord(self.qubit_count, x, z)

    def commutes_with(self, other: "PauliWord") -> bool:
        return (_popcount(self.x_mask & other.z_mask) + _popcount(self.z_mask & other.x_mask)) % 2 == 0

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """P applied to a (2^M,) vector or a (2^M, K) batch of column states"""
        source, phase = _word_action(self.qubit_count, self.x_mask, self.z_mask)
        if amplitudes.ndim == 2:
            return phase[:, None] * amplitudes[source]
        return phase * amplitudes[source]

    def to_dense(self) -> np.ndarray:
        # qubit 0 is the rightmost Kronecker factor
        factors = [_SINGLE_QUBIT[letter] for letter in reversed(self.letters)]
        return reduce(np.kron, factors)

    def __str__(self) -> str:
        return self.letters


def _check_qubits(expected: int, actual: int) -> None:
    if expected != actual:
        raise DimensionError(f"Qubit-count mismatch: {expected} vs {actual}")


# ============================================
# Operators
# ============================================

class PauliSum:
    """Mutable complex-weighted Pauli sum used while building operators"""

    def __init__(self, qubit_count: int, terms: Optional[Mapping[PauliWord, complex]] = None):
        self.qubit_count = qubit_count
        self.terms: Dict[PauliWord, complex] = {}
        for word, coeff in (terms or {}).items():
            self.add_term(word, coeff)

    @classmethod
    def identity(cls, qubit_count: int, coeff: complex = 1.0) -> "PauliSum":
        return cls(qubit_count, {PauliWord.identity(qubit_count): coeff})

    def add_term(self, word: PauliWord, coeff: complex) -> None:
        _check_qubits(self.qubit_count, word.qubit_count)
        self.terms[word] = self.terms.get(word, 0.0) + coeff

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.qubit_count, self.terms)
        for word, coeff in other.terms.items():
            out.add_term(word, coeff)
        return out

    def __iadd__(self, other: "PauliSum") -> "PauliSum":
        _check_qubits(self.qubit_count, other.qubit_count)
        for word, coeff in other.terms.items():
            self.add_term(word, coeff)
        return self

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + other.scale(-1.0)

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        _check_qubits(self.qubit_count, other.qubit_count)
        out = PauliSum(self.qubit_count)
        for left, a in self.terms.items():
            for right, b in other.terms.items():
                phase, word = left.compose(right)
                out.add_term(word, phase * a * b)
        return out

    def scale(self, factor: complex) -> "PauliSum":
        return PauliSum(self.qubit_count, {w: factor * c for w, c in self.terms.items()})

    def adjoint(self) -> "PauliSum":
        return PauliSum(self.qubit_count, {w: np.conj(c) for w, c in self.terms.items()})

    def pruned(self, tolerance: Optional[float] = None) -> "PauliSum":
        tol = settings.PRUNE_TOLERANCE if tolerance is None else tolerance
        return PauliSum(self.qubit_count, {w: c for w, c in self.terms.items() if abs(c) >= tol})

    def to_operator(self, tolerance: float = 1e-12) -> "PauliOperator":
        """Convert to a real-coefficient (Hermitian) operator"""
        imag = max((abs(c.imag) for c in map(complex, self.terms.values())), default=0.0)
        if imag > tolerance:
            raise ValidationError(f"Pauli sum is not Hermitian (max imaginary coefficient {imag:.3e})")
        return PauliOperator(self.qubit_count, {w: complex(c).real for w, c in self.terms.items()})


@dataclass(frozen=True)
class PauliOperator:
    """Real-weighted sum of Pauli words; Hermitian by construction"""
    qubit_count: int
    terms: Mapping[PauliWord, float] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[PauliWord, float] = {}
        for word, coeff in self.terms.items():
            _check_qubits(self.qubit_count, word.qubit_count)
            cleaned[word] = cleaned.get(word, 0.0) + float(coeff)
        cleaned = {
            w: c for w, c in sorted(cleaned.items()) if abs(c) >= settings.PRUNE_TOLERANCE
        }
        object.__setattr__(self, "terms", MappingProxyType(cleaned))

    @classmethod
    def identity(cls, qubit_count: int, coeff: float = 1.0) -> "PauliOperator":
        return cls(qubit_count, {PauliWord.identity(qubit_count): coeff})

    @classmethod
    def from_labels(cls, labels: Mapping[str, float]) -> "PauliOperator":
        """{"XZ": 0.5, "II": 1.0} with letters listed qubit 0 first"""
        words = {PauliWord.from_letters(k): v for k, v in labels.items()}
        sizes = {w.qubit_count for w in words}
        if len(sizes) != 1:
            raise DimensionError(f"Labels span several register sizes: {sorted(sizes)}")
        return cls(sizes.pop(), words)

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[PauliWord, float]]:
        return iter(self.terms.items())

    def __add__(self, other: "PauliOperator") -> "PauliOperator":
        _check_qubits(self.qubit_count, other.qubit_count)
        merged = dict(self.terms)
        for word, coeff in other.terms.items():
            merged[word] = merged.get(word, 0.0) + coeff
        return PauliOperator(self.qubit_count, merged)

    def __mul__(self, factor: float) -> "PauliOperator":
        return PauliOperator(self.qubit_count, {w: factor * c for w, c in self.terms.items()})

    __rmul__ = __mul__

    def coefficient(self, word: Union[PauliWord, str]) -> float:
        if isinstance(word, str):
            word = PauliWord.from_letters(word)
        return self.terms.get(word, 0.0)

    def to_pauli_sum(self) -> PauliSum:
        return PauliSum(self.qubit_count, dict(self.terms))

    @cached_property
    def sparse_matrix(self) -> scipy.sparse.csr_matrix:
        """CSR matrix of the operator, built from the word actions"""
        dim = 1 << self.qubit_count
        idx = _basis_indices(self.qubit_count)
        rows, cols, data = [], [], []
        for word, coeff in self.terms.items():
            source, phase = _word_action(self.qubit_count, word.x_mask, word.z_mask)
            rows.append(idx)
            cols.append(source)
            data.append(coeff * phase)
        if not rows:
            return scipy.sparse.csr_matrix((dim, dim), dtype=complex)
        return scipy.sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dim, dim),
        ).tocsr()

    def apply(self, amplitudes: np.ndarray) -> np.ndarray:
        """O applied to a (2^M,) vector or (2^M, K) batch"""
        return self.sparse_matrix @ amplitudes

    def __str__(self) -> str:
        return " + ".join(f"{c:+.6g}*{w}" for w, c in self.terms.items()) or "0"


# ============================================
# States
# ============================================

@dataclass(frozen=True)
class Statevector:
    """Dense amplitude vector of length 2^M (qubit 0 = least-significant bit)"""
    qubit_count: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != 1 << self.qubit_count:
            raise DimensionError(
                f"{amps.shape[0]} amplitudes do not describe {self.qubit_count} qubits"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, qubit_count: int, index: int) -> "Statevector":
        amps = np.zeros(1 << qubit_count, dtype=complex)
        amps[index] = 1.0
        return cls(qubit_count, amps)

    @classmethod
    def from_bitstring(cls, bitstring: str) -> "Statevector":
        """Big-endian bitstring: the rightmost character is qubit 0"""
        return cls.basis(len(bitstring), int(bitstring, 2))

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def inner(self, other: "Statevector") -> complex:
        """<self|other>"""
        _check_qubits(self.qubit_count, other.qubit_count)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def apply_pauli_rotation(state: Statevector, word: PauliWord, angle: float) -> Statevector:
    """exp(angle * (-iP)) |state> = cos(angle)|state> - i sin(angle) P|state>"""
    _check_qubits(state.qubit_count, word.qubit_count)
    return Statevector(state.qubit_count, rotate_amplitudes(state.amplitudes, word, angle))


def rotate_amplitudes(amplitudes: np.ndarray, word: PauliWord, angle: float) -> np.ndarray:
    if word.is_identity:
        # global phase exp(-i angle)
        return np.exp(-1j * angle) * amplitudes
    return np.cos(angle) * amplitudes - 1j * np.sin(angle) * word.apply(amplitudes)


def cnot_amplitudes(amplitudes: np.ndarray, control: int, target: int) -> np.ndarray:
    qubits = int(np.log2(amplitudes.shape[0]))
    idx = _basis_indices(qubits)
    source = np.where((idx >> control) & 1, idx ^ (1 << target), idx)
    return amplitudes[source]


def apply_cnot(state: Statevector, control: int, target: int) -> Statevector:
    for qubit in (control, target):
        if not 0 <= qubit < state.qubit_count:
            raise DimensionError(f"Qubit {qubit} outside a {state.qubit_count}-qubit register")
    if control == target:
        raise ValidationError("CNOT control and target must differ")
    return Statevector(state.qubit_count, cnot_amplitudes(state.amplitudes, control, target))


def expectation(state: Statevector, op: PauliOperator) -> float:
    """<psi|O|psi>; real for Hermitian O"""
    _check_qubits(state.qubit_count, op.qubit_count)
    value = np.vdot(state.amplitudes, op.apply(state.amplitudes))
    return float(value.real)


def matrix_element(bra: Statevector, ket: Statevector, op: PauliOperator) -> complex:
    """<bra|O|ket>"""
    _check_qubits(bra.qubit_count, ket.qubit_count)
    _check_qubits(bra.qubit_count, op.qubit_count)
    return complex(np.vdot(bra.amplitudes, op.apply(ket.amplitudes)))


# ============================================
# Dense oracle
# ============================================

@dataclass(frozen=True)
class DenseHermitian:
    """d x d Hermitian matrix"""
    entries: np.ndarray

    def __post_init__(self):
        mat = np.array(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"Expected a square matrix, got shape {mat.shape}")
        scale = max(1.0, float(np.max(np.abs(mat)))) if mat.size else 1.0
        asym = float(np.max(np.abs(mat - mat.conj().T))) if mat.size else 0.0
        if asym > settings.HERMITICITY_TOLERANCE * scale:
            raise ValidationError(f"Matrix is not Hermitian (max |H - H^dagger| = {asym:.3e})")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]


def to_dense(op: PauliOperator) -> DenseHermitian:
    """Kronecker expansion of all terms"""
    if op.qubit_count > settings.MAX_DENSE_QUBITS:
        raise SizeLimitError("Dense expansion qubit count", op.qubit_count, settings.MAX_DENSE_QUBITS)
    dim = 1 << op.qubit_count
    mat = np.zeros((dim, dim), dtype=complex)
    for word, coeff in op.terms.items():
        mat += coeff * word.to_dense()
    return DenseHermitian(mat)


def eigendecompose(h: DenseHermitian) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvector columns"""
    if h.dimension > settings.MAX_EIGEN_DIMENSION:
        raise SizeLimitError("Eigensolver dimension", h.dimension, settings.MAX_EIGEN_DIMENSION)
    entries = h.entries
    if not np.iscomplexobj(entries) or not np.any(entries.imag):
        entries = entries.real
    values, vectors = scipy.linalg.eigh(entries)
    return values, vectors


def states_to_matrix(states: Iterable[Statevector]) -> np.ndarray:
    """Stack states as columns of a (2^M, K) array"""
    states = list(states)
    if not states:
        raise ValidationError("At least one state is required")
    for state in states[1:]:
        _check_qubits(states[0].qubit_count, state.qubit_count)
    return np.stack([s.amplitudes for s in states], axis=1)
