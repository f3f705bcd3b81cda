"""
Ensemble cost, subspace trace and post-processing diagonalisation.

    E_C(theta) = sum_j w_j <Phi_j|U^dag H U|Phi_j> (+ mu sum_j w_j <S^2>_j)
    E_T(theta) = (1/K) sum_j <Phi_j|U^dag H U|Phi_j>
"""

import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .ansatz import AnsatzCircuit, InitialState, apply_amplitudes
from .config import settings
from .exceptions import DimensionError, NumericalError, ValidationError
from .fermion import sector_indices
from .operators import DenseHermitian, PauliOperator, eigendecompose
from .utils import state_label

logger = logging.getLogger(__name__)

WEIGHT_SUM_TOLERANCE = 1e-12
ORTHOGONALITY_TOLERANCE = 1e-12


class WeightKind(str, Enum):
    EQUI = "equi"
    OPTIMAL = "optimal"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class WeightScheme:
    kind: WeightKind
    values: Tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "kind", WeightKind(self.kind))
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValidationError("A weight scheme needs at least one weight")
        if any(v < 0 for v in values):
            raise ValidationError(f"Weights must be non-negative, got {values}")
        if abs(sum(values) - 1.0) > WEIGHT_SUM_TOLERANCE:
            raise ValidationError(f"Weights sum to {sum(values)!r}, expected 1")
        object.__setattr__(self, "values", values)

    @property
    def count(self) -> int:
        return len(self.values)

    @property
    def is_nonincreasing(self) -> bool:
        return all(a >= b for a, b in zip(self.values, self.values[1:]))

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def weights(kind: str, count: int, values: Optional[Sequence[float]] = None) -> WeightScheme:
    """
    Build a weight scheme

    Args:
        kind: "equi" (1/K each), "optimal" ((2K-1-2j)/K^2) or "explicit"
        count: ensemble size K
        values: the weights for kind="explicit"
    """
    kind = WeightKind(kind)
    if count < 1:
        raise ValidationError("Ensemble size must be at least 1")
    if kind == WeightKind.EQUI:
        return WeightScheme(kind, tuple([1.0 / count] * count))
    if kind == WeightKind.OPTIMAL:
        return WeightScheme(kind, tuple((2 * count - 1 - 2 * j) / count ** 2 for j in range(count)))
    if values is None or len(values) != count:
        raise ValidationError(f"Explicit weights need exactly {count} values")
    return WeightScheme(kind, tuple(values))


@dataclass(frozen=True)
class EnsembleEvaluation:
    per_state_energies: np.ndarray
    cost: float
    trace: float
    penalty_value: float = 0.0

    @property
    def energy_order(self) -> Tuple[int, ...]:
        return tuple(int(i) for i in np.argsort(self.per_state_energies, kind="stable"))


@dataclass
class EnsembleProblem:
    """
    K orthonormal initial states driven by one shared circuit

    `particle_sector` = (N_alpha, N_beta) restricts the exact reference to
    determinants of that sector; None uses the whole register.
    """
    hamiltonian: PauliOperator
    initial_states: List[InitialState]
    circuit: AnsatzCircuit
    weights: WeightScheme
    penalty_operator: Optional[PauliOperator] = None
    penalty_strength: float = 0.0
    particle_sector: Optional[Tuple[int, int]] = None
    label: str = ""

    def __post_init__(self):
        nq = self.hamiltonian.qubit_count
        if self.circuit.qubit_count != nq:
            raise DimensionError(f"Circuit acts on {self.circuit.qubit_count} qubits, Hamiltonian on {nq}")
        if not self.initial_states:
            raise ValidationError("An ensemble needs at least one initial state")
        for state in self.initial_states:
            if state.qubit_count != nq:
                raise DimensionError(f"Initial state {state.label!r} has {state.qubit_count} qubits, expected {nq}")
        if self.weights.count != len(self.initial_states):
            raise DimensionError(f"{self.weights.count} weights for {len(self.initial_states)} states")
        if self.penalty_strength < 0:
            raise ValidationError("Penalty strength must be non-negative")
        if self.penalty_operator is not None and self.penalty_operator.qubit_count != nq:
            raise DimensionError("Penalty operator acts on the wrong register size")
        overlap = self.initial_matrix.conj().T @ self.initial_matrix
        deviation = float(np.max(np.abs(overlap - np.eye(self.state_count))))
        if deviation > ORTHOGONALITY_TOLERANCE:
            raise ValidationError(f"Initial states are not orthonormal (deviation {deviation:.3e})")

    @property
    def state_count(self) -> int:
        return len(self.initial_states)

    @property
    def qubit_count(self) -> int:
        return self.hamiltonian.qubit_count

    @property
    def parameter_count(self) -> int:
        return self.circuit.parameter_count

    @property
    def has_penalty(self) -> bool:
        return self.penalty_operator is not None and self.penalty_strength > 0

    @cached_property
    def initial_matrix(self) -> np.ndarray:
        """(2^M, K) initial states as columns"""
        return np.stack([s.to_statevector().amplitudes for s in self.initial_states], axis=1)

    @cached_property
    def effective_operator(self) -> PauliOperator:
        """H + mu S^2, the operator every state of the cost sees"""
        if self.has_penalty:
            return self.hamiltonian + self.penalty_strength * self.penalty_operator
        return self.hamiltonian

    @property
    def state_labels(self) -> List[str]:
        return [state_label(j) for j in range(self.state_count)]

    def final_states(self, params: Sequence[float]) -> np.ndarray:
        """(2^M, K) columns U(theta)|Phi_j>"""
        return apply_amplitudes(self.circuit, params, self.initial_matrix)


def _column_expectations(states: np.ndarray, op: PauliOperator) -> np.ndarray:
    return np.real(np.sum(states.conj() * op.apply(states), axis=0))


def evaluate(problem: EnsembleProblem, params: Sequence[float]) -> EnsembleEvaluation:
    states = problem.final_states(params)
    energies = _column_expectations(states, problem.hamiltonian)
    w = problem.weights.as_array()
    penalty = 0.0
    if problem.has_penalty:
        penalty = problem.penalty_strength * float(w @ _column_expectations(states, problem.penalty_operator))
    cost = float(w @ energies) + penalty
    trace = float(np.mean(energies))
    if not (np.isfinite(cost) and np.isfinite(trace)):
        raise NumericalError("Ensemble evaluation produced a non-finite value")
    return EnsembleEvaluation(energies, cost, trace, penalty)


def subspace_matrix(problem: EnsembleProblem, params: Sequence[float], include_penalty: bool = False) -> DenseHermitian:
    """K x K matrix <Psi_a(theta)|H|Psi_b(theta)>"""
    states = problem.final_states(params)
    op = problem.effective_operator if include_penalty else problem.hamiltonian
    mat = states.conj().T @ op.apply(states)
    # enforce exact Hermiticity of the numerically assembled block
    return DenseHermitian(0.5 * (mat + mat.conj().T))


def post_diagonalize(problem: EnsembleProblem, params: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal mixing matrix of the subspace matrix"""
    return eigendecompose(subspace_matrix(problem, params))


# ============================================
# Exact reference
# ============================================

@dataclass(frozen=True)
class ExactReference:
    """K lowest eigenvalues of the effective operator within the problem's sector"""
    eigenvalues: np.ndarray
    sector_dimension: int
    eigenvectors: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def for_problem(cls, problem: EnsembleProblem, with_vectors: bool = False) -> "ExactReference":
        count = problem.state_count
        matrix = problem.effective_operator.sparse_matrix
        dim = 1 << problem.qubit_count
        if problem.particle_sector is not None:
            indices = sector_indices(problem.qubit_count, *problem.particle_sector)
        else:
            indices = np.arange(dim)
        if indices.size < count:
            raise ValidationError(f"Sector of dimension {indices.size} cannot hold {count} states")
        if indices.size > settings.MAX_EIGEN_DIMENSION:
            raise NumericalError(f"Exact reference dimension {indices.size} exceeds the eigensolver limit")
        block = matrix[indices][:, indices].toarray()
        values, vectors = eigendecompose(DenseHermitian(block))
        full_vectors = None
        if with_vectors:
            full_vectors = np.zeros((dim, count), dtype=vectors.dtype)
            full_vectors[indices] = vectors[:, :count]
        logger.debug("Exact reference over a %d-dimensional sector: %s", indices.size, values[:count])
        return cls(values[:count], int(indices.size), full_vectors)

    def weighted_energy(self, scheme: WeightScheme) -> float:
        return float(scheme.as_array() @ self.eigenvalues)

    @property
    def trace(self) -> float:
        return float(np.mean(self.eigenvalues))

    def cost_error(self, evaluation: EnsembleEvaluation, scheme: WeightScheme) -> float:
        return abs(evaluation.cost - self.weighted_energy(scheme))

    def trace_error(self, evaluation: EnsembleEvaluation) -> float:
        return abs(evaluation.trace - self.trace)

    def state_errors(self, energies: Sequence[float]) -> np.ndarray:
        """|sorted(energies) - exact| per state"""
        return np.abs(np.sort(np.asarray(energies, dtype=float)) - self.eigenvalues)
