"""
Parameterized circuits acting on dense statevectors.

Two families are built here: the disentangled n-GUCCSD product of
Jordan-Wigner generator exponentials, and the linearly entangled Ry-CNOT
hardware-efficient ansatz. Initial ensemble states (Hartree-Fock
determinant, open-shell singlet CSF, computational bitstrings) are prepared
directly as amplitudes.

A rotation gate with parameter theta and weighted words {c_w P_w} applies
prod_w exp(-i theta c_w P_w) in stored order; the words of one gate commute.
"""

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property
from types import MappingProxyType
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from .exceptions import DimensionError, NumericalError, ValidationError
from .fermion import (
    apply_ladder_string,
    enumerate_guccsd_generators,
    excitation_operator,
    spin_orbital,
    BETA,
)
from .operators import PauliWord, Statevector, cnot_amplitudes, rotate_amplitudes

logger = logging.getLogger(__name__)

NORM_TOLERANCE = 1e-12


# ============================================
# Gates
# ============================================

@dataclass(frozen=True)
class PauliRotation:
    """exp(-i theta sum_w c_w P_w) for commuting words, theta = params[parameter]"""
    words: Tuple[PauliWord, ...]
    coefficients: Tuple[float, ...]
    parameter: int
    label: str = ""

    def __post_init__(self):
        if len(self.words) != len(self.coefficients):
            raise ValidationError("Each rotation word needs exactly one coefficient")
        if not self.words:
            raise ValidationError(f"Rotation {self.label!r} has no Pauli words")


@dataclass(frozen=True)
class CNOTGate:
    control: int
    target: int

    def __post_init__(self):
        if self.control == self.target:
            raise ValidationError("CNOT control and target must differ")


Gate = Union[PauliRotation, CNOTGate]


@dataclass(frozen=True)
class RotationStep:
    """One word of a rotation gate; the unit the simulator and gradient sweep over"""
    word: PauliWord
    coefficient: float
    parameter: int


Step = Union[RotationStep, CNOTGate]


@dataclass(frozen=True)
class AnsatzCircuit:
    qubit_count: int
    gates: Tuple[Gate, ...]
    parameter_count: int
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "gates", tuple(self.gates))
        used = set()
        for gate in self.gates:
            if isinstance(gate, CNOTGate):
                for qubit in (gate.control, gate.target):
                    if not 0 <= qubit < self.qubit_count:
                        raise DimensionError(f"CNOT qubit {qubit} outside a {self.qubit_count}-qubit register")
            else:
                if any(w.qubit_count != self.qubit_count for w in gate.words):
                    raise DimensionError(f"Rotation {gate.label!r} acts on the wrong register size")
                used.add(gate.parameter)
        if used != set(range(self.parameter_count)):
            raise ValidationError(
                f"Parameter indices must cover [0, {self.parameter_count}) exactly, got {sorted(used)}"
            )

    @cached_property
    def steps(self) -> Tuple[Step, ...]:
        """Gates flattened into single-word rotations and CNOTs, in application order"""
        out: List[Step] = []
        for gate in self.gates:
            if isinstance(gate, CNOTGate):
                out.append(gate)
            else:
                out.extend(
                    RotationStep(word, coeff, gate.parameter)
                    for word, coeff in zip(gate.words, gate.coefficients)
                )
        return tuple(out)

    def check_parameters(self, params: Sequence[float]) -> np.ndarray:
        theta = np.asarray(params, dtype=float).reshape(-1)
        if theta.size != self.parameter_count:
            raise DimensionError(
                f"Circuit {self.name!r} takes {self.parameter_count} parameters, got {theta.size}"
            )
        return theta


def apply_step(amplitudes: np.ndarray, step: Step, theta: np.ndarray, inverse: bool = False) -> np.ndarray:
    if isinstance(step, CNOTGate):
        return cnot_amplitudes(amplitudes, step.control, step.target)
    angle = theta[step.parameter] * step.coefficient
    return rotate_amplitudes(amplitudes, step.word, -angle if inverse else angle)


def apply_amplitudes(circuit: AnsatzCircuit, params: Sequence[float], amplitudes: np.ndarray) -> np.ndarray:
    """U(theta) on a (2^M,) vector or a (2^M, K) batch of column states"""
    theta = circuit.check_parameters(params)
    if amplitudes.shape[0] != 1 << circuit.qubit_count:
        raise DimensionError(
            f"{amplitudes.shape[0]} amplitudes do not describe {circuit.qubit_count} qubits"
        )
    out = np.asarray(amplitudes, dtype=complex)
    for step in circuit.steps:
        out = apply_step(out, step, theta)
    return out


def unitary(circuit: AnsatzCircuit, params: Sequence[float]) -> np.ndarray:
    """Dense 2^M x 2^M matrix of U(theta)"""
    return apply_amplitudes(circuit, params, np.eye(1 << circuit.qubit_count, dtype=complex))


# ============================================
# Builders
# ============================================

def build_guccsd(active_orbitals: int, repetitions: int = 1) -> AnsatzCircuit:
    """
    n-GUCCSD: `repetitions` copies of the generator product, each with its own
    parameter block

    For generator T = tau - tau^dagger with Jordan-Wigner image sum_w d_w P_w
    (d_w imaginary), exp(theta T) = prod_w exp(-i theta c_w P_w) with c_w = i d_w.
    """
    if repetitions < 1:
        raise ValidationError("GUCCSD needs at least one repetition")
    qubit_count = 2 * active_orbitals
    bundles = enumerate_guccsd_generators(active_orbitals)

    mapped: List[Tuple[str, Tuple[PauliWord, ...], Tuple[float, ...]]] = []
    for bundle in bundles:
        image = bundle.to_pauli_sum(qubit_count)
        words, coeffs = [], []
        for word, d in sorted(image.terms.items()):
            d = complex(d)
            if abs(d.real) > 1e-12:
                raise NumericalError(f"Generator {bundle.label} is not anti-Hermitian")
            words.append(word)
            coeffs.append(-d.imag)
        for i, a in enumerate(words):
            for b in words[i + 1:]:
                if not a.commutes_with(b):
                    raise NumericalError(f"Generator {bundle.label} has non-commuting words {a}, {b}")
        mapped.append((bundle.label, tuple(words), tuple(coeffs)))

    gates: List[Gate] = []
    for rep in range(repetitions):
        offset = rep * len(mapped)
        for k, (label, words, coeffs) in enumerate(mapped):
            gates.append(PauliRotation(words, coeffs, offset + k, label=f"{label}#{rep}"))

    circuit = AnsatzCircuit(
        qubit_count, tuple(gates), repetitions * len(mapped), name=f"{repetitions}-GUCCSD"
    )
    logger.debug(
        "Built %s on %d qubits: %d parameters, %d rotation steps",
        circuit.name, qubit_count, circuit.parameter_count, len(circuit.steps),
    )
    return circuit


def _ry(qubit_count: int, qubit: int, parameter: int) -> PauliRotation:
    # R_y(theta) = exp(-i theta Y / 2)
    word = PauliWord.from_sparse(qubit_count, {qubit: "Y"})
    return PauliRotation((word,), (0.5,), parameter, label=f"Ry{qubit}")


def build_rycnot(qubits: int, layers: int) -> AnsatzCircuit:
    """
    Initial Ry column, then `layers` blocks of (Ry column, CNOT ladder m -> m+1)

    Parameters are laid out column by column: params[n * M + m] drives qubit m
    in column n (column 0 is the initial one).
    """
    if qubits < 2:
        raise ValidationError("The Ry-CNOT ansatz needs at least two qubits")
    if layers < 1:
        raise ValidationError("The Ry-CNOT ansatz needs at least one layer")
    gates: List[Gate] = [_ry(qubits, m, m) for m in range(qubits)]
    for layer in range(1, layers + 1):
        gates.extend(_ry(qubits, m, layer * qubits + m) for m in range(qubits))
        gates.extend(CNOTGate(m, m + 1) for m in range(qubits - 1))
    return AnsatzCircuit(qubits, tuple(gates), qubits * (layers + 1), name=f"RyCNOT(L={layers})")


ANSATZ_BUILDERS: Dict[str, Callable[..., AnsatzCircuit]] = {
    "guccsd": build_guccsd,
    "rycnot": build_rycnot,
}


def get_builder(kind: str) -> Callable[..., AnsatzCircuit]:
    if kind not in ANSATZ_BUILDERS:
        raise ValidationError(f"Ansatz '{kind}' not recognized. Available: {list(ANSATZ_BUILDERS)}")
    return ANSATZ_BUILDERS[kind]


# ============================================
# Initial states
# ============================================

@dataclass(frozen=True)
class InitialState:
    """Sparse unit-norm state: basis index -> amplitude"""
    label: str
    qubit_count: int
    amplitudes: Mapping[int, complex] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: Dict[int, complex] = {}
        for index, amp in sorted(self.amplitudes.items()):
            if not 0 <= index < 1 << self.qubit_count:
                raise ValidationError(f"Occupation {index} exceeds a {self.qubit_count}-qubit register")
            if amp != 0:
                cleaned[int(index)] = complex(amp)
        norm = float(np.sqrt(sum(abs(a) ** 2 for a in cleaned.values())))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValidationError(f"Initial state {self.label!r} has norm {norm!r}")
        object.__setattr__(self, "amplitudes", MappingProxyType(cleaned))

    @property
    def bitstrings(self) -> Dict[str, complex]:
        """Amplitudes keyed by big-endian bitstring (rightmost character = qubit 0)"""
        return {format(i, f"0{self.qubit_count}b"): a for i, a in self.amplitudes.items()}

    def to_statevector(self) -> Statevector:
        amps = np.zeros(1 << self.qubit_count, dtype=complex)
        for index, amp in self.amplitudes.items():
            amps[index] = amp
        return Statevector(self.qubit_count, amps)


def occupation_string(index: int, qubit_count: int) -> str:
    """Occupation listed qubit 0 first, e.g. HF with 4 electrons on 6 qubits -> "111100" """
    return "".join(str((index >> q) & 1) for q in range(qubit_count))


def hf_state(electrons: int, qubit_count: int) -> InitialState:
    if not 0 <= electrons <= qubit_count:
        raise ValidationError(f"{electrons} electrons exceed {qubit_count} spin-orbitals")
    return InitialState(f"hf({electrons})", qubit_count, {(1 << electrons) - 1: 1.0})


def csf_open_shell_singlet(
    occupied: int, virtual: int, qubit_count: int, electrons: Optional[int] = None
) -> InitialState:
    """
    (E_ai |HF>) / sqrt(2): singlet single excitation from spatial orbital i to a

    Without an explicit electron count, orbitals 0..i are doubly occupied.
    """
    electrons = 2 * (occupied + 1) if electrons is None else electrons
    hf_bits = (1 << electrons) - 1
    if electrons > qubit_count or spin_orbital(virtual, BETA) >= qubit_count:
        raise ValidationError(f"Excitation {occupied}->{virtual} does not fit on {qubit_count} qubits")
    amps: Dict[int, complex] = {}
    for term in excitation_operator(virtual, occupied):
        result = apply_ladder_string(term.ops, hf_bits)
        if result is None:
            raise ValidationError(
                f"Orbital {occupied} must be doubly occupied and {virtual} empty in hf({electrons})"
            )
        sign, bits = result
        amps[bits] = amps.get(bits, 0.0) + sign / np.sqrt(2.0)
    return InitialState(f"csf({occupied}->{virtual})", qubit_count, amps)


def bitstring_state(bitstring: str) -> InitialState:
    """Big-endian: "0101" is basis index 5"""
    if not bitstring or set(bitstring) - {"0", "1"}:
        raise ValidationError(f"Invalid bitstring {bitstring!r}")
    return InitialState(bitstring, len(bitstring), {int(bitstring, 2): 1.0})


_LABEL = re.compile(r"^\s*(hf|csf|csf_open_shell_singlet|bitstring)\s*\(([^)]*)\)\s*$")


def prepare_initial(label: str, qubit_count: int) -> InitialState:
    """
    Parse a state label into an InitialState

    Args:
        label: "hf(n)", "csf(i,a)" / "csf_open_shell_singlet(i,a[,n])" or "bitstring(b)"
        qubit_count: register size

    Returns:
        The prepared state
    """
    match = _LABEL.match(label)
    if not match:
        raise ValidationError(f"Unknown initial-state label {label!r}")
    kind, raw = match.group(1), match.group(2)
    args = [a.strip() for a in raw.split(",") if a.strip()]
    try:
        if kind == "hf" and len(args) == 1:
            return hf_state(int(args[0]), qubit_count)
        if kind.startswith("csf") and len(args) in (2, 3):
            electrons = int(args[2]) if len(args) == 3 else None
            return csf_open_shell_singlet(int(args[0]), int(args[1]), qubit_count, electrons)
        if kind == "bitstring" and len(args) == 1:
            state = bitstring_state(args[0])
            if state.qubit_count != qubit_count:
                raise ValidationError(f"Bitstring {args[0]} does not have {qubit_count} qubits")
            return state
    except ValueError as e:
        raise ValidationError(f"Bad arguments in initial-state label {label!r}: {e}")
    raise ValidationError(f"Wrong number of arguments in initial-state label {label!r}")


def apply(circuit: AnsatzCircuit, params: Sequence[float], start: Union[InitialState, Statevector]) -> Statevector:
    """|Psi(theta)> = U(theta) |start>"""
    state = start.to_statevector() if isinstance(start, InitialState) else start
    if state.qubit_count != circuit.qubit_count:
        raise DimensionError(f"State has {state.qubit_count} qubits, circuit {circuit.qubit_count}")
    return Statevector(circuit.qubit_count, apply_amplitudes(circuit, params, state.amplitudes))
