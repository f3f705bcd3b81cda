"""
Built-in problem families and the translation of a ScenarioConfig (at one
scan value) into an EnsembleProblem.
"""

import logging
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

import numpy as np
import scipy.stats
from pydantic import ValidationError as PydanticValidationError

from .ansatz import (
    AnsatzCircuit,
    InitialState,
    build_guccsd,
    build_rycnot,
    csf_open_shell_singlet,
    hf_state,
    prepare_initial,
)
from .config import settings
from .ensemble import EnsembleProblem, weights
from .exceptions import ConfigError, ValidationError
from .fermion import (
    FrozenCoreHamiltonian,
    MolecularIntegrals,
    freeze_core,
    jordan_wigner,
    read_fcidump,
    s_squared_operator,
)
from .models.optimizer import InitialParameters
from .models.scenario import AnsatzKind, ScenarioConfig
from .operators import PauliOperator
from .qdft import OneBodyMatrix, binary_map, chain_hamiltonian, hydrogen_chain, read_matrix

logger = logging.getLogger(__name__)

# Formaldimine analog: three active orbitals (n, pi, pi*), four electrons
CROSSING_ANGLE = 121.0
ANGLE_SCALE = 60.0
ORBITAL_ENERGIES = (-2.0, -1.0)
ONSITE_REPULSION = 1.0
SIDE_COUPLING = 0.05


def _gap(alpha: float) -> float:
    return 1.0 + (alpha - CROSSING_ANGLE) / ANGLE_SCALE


def formaldimine_integrals(alpha: float, coupling: float = 0.1, side_coupling: float = SIDE_COUPLING) -> MolecularIntegrals:
    """
    CAS(4,3) model whose closed-shell determinant and open-shell singlet
    exchange ground-state character at alpha = 121 degrees

    With on-site repulsion only, E(HF) = -4 and E(CSF) = -5 + gap(alpha),
    gap(alpha) = 1 + (alpha - 121) / 60; `coupling` mixes orbitals 1 and 2.
    """
    if not 99.0 <= alpha <= 180.0:
        raise ValidationError(f"Angle {alpha} outside [99, 180] degrees")
    eps = np.array([ORBITAL_ENERGIES[0], ORBITAL_ENERGIES[1], ORBITAL_ENERGIES[1] + _gap(alpha)])
    h = np.diag(eps)
    h[1, 2] = h[2, 1] = coupling
    h[0, 1] = h[1, 0] = side_coupling
    h[0, 2] = h[2, 0] = side_coupling
    g = np.zeros((3, 3, 3, 3))
    for p in range(3):
        g[p, p, p, p] = ONSITE_REPULSION
    ints = MolecularIntegrals(3, 0.0, h, g, electron_count=4)
    return ints


def formaldimine_states(qubit_count: int = 6) -> List[InitialState]:
    """Phi_A = HF (orbitals 0, 1 doubly occupied), Phi_B = singlet 1 -> 2"""
    return [hf_state(4, qubit_count), csf_open_shell_singlet(1, 2, qubit_count, electrons=4)]


def formaldimine_analog(alpha: float, coupling: float = 0.1) -> FrozenCoreHamiltonian:
    return FrozenCoreHamiltonian.from_integrals(formaldimine_integrals(alpha, coupling), 4)


def reversed_overlap_instance(alpha: float = 110.0) -> FrozenCoreHamiltonian:
    """
    Decoupled family member below the crossing: HF and CSF are exact
    eigenstates with E(CSF) < E(HF), so descending weights on (HF, CSF) sit
    at a stationary point with the energies assigned in reverse
    """
    if alpha >= CROSSING_ANGLE:
        raise ValidationError(f"Reversed ordering needs alpha < {CROSSING_ANGLE}")
    return FrozenCoreHamiltonian.from_integrals(
        formaldimine_integrals(alpha, coupling=0.0, side_coupling=0.0), 4
    )


def synthetic_spectrum_matrix(qubits: int, spectrum: Optional[Sequence[float]] = None, gap: float = 1.0, seed: int = 0) -> OneBodyMatrix:
    """Q diag(spectrum) Q^T with a seeded Haar-random orthogonal Q"""
    dim = 1 << qubits
    values = np.asarray(spectrum if spectrum is not None else gap * np.arange(dim), dtype=float)
    if values.size != dim:
        raise ValidationError(f"Spectrum needs {dim} values")
    q = scipy.stats.ortho_group.rvs(dim, random_state=seed) if dim > 1 else np.eye(1)
    mat = q @ np.diag(values) @ q.T
    return OneBodyMatrix(0.5 * (mat + mat.T), label=f"synthetic(M={qubits}, seed={seed})")


# ============================================
# Scenario -> problem
# ============================================

@dataclass
class BuiltProblem:
    problem: EnsembleProblem
    initial_parameters: InitialParameters


def _source_at(config: ScenarioConfig, scan_value: Optional[float]):
    source = config.source
    if config.scan is None or scan_value is None:
        return source
    variable = config.scan.variable
    if variable not in source.__fields__:
        raise ConfigError(f"Scan variable {variable!r} is not a field of the {config.source_name} source")
    try:
        return source.__class__.parse_obj({**source.dict(), variable: scan_value})
    except PydanticValidationError as e:
        raise ConfigError(f"Scan value {scan_value!r} is invalid for {variable!r}: {e}")


def _one_body_problem(config: ScenarioConfig, h: OneBodyMatrix) -> Dict:
    op = binary_map(h)
    if config.states > h.dimension:
        raise ConfigError(f"{config.states} states requested on a {h.dimension}-dimensional space")
    states = [InitialState(format(k, f"0{op.qubit_count}b"), op.qubit_count, {k: 1.0}) for k in range(config.states)]
    return dict(hamiltonian=op, initial_states=states, penalty_operator=None, sector=None, orbitals=None)


def _fermionic_problem(config: ScenarioConfig, h: FrozenCoreHamiltonian, states: List[InitialState]) -> Dict:
    op = jordan_wigner(h)
    electrons = h.active_electrons
    return dict(
        hamiltonian=op,
        initial_states=states,
        penalty_operator=s_squared_operator(h.orbital_count),
        sector=(electrons // 2, electrons // 2),
        orbitals=h.orbital_count,
    )


def _build_circuit(config: ScenarioConfig, qubit_count: int, orbitals: Optional[int]) -> AnsatzCircuit:
    spec = config.ansatz
    if spec.kind == AnsatzKind.GUCCSD:
        if orbitals is None:
            raise ConfigError("GUCCSD needs a fermionic problem source")
        return build_guccsd(orbitals, spec.repetitions)
    return build_rycnot(qubit_count, spec.layers)


def build_problem(config: ScenarioConfig, scan_value: Optional[float] = None) -> BuiltProblem:
    """Materialise the scenario at one scan value"""
    source = _source_at(config, scan_value)
    name = config.source_name
    try:
        if name == "fcidump":
            ints = read_fcidump(source.path)
            h = freeze_core(ints, source.active_space)
            nq = h.qubit_count
            parts = _fermionic_problem(config, h, [prepare_initial(label, nq) for label in source.initial_states])
        elif name == "formaldimine":
            h = reversed_overlap_instance(source.alpha) if source.reversed_overlap else formaldimine_analog(source.alpha, source.coupling)
            if config.states != 2:
                raise ConfigError("The formaldimine analog is a two-state ensemble")
            parts = _fermionic_problem(config, h, formaldimine_states(h.qubit_count))
        elif name == "matrix":
            parts = _one_body_problem(config, read_matrix(source.path))
        elif name == "chain":
            if source.spacing is not None:
                h1 = hydrogen_chain(source.sites, source.spacing, source.onsite, source.decay)
            else:
                h1 = chain_hamiltonian(source.sites, source.onsite, source.hopping)
            parts = _one_body_problem(config, h1)
        else:
            parts = _one_body_problem(
                config, synthetic_spectrum_matrix(source.qubits, source.spectrum, source.gap, source.seed)
            )
    except OSError as e:
        raise ConfigError(f"Cannot read problem input: {e}")

    hamiltonian: PauliOperator = parts["hamiltonian"]
    fermionic = parts["penalty_operator"] is not None
    strength = config.penalty_strength
    if strength is None:
        strength = settings.DEFAULT_PENALTY_STRENGTH if fermionic else 0.0
    scheme = weights(config.weights.value, config.states, config.explicit_weights)
    circuit = _build_circuit(config, hamiltonian.qubit_count, parts["orbitals"])
    problem = EnsembleProblem(
        hamiltonian=hamiltonian,
        initial_states=parts["initial_states"],
        circuit=circuit,
        weights=scheme,
        penalty_operator=parts["penalty_operator"],
        penalty_strength=strength,
        particle_sector=parts["sector"],
        label=f"{config.name}@{scan_value}" if scan_value is not None else config.name,
    )
    start = config.optimizer.initial_parameters
    if "initial_parameters" not in config.optimizer.__fields_set__ and config.ansatz.kind == AnsatzKind.RYCNOT:
        start = InitialParameters.UNIFORM
    return BuiltProblem(problem, InitialParameters(start))
