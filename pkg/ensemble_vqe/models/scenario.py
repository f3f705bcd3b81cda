from enum import Enum
from pathlib import Path
from typing import List, Optional
from pydantic import BaseModel, Field, root_validator, validator

from .active_space import ActiveSpaceSpec
from .optimizer import OptimizerConfig

class AnsatzKind(str, Enum):
    """Circuit family."""
    GUCCSD = "guccsd"
    RYCNOT = "rycnot"

class WeightKindOption(str, Enum):
    EQUI = "equi"
    OPTIMAL = "optimal"
    EXPLICIT = "explicit"

class FcidumpSource(BaseModel):
    """Integrals from an FCIDUMP file plus an active-space partition."""
    path: Path = Field(..., description="FCIDUMP file")
    active_space: ActiveSpaceSpec
    initial_states: List[str] = Field(..., min_items=1, description='State labels, e.g. ["hf(4)", "csf(1,2)"]')

class MatrixSource(BaseModel):
    """One-body matrix from a plain-text file (first line N, then N rows)."""
    path: Path = Field(..., description="Matrix file")

class ChainSource(BaseModel):
    """Tight-binding chain; `spacing` switches to the distance-dependent hydrogen-chain hopping."""
    sites: int = Field(16, ge=2, description="Number of sites (power of two)")
    onsite: float = Field(-0.5, description="Diagonal energy (Hartree)")
    hopping: float = Field(-1.0, description="Nearest-neighbour hopping (Hartree)")
    spacing: Optional[float] = Field(None, gt=0, description="Inter-site distance (Angstrom)")
    decay: float = Field(1.0, gt=0, description="Hopping decay length (Angstrom)")

    @validator('sites')
    def validate_sites(cls, v):
        if v & (v - 1):
            raise ValueError("Site count must be a power of two")
        return v

class SyntheticSource(BaseModel):
    """Random real-symmetric operator with a prescribed spectrum."""
    qubits: int = Field(2, ge=1, le=10)
    spectrum: Optional[List[float]] = Field(None, description="Eigenvalues; evenly spaced when omitted")
    gap: float = Field(1.0, gt=0, description="Spacing of the default spectrum (Hartree)")
    seed: int = Field(0, ge=0, description="Seed of the random eigenbasis")

    @validator('spectrum')
    def validate_spectrum(cls, v, values):
        qubits = values.get('qubits')
        if v is not None and qubits is not None and len(v) != 2 ** qubits:
            raise ValueError(f"Spectrum needs {2 ** qubits} values for {qubits} qubits")
        return v

class FormaldimineSource(BaseModel):
    """Built-in CAS(4,3) two-state family scanned by a bending-angle-like variable."""
    alpha: float = Field(121.0, ge=99.0, le=180.0, description="Bending angle (degrees)")
    coupling: float = Field(0.1, ge=0, description="Orbital coupling driving the avoided crossing")
    reversed_overlap: bool = Field(False, description="Decoupled instance with both initial states exact eigenstates")

class AnsatzSpec(BaseModel):
    kind: AnsatzKind = Field(..., description="guccsd or rycnot")
    repetitions: int = Field(1, ge=1, description="GUCCSD repetitions n")
    layers: int = Field(10, ge=1, description="Ry-CNOT entanglement blocks N_L")

class ScanSpec(BaseModel):
    """Values of one source field to sweep."""
    variable: str = Field(..., description="Field of the problem source, e.g. alpha or spacing")
    values: List[float] = Field(..., min_items=1)

    @validator('values')
    def validate_increasing(cls, v):
        if any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("Scan values must be strictly increasing")
        return v

class ScenarioConfig(BaseModel):
    """One experiment: a problem source, an ansatz, a weight scheme and a trial budget."""
    name: str = Field(..., min_length=1, regex=r"^[A-Za-z0-9_.-]+$")
    fcidump: Optional[FcidumpSource] = None
    matrix: Optional[MatrixSource] = None
    chain: Optional[ChainSource] = None
    synthetic: Optional[SyntheticSource] = None
    formaldimine: Optional[FormaldimineSource] = None
    ansatz: AnsatzSpec
    weights: WeightKindOption = WeightKindOption.EQUI
    explicit_weights: Optional[List[float]] = None
    states: int = Field(2, ge=1, description="Ensemble size K")
    penalty_strength: Optional[float] = Field(
        None, ge=0, description="S^2 penalty; defaults to DEFAULT_PENALTY_STRENGTH for fermionic sources, 0 otherwise"
    )
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    trials: int = Field(1, ge=1)
    seed: int = Field(0, ge=0)
    scan: Optional[ScanSpec] = None

    @root_validator(skip_on_failure=True)
    def validate_source(cls, values):
        sources = [k for k in ('fcidump', 'matrix', 'chain', 'synthetic', 'formaldimine') if values.get(k) is not None]
        if len(sources) != 1:
            raise ValueError(f"Exactly one problem source is required, got {sources or 'none'}")
        if values.get('weights') == WeightKindOption.EXPLICIT:
            explicit = values.get('explicit_weights')
            if explicit is None or len(explicit) != values.get('states'):
                raise ValueError("explicit_weights must list one weight per state")
        fcidump = values.get('fcidump')
        if fcidump is not None and len(fcidump.initial_states) != values.get('states'):
            raise ValueError("fcidump.initial_states must list one label per state")
        return values

    @property
    def source_name(self) -> str:
        for key in ('fcidump', 'matrix', 'chain', 'synthetic', 'formaldimine'):
            if getattr(self, key) is not None:
                return key
        raise ValueError("No problem source")

    @property
    def source(self) -> BaseModel:
        return getattr(self, self.source_name)

    @property
    def scan_values(self) -> List[Optional[float]]:
        return list(self.scan.values) if self.scan else [None]

    class Config:
        schema_extra = {
            "example": {
                "name": "formaldimine-equi",
                "formaldimine": {"coupling": 0.1},
                "ansatz": {"kind": "guccsd", "repetitions": 1},
                "weights": "equi",
                "states": 2,
                "penalty_strength": 1.0,
                "trials": 1,
                "seed": 7,
                "scan": {"variable": "alpha", "values": [99, 110, 121, 140, 160, 180]},
            }
        }
