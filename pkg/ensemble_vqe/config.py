from pydantic import BaseSettings, validator
from typing import List
from pathlib import Path

class Settings(BaseSettings):
    # Application
    DEBUG: bool = False
    PROJECT_NAME: str = "Ensemble VQE Workbench"
    VERSION: str = "1.0.0"

    # Logging
    LOG_DIR: Path = Path("./logs")
    LOG_TO_FILE: bool = True
    LOG_JSON: bool = True
    QUIET_LOGGERS: List[str] = ["matplotlib", "numba"]

    # Runs
    OUT_DIR: Path = Path("./runs")
    THREADS: int = 1

    # Numerical tolerances
    PRUNE_TOLERANCE: float = 1e-14
    HERMITICITY_TOLERANCE: float = 1e-12
    ORTHONORMALITY_TOLERANCE: float = 1e-10

    # Desk-scale limits
    MAX_DENSE_QUBITS: int = 12
    MAX_EIGEN_DIMENSION: int = 4096
    MAX_JW_ORBITALS: int = 6
    MAX_BINARY_DIMENSION: int = 4096

    # Statistics
    MAX_EXACT_WILCOXON: int = 25
    BOOTSTRAP_RESAMPLES: int = 2000
    BOOTSTRAP_CONFIDENCE: float = 0.95
    FDR_LEVEL: float = 0.05

    # Ensemble
    DEFAULT_PENALTY_STRENGTH: float = 1.0

    @validator("QUIET_LOGGERS", pre=True)
    def assemble_quiet_loggers(cls, v):
        if isinstance(v, str) and not v.startswith("["):
            return [i.strip() for i in v.split(",") if i.strip()]
        elif isinstance(v, (list, str)):
            return v
        raise ValueError(v)

    @validator("THREADS")
    def validate_threads(cls, v):
        if v < 1:
            raise ValueError("THREADS must be at least 1")
        return v

    class Config:
        case_sensitive = True
        env_file = ".env"

# Initialize settings
settings = Settings()
