from enum import Enum
from pydantic import BaseModel, Field

class InitialParameters(str, Enum):
    """Starting point of a minimisation."""
    ZEROS = "zeros"
    UNIFORM = "uniform"  # seeded U(-pi, pi)

class LineSearchConfig(BaseModel):
    """Armijo backtracking parameters."""
    c1: float = Field(1e-4, gt=0, lt=1, description="Sufficient-decrease constant")
    shrink: float = Field(0.5, gt=0, lt=1, description="Step shrink factor per backtrack")
    initial_step: float = Field(1.0, gt=0, description="First trial step along the search direction")
    max_backtracks: int = Field(40, ge=1, description="Backtracks before declaring line-search failure")

    class Config:
        allow_mutation = False

class OptimizerConfig(BaseModel):
    """Limited-memory BFGS settings."""
    memory: int = Field(10, ge=1, description="Number of stored curvature pairs")
    gradient_tolerance: float = Field(1e-8, gt=0, description="Convergence threshold on the gradient inf-norm")
    max_iterations: int = Field(5000, ge=0, description="Iteration budget")
    line_search: LineSearchConfig = Field(default_factory=LineSearchConfig)
    initial_parameters: InitialParameters = Field(
        InitialParameters.ZEROS,
        description="zeros (GUCCSD identity start) or uniform random angles (Ry-CNOT)"
    )

    class Config:
        allow_mutation = False
        schema_extra = {
            "example": {
                "memory": 10,
                "gradient_tolerance": 1e-8,
                "max_iterations": 5000,
                "line_search": {"c1": 1e-4, "shrink": 0.5, "initial_step": 1.0, "max_backtracks": 40},
                "initial_parameters": "zeros",
            }
        }
