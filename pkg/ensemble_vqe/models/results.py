from typing import List, Optional
from pydantic import BaseModel, Field, validator

class PointResult(BaseModel):
    """Outcome of one minimisation at one scan point."""
    scan_index: int = Field(..., ge=0)
    scan_value: Optional[float] = None
    trial: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    iterations: int = Field(..., ge=0, description="Accepted L-BFGS steps")
    status: str
    final_cost: float
    final_trace: float
    cost_error: float = Field(..., ge=0)
    trace_error: float = Field(..., ge=0)
    exact_energies: List[float]
    recovered_energies: List[float] = Field(..., description="Post-diagonalised subspace eigenvalues")
    state_errors: List[float] = Field(..., description="|recovered - exact| per state")
    swap_events: List[int] = Field(default_factory=list)

class TrialSummary(BaseModel):
    """One trial across the scan."""
    trial: int = Field(..., ge=0)
    seed: int = Field(..., ge=0)
    iterations: List[int] = Field(..., description="Iterations to convergence per scan point")
    cost_errors: List[float]
    trace_errors: List[float]
    auc_trace_error: float = Field(..., ge=0)
    auc_cost_error: float = Field(..., ge=0)
    swap_events: List[List[int]] = Field(default_factory=list)

    @validator('cost_errors', 'trace_errors', each_item=True)
    def validate_errors(cls, v):
        if v < 0:
            raise ValueError("Errors are absolute values")
        return v

class PointTest(BaseModel):
    """Wilcoxon signed-rank test at one scan point."""
    scan_value: float
    statistic: Optional[float] = Field(None, description="min(T+, T-); None when every difference is zero")
    p_value: float = Field(..., ge=0, le=1)
    adjusted_p_value: float = Field(..., ge=0, le=1)
    significant: bool

class BootstrapBandModel(BaseModel):
    scan_values: List[float]
    mean: List[float]
    lower: List[float]
    upper: List[float]
    confidence: float
    resamples: int

    @validator('upper')
    def validate_order(cls, v, values):
        lower = values.get('lower')
        if lower is not None and any(lo > hi for lo, hi in zip(lower, v)):
            raise ValueError("Band lower bound exceeds upper bound")
        return v

class StatReport(BaseModel):
    """Paired comparison of two methods over trials and scan points (A minus B)."""
    method_a: str
    method_b: str
    trials: int = Field(..., ge=1)
    auc_statistic: Optional[float] = None
    auc_p_value: Optional[float] = None
    point_tests: List[PointTest] = Field(default_factory=list)
    band: Optional[BootstrapBandModel] = None
    fdr_level: float = 0.05

    class Config:
        schema_extra = {
            "example": {
                "method_a": "weighted",
                "method_b": "equi",
                "trials": 10,
                "auc_statistic": 0.0,
                "auc_p_value": 0.001953125,
                "point_tests": [
                    {"scan_value": 0.5, "statistic": 0.0, "p_value": 0.001953125,
                     "adjusted_p_value": 0.0022078, "significant": True}
                ],
                "fdr_level": 0.05,
            }
        }
