"""
Schemas for scenario configuration and experiment results.
"""

from .active_space import ActiveSpaceSpec
from .optimizer import InitialParameters, LineSearchConfig, OptimizerConfig
from .scenario import (
    AnsatzKind,
    AnsatzSpec,
    ChainSource,
    FcidumpSource,
    FormaldimineSource,
    MatrixSource,
    ScanSpec,
    ScenarioConfig,
    SyntheticSource,
    WeightKindOption,
)
from .results import (
    BootstrapBandModel,
    PointResult,
    PointTest,
    StatReport,
    TrialSummary,
)

__all__ = [
    # Active space
    'ActiveSpaceSpec',

    # Optimizer
    'InitialParameters',
    'LineSearchConfig',
    'OptimizerConfig',

    # Scenario
    'AnsatzKind',
    'AnsatzSpec',
    'ChainSource',
    'FcidumpSource',
    'FormaldimineSource',
    'MatrixSource',
    'ScanSpec',
    'ScenarioConfig',
    'SyntheticSource',
    'WeightKindOption',

    # Results
    'BootstrapBandModel',
    'PointResult',
    'PointTest',
    'StatReport',
    'TrialSummary',
]
