"""
Ensemble VQE Workbench

Statevector simulation of ensemble variational quantum eigensolvers:
weighted and equi-ensemble costs, the subspace trace diagnostic, GUCCSD and
Ry-CNOT ansatze, and the experiment harness that scores them against exact
diagonalisation.
"""

__version__ = "1.0.0"
__license__ = "MIT"

# Import key components for easier access
from .config import settings
from .exceptions import (
    AppError,
    ValidationError,
    DimensionError,
    SizeLimitError,
    ParseError,
    ConfigError,
    NumericalError,
    UndefinedTestError,
)

# Logging is configured by the CLI (utils.setup_logging), not on import
import logging
logger = logging.getLogger(__name__)

__all__ = [
    # Core components
    'settings',

    # Exceptions
    'AppError',
    'ValidationError',
    'DimensionError',
    'SizeLimitError',
    'ParseError',
    'ConfigError',
    'NumericalError',
    'UndefinedTestError',
]
