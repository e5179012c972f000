"""Stationary analysis of storage allocation under processor sharing."""
from .model import (
    JointDistribution,
    ModelError,
    ModelParams,
    MRangeError,
    ParameterError,
    SolverConfig,
    SolverError,
    StateIndex,
    TruncationError,
    UnstableError,
    geometric_identity_residual,
    normalization_residual,
    validate_params,
)

__version__ = "0.1.0"
