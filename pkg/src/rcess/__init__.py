"""Reliable communication-efficient secret sharing over prime fields."""

from .errors import (DecodingFailure, DetectionAbort, HashRecoveryError, KnowledgeViolation,
                     ParameterError, SingularSystemError, ZeroCapacityError)
from .field import Field
from .scheme import SchemeParams, capacity, collect_responses, comm_cost, deal, reconstruct
from .staircase import StaircaseParams, derive_params

__all__ = [
    "DecodingFailure", "DetectionAbort", "Field", "HashRecoveryError", "KnowledgeViolation",
    "ParameterError", "SchemeParams", "SingularSystemError", "StaircaseParams",
    "ZeroCapacityError", "capacity", "collect_responses", "comm_cost", "deal",
    "derive_params", "reconstruct",
]

__version__ = "0.1.0"
