"""Controllability of an N-level system through an XY accessor spin chain.

Numerical Lie-closure engine, the constructive decoupling procedure, and an
exact rational oracle for small models.
"""
__version__ = "0.1.0"

from .closure import ClosureReport, contains, controllability_verdict, generate_closure
from .linalg import DEFAULT_TOL, LieBasis, ToleranceConfig, orthonormal_insert
from .model import (
    AccessorSpec,
    ControlModel,
    CouplingTensor,
    SystemSpec,
    check_size_condition,
    coupling_rank_check,
)

__all__ = [
    "AccessorSpec", "ClosureReport", "ControlModel", "CouplingTensor", "DEFAULT_TOL", "LieBasis",
    "SystemSpec", "ToleranceConfig", "check_size_condition", "contains", "controllability_verdict",
    "coupling_rank_check", "generate_closure", "orthonormal_insert",
]
