"""Inclusion-based points-to analysis with online call-graph construction."""

from .constraints import (
    AbstractObject,
    AllocSite,
    CallSite,
    ConstraintSet,
    FunctionObj,
    GlobalObj,
    LocalVar,
    MemVar,
    RetVar,
    SymbolVar,
    Var,
    generate_constraints,
)
from .solver import (
    DEFAULT_BUDGET,
    CallEdge,
    Context,
    Diagnostic,
    PointsToState,
    SolverStats,
    points_to,
    push_context,
    resolve_call_targets,
    solve,
)

__all__ = [
    "AbstractObject", "AllocSite", "CallEdge", "CallSite", "ConstraintSet", "Context",
    "DEFAULT_BUDGET", "Diagnostic", "FunctionObj", "GlobalObj", "LocalVar", "MemVar",
    "PointsToState", "RetVar", "SolverStats", "SymbolVar", "Var", "generate_constraints",
    "points_to", "push_context", "resolve_call_targets", "solve",
]
