"""Directions of periodicity of two-dimensional tiling systems."""

from .core import (
    INFINITY,
    Pattern,
    PeriodicConfig,
    PeriodVector,
    Rule,
    Slope,
    Tile,
    TilingError,
    TilingSystem,
    WangTile,
    check_east_deterministic,
    validate_patch,
    validate_periodic,
    wang_to_patterns,
)
from .periodicity import BudgetExceeded, Kind, PeriodicWitness, build_strip_graph, decide_periodic
from .slopes import SlopeQuery, enumerate_slopes, slope_semidecide

__version__ = "0.1.0"

__all__ = [
    "INFINITY", "Pattern", "PeriodicConfig", "PeriodVector", "Rule", "Slope", "Tile", "TilingError",
    "TilingSystem", "WangTile", "check_east_deterministic", "validate_patch", "validate_periodic",
    "wang_to_patterns", "BudgetExceeded", "Kind", "PeriodicWitness", "build_strip_graph",
    "decide_periodic", "SlopeQuery", "enumerate_slopes", "slope_semidecide",
]
