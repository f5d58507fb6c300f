"""Numerical laboratory for quasilinear wave systems with multiple speeds."""

from .systems import (
    WaveSystem,
    SpeedClasses,
    NullReport,
    check_symmetry,
    speed_classes,
    restrict_to_cone,
    check_null_condition,
    load_system,
    save_system,
    q0_system,
    john_system,
    quasilinear_null_system,
)
from .sphere import vanishes_on_sphere
from .grid import Grid3, GridState, FieldHistory, RadialState

__all__ = [
    "WaveSystem", "SpeedClasses", "NullReport",
    "check_symmetry", "speed_classes", "restrict_to_cone",
    "check_null_condition", "vanishes_on_sphere",
    "load_system", "save_system",
    "q0_system", "john_system", "quasilinear_null_system",
    "Grid3", "GridState", "FieldHistory", "RadialState",
]

__version__ = "0.1.0"
