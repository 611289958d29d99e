"""Optimal-control-derived superlinear minimization methods."""
from .differentiation import ObjectiveOracle
from .problems import ProblemSpec, get_problem
from .steppers import Algorithm, InnerMode, StepperConfig, StopKind, Trace, default_parameters, run

__all__ = [
    "Algorithm",
    "InnerMode",
    "ObjectiveOracle",
    "ProblemSpec",
    "StepperConfig",
    "StopKind",
    "Trace",
    "default_parameters",
    "get_problem",
    "run",
]

__version__ = "0.1.0"
