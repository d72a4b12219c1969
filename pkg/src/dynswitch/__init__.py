"""Benchmarking framework for single-switch dynamic algorithm selection."""

__version__ = "0.1.0"

from .problems import ProblemId, ProblemInstance, instantiate
from .tracing import BudgetedEvaluator, RunTrace, TargetGrid

__all__ = [
    "BudgetedEvaluator",
    "ProblemId",
    "ProblemInstance",
    "RunTrace",
    "TargetGrid",
    "instantiate",
    "__version__",
]
