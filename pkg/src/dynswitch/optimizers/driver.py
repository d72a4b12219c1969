"""Optimizer configuration and the single-run execution loop."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..problems import ProblemInstance
from ..tracing import (
    DEFAULT_BUDGET_MULTIPLIER,
    DEFAULT_FINAL_TARGET,
    TERMINATED_BUDGET,
    TERMINATED_CONVERGED,
    TERMINATED_TARGET,
    BudgetedEvaluator,
    BudgetExhausted,
    RunTrace,
    TargetReached,
)
from .bfgs import Bfgs
from .cmaes import Cmaes
from .de import De
from .mlsl import Mlsl
from .pso import Pso

ALGORITHMS = {
    "BFGS": Bfgs,
    "CMA-ES": Cmaes,
    "PSO": Pso,
    "DE": De,
    "MLSL": Mlsl,
}

_ALIASES = {
    "bfgs": "BFGS",
    "cmaes": "CMA-ES",
    "cma-es": "CMA-ES",
    "cma": "CMA-ES",
    "pso": "PSO",
    "de": "DE",
    "mlsl": "MLSL",
}


def canonical_algorithm(name: str) -> str:
    key = name.strip().lower()
    if key not in _ALIASES:
        raise ValueError(f"unknown algorithm {name!r}; choose from {sorted(_ALIASES)}")
    return _ALIASES[key]


@dataclass(frozen=True)
class OptimizerConfig:
    """Algorithm choice plus hyperparameter overrides for its constructor."""

    algorithm: str
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "algorithm", canonical_algorithm(self.algorithm))


def make_optimizer(config: OptimizerConfig, dim: int, rng, budget=None):
    cls = ALGORITHMS[config.algorithm]
    kwargs = dict(config.overrides)
    if config.algorithm == "MLSL" and budget is not None and "budget" not in kwargs:
        kwargs["budget"] = budget
    return cls(dim, rng, **kwargs)


def drive(optimizer, ev: BudgetedEvaluator) -> str:
    """Step the optimizer until a stop signal; returns the termination reason."""
    try:
        while not optimizer.finished and ev.evals_used < ev.budget:
            optimizer.step(ev)
        return TERMINATED_CONVERGED if optimizer.finished else TERMINATED_BUDGET
    except TargetReached:
        return TERMINATED_TARGET
    except BudgetExhausted:
        return TERMINATED_BUDGET


def run_single(
    config: OptimizerConfig,
    problem: ProblemInstance,
    budget: int | None = None,
    final_target: float = DEFAULT_FINAL_TARGET,
    seed: int = 0,
    run_index: int = 0,
    label: str | None = None,
) -> RunTrace:
    """One full static run; deterministic given (config, problem, seed)."""
    dim = problem.dimension
    if budget is None:
        budget = DEFAULT_BUDGET_MULTIPLIER * dim
    ev = BudgetedEvaluator(
        problem, budget, stop_target=final_target,
        algorithm_label=label or config.algorithm, run_index=run_index,
    )
    rng = np.random.default_rng(seed)
    optimizer = make_optimizer(config, dim, rng, budget=budget)
    ev.trace.terminated_reason = drive(optimizer, ev)
    return ev.trace
