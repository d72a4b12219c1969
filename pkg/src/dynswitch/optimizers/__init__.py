from .base import Optimizer
from .bfgs import Bfgs, finite_difference_gradient
from .cmaes import Cmaes, default_population_size
from .de import De
from .driver import (
    ALGORITHMS,
    OptimizerConfig,
    canonical_algorithm,
    drive,
    make_optimizer,
    run_single,
)
from .mlsl import Mlsl, critical_distance, powell_minimize
from .pso import Pso

__all__ = [
    "ALGORITHMS",
    "Bfgs",
    "Cmaes",
    "De",
    "Mlsl",
    "Optimizer",
    "OptimizerConfig",
    "Pso",
    "canonical_algorithm",
    "critical_distance",
    "default_population_size",
    "drive",
    "finite_difference_gradient",
    "make_optimizer",
    "powell_minimize",
    "run_single",
]
