import numpy as np
import pytest

from dynswitch.problems import ProblemId, instantiate
from dynswitch.tracing import BudgetedEvaluator


class FuncProblem:
    """Minimal problem stand-in wrapping an arbitrary objective callable."""

    def __init__(self, func, dim, f_opt=0.0):
        self.func = func
        self.dimension = dim
        self.f_opt = f_opt
        self.id = ProblemId(1, max(dim, 2), 1)

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        return float(self.func(x))

    def precision(self, value):
        return max(value - self.f_opt, 0.0)


@pytest.fixture
def sphere_problem():
    return instantiate(ProblemId(1, 2, 1), 0)


def make_evaluator(problem, budget=10_000, stop_target=1e-8, **kwargs):
    return BudgetedEvaluator(problem, budget, stop_target=stop_target, **kwargs)
