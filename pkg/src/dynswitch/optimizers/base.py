"""Common stepwise optimizer interface.

An optimizer is a plain object owning its mutable search state.  ``step``
performs one iteration's worth of evaluations through a BudgetedEvaluator
(letting StopRun signals propagate) and ``finished`` reports internal
convergence.  All internals needed for warm-starting are public attributes.
"""

from __future__ import annotations

import numpy as np

from ..problems import DOMAIN_HIGH, DOMAIN_LOW


class Optimizer:
    name = "base"

    def __init__(self, dim: int, rng: np.random.Generator):
        self.dim = int(dim)
        self.rng = rng
        self.finished = False

    def step(self, ev):
        raise NotImplementedError

    def clip_to_box(self, x):
        return np.clip(x, DOMAIN_LOW, DOMAIN_HIGH)
