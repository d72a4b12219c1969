"""Multi-level single linkage multistart with Powell local search.

Each level adds 50d uniform samples, shrinks the critical distance, and
starts a Powell local search from every reduced-set point that has no
better point within that distance.  Each local-search invocation is capped
at 10% of the total evaluation budget.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

from ..problems import DOMAIN_HIGH, DOMAIN_LOW
from .base import Optimizer

POPULATION_MULTIPLIER = 50
REDUCED_FRACTION = 0.1     # gamma: fraction of cumulative samples kept
SIGMA_PARAMETER = 2.0      # sigma in the critical-distance formula
LOCAL_BUDGET_FRACTION = 0.1
POWELL_F_TOL = 1e-8


class _LocalCapReached(Exception):
    pass


def powell_minimize(fun, x0, f_tol=POWELL_F_TOL, max_evals=None):
    """Powell conjugate-direction descent around scipy's implementation.

    Stops on relative f-improvement below ``f_tol`` or after ``max_evals``
    objective calls.  Returns (best_x, best_f).  StopRun signals raised by
    the objective propagate to the caller.
    """
    x0 = np.asarray(x0, dtype=float)
    state = {"count": 0, "best_x": x0.copy(), "best_f": math.inf}

    def wrapped(x):
        if max_evals is not None and state["count"] >= max_evals:
            raise _LocalCapReached()
        state["count"] += 1
        f = fun(np.asarray(x, dtype=float))
        if f < state["best_f"]:
            state["best_f"] = f
            state["best_x"] = np.array(x, dtype=float, copy=True)
        return f

    try:
        minimize(wrapped, x0, method="Powell",
                 options={"ftol": f_tol, "xtol": 1e-10, "maxfev": np.inf})
    except _LocalCapReached:
        pass
    if not math.isfinite(state["best_f"]):
        state["best_f"] = fun(x0)
    return state["best_x"], state["best_f"]


def critical_distance(dim, total_samples, sigma=SIGMA_PARAMETER,
                      box_volume=None):
    """MLSL critical-distance radius r_k; decreasing in the sample count."""
    if box_volume is None:
        box_volume = (DOMAIN_HIGH - DOMAIN_LOW) ** dim
    kn = max(total_samples, 2)
    inner = math.gamma(1.0 + dim / 2.0) * box_volume * sigma * math.log(kn) / kn
    return inner ** (1.0 / dim) / math.sqrt(math.pi)


class Mlsl(Optimizer):
    name = "MLSL"

    def __init__(self, dim, rng, budget=None, population_size=None,
                 reduced_fraction=REDUCED_FRACTION,
                 local_budget_fraction=LOCAL_BUDGET_FRACTION,
                 f_tol=POWELL_F_TOL):
        super().__init__(dim, rng)
        self.population_size = population_size or POPULATION_MULTIPLIER * dim
        self.reduced_fraction = reduced_fraction
        self.f_tol = f_tol
        self.local_search_cap = (
            None if budget is None else max(1, int(local_budget_fraction * budget))
        )
        self.sample_points = np.empty((0, dim))
        self.sample_values = np.empty(0)
        self.started = set()           # indices local searches started from
        self.minima = []               # (point, value) found by local search
        self.level = 0

    def _local_cap(self, ev):
        if self.local_search_cap is not None:
            return self.local_search_cap
        return max(1, int(LOCAL_BUDGET_FRACTION * ev.budget))

    def step(self, ev):
        if self.finished:
            return
        new = self.rng.uniform(DOMAIN_LOW, DOMAIN_HIGH,
                               size=(self.population_size, self.dim))
        values = np.array([ev(x) for x in new])
        self.sample_points = np.vstack([self.sample_points, new])
        self.sample_values = np.concatenate([self.sample_values, values])
        self.level += 1
        total = self.sample_points.shape[0]
        r_k = critical_distance(self.dim, total)

        n_reduced = max(1, int(math.ceil(self.reduced_fraction * total)))
        order = np.argsort(self.sample_values, kind="stable")
        reduced = order[:n_reduced]
        known_points = (
            np.array([m[0] for m in self.minima]) if self.minima else None
        )
        known_values = (
            np.array([m[1] for m in self.minima]) if self.minima else None
        )
        for idx in reduced:
            if int(idx) in self.started:
                continue
            x = self.sample_points[idx]
            f = self.sample_values[idx]
            dist = np.linalg.norm(self.sample_points - x[None, :], axis=1)
            better_nearby = np.any((dist <= r_k) & (self.sample_values < f))
            if not better_nearby and known_points is not None:
                dist_m = np.linalg.norm(known_points - x[None, :], axis=1)
                better_nearby = np.any((dist_m <= r_k) & (known_values < f))
            if better_nearby:
                continue
            self.started.add(int(idx))
            bx, bf = powell_minimize(ev, x, f_tol=self.f_tol,
                                     max_evals=self._local_cap(ev))
            self.minima.append((bx, bf))
            known_points = np.array([m[0] for m in self.minima])
            known_values = np.array([m[1] for m in self.minima])

    @property
    def best(self):
        """Best (point, value) over local minima and raw samples."""
        best_x, best_f = None, math.inf
        if self.minima:
            i = int(np.argmin([m[1] for m in self.minima]))
            best_x, best_f = self.minima[i]
        if self.sample_values.size:
            j = int(np.argmin(self.sample_values))
            if self.sample_values[j] < best_f:
                best_x, best_f = self.sample_points[j], self.sample_values[j]
        return best_x, best_f
