"""Budget-enforcing evaluation wrapper and fixed-target run traces.

Every objective call an optimizer makes is routed through a
:class:`BudgetedEvaluator`, which counts evaluations, tracks best-so-far
precision, and records first-hitting times on a fixed log-spaced target grid
(10^2 down to 10^-8 in exponent steps of 0.2; 51 targets).  Budget
exhaustion and target hits are signalled by exceptions that optimizer loops
must let propagate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .problems import ProblemId, ProblemInstance

DEFAULT_FINAL_TARGET = 1e-8
DEFAULT_BUDGET_MULTIPLIER = 10_000

TERMINATED_TARGET = "target_hit"
TERMINATED_BUDGET = "budget_exhausted"
TERMINATED_CONVERGED = "algorithm_converged"


class StopRun(Exception):
    """Base signal that a run must halt; not an error."""


class BudgetExhausted(StopRun):
    pass


class TargetReached(StopRun):
    pass


class TargetGrid:
    """Descending grid of precision targets 10^2, 10^1.8, ..., 10^-8."""

    def __init__(self, first_exponent=2.0, last_exponent=-8.0, step=0.2):
        n = int(round((first_exponent - last_exponent) / step)) + 1
        self.exponents = tuple(
            round(first_exponent - i * step, 10) for i in range(n)
        )
        self.targets = tuple(10.0 ** e for e in self.exponents)

    def __len__(self):
        return len(self.exponents)

    def snap_exponent(self, value: float) -> float:
        """Exponent of the grid target nearest to ``value`` (a precision)."""
        if value <= 0:
            raise ValueError("precision targets must be positive")
        e = math.log10(value)
        best = min(self.exponents, key=lambda g: (abs(g - e), -g))
        return best

    def snap(self, value: float) -> float:
        return 10.0 ** self.snap_exponent(value)


DEFAULT_GRID = TargetGrid()


@dataclass
class RunTrace:
    """Per-run evaluation log on the fixed target grid.

    ``hit_at`` maps grid exponents (e.g. -5.4) to the evaluation count at
    which that precision was first reached.
    """

    problem: ProblemId
    algorithm_label: str
    run_index: int
    budget: int
    evals_used: int = 0
    best_precision: float = math.inf
    hit_at: dict[float, int] = field(default_factory=dict)
    terminated_reason: str = TERMINATED_BUDGET

    def hitting_time(self, target: float, grid: TargetGrid = DEFAULT_GRID) -> float:
        """First-crossing evaluation count for ``target``; inf if never hit.

        Off-grid targets are answered conservatively from the next-finer
        (smaller) grid target.
        """
        if target <= 0:
            raise ValueError("target must be positive")
        e = math.log10(target)
        candidates = [g for g in grid.exponents if g <= e + 1e-12]
        if not candidates:
            return math.inf
        key = max(candidates)
        t = self.hit_at.get(key)
        return math.inf if t is None else t

    def to_record(self) -> dict:
        rec = {
            "algorithm_label": self.algorithm_label,
            "function_id": self.problem.function_id,
            "dimension": self.problem.dimension,
            "instance": self.problem.instance,
            "run_index": self.run_index,
            "budget": self.budget,
            "evals_used": self.evals_used,
            "best_precision": self.best_precision,
            "terminated_reason": self.terminated_reason,
            "hit_at": sorted(
                ((e, n) for e, n in self.hit_at.items()), reverse=True
            ),
        }
        return rec


def record_to_json(rec: dict) -> str:
    """Canonical single-line serialization (the producer/consumer contract)."""
    return json.dumps(rec, sort_keys=True, allow_nan=True)


def parse_record(line: str) -> dict:
    rec = json.loads(line)
    rec["hit_at"] = {float(e): int(n) for e, n in rec["hit_at"]}
    return rec


def load_records(path):
    """Parse a line-delimited run log; returns (records, skipped_count)."""
    records, skipped = [], 0
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            try:
                records.append(parse_record(line))
            except (json.JSONDecodeError, KeyError, TypeError, ValueError):
                skipped += 1
    return records, skipped


class BudgetedEvaluator:
    """Routes objective calls to a problem, recording the trace as it goes.

    ``stop_target`` is the precision at which a TargetReached signal fires;
    the switching driver lowers it from tau to phi across the phase boundary
    while counters stay cumulative.  One evaluator per run; not shared.
    """

    def __init__(
        self,
        problem: ProblemInstance,
        budget: int,
        stop_target: float = DEFAULT_FINAL_TARGET,
        algorithm_label: str = "",
        run_index: int = 0,
        grid: TargetGrid = DEFAULT_GRID,
    ):
        self.problem = problem
        self.budget = int(budget)
        self.stop_target = float(stop_target)
        self.grid = grid
        self.trace = RunTrace(
            problem=problem.id,
            algorithm_label=algorithm_label,
            run_index=run_index,
            budget=self.budget,
        )
        self.best_x = None
        self.best_f = math.inf
        self._next_grid_index = 0

    @property
    def evals_used(self) -> int:
        return self.trace.evals_used

    @property
    def best_precision(self) -> float:
        return self.trace.best_precision

    @property
    def remaining(self) -> int:
        return self.budget - self.trace.evals_used

    def __call__(self, x) -> float:
        if self.trace.evals_used >= self.budget:
            raise BudgetExhausted()
        value = self.problem.evaluate(x)
        self.trace.evals_used += 1
        prec = self.problem.precision(value)
        if prec < self.trace.best_precision:
            self.trace.best_precision = prec
            self.best_x = np.array(x, dtype=float, copy=True)
            self.best_f = value
            targets = self.grid.targets
            while (
                self._next_grid_index < len(targets)
                and prec <= targets[self._next_grid_index]
            ):
                e = self.grid.exponents[self._next_grid_index]
                self.trace.hit_at[e] = self.trace.evals_used
                self._next_grid_index += 1
        if self.trace.best_precision <= self.stop_target:
            raise TargetReached()
        return value
