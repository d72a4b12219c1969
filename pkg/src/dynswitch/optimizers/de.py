"""Differential evolution, DE/best/1/bin.

Population of 5d vectors; crossover rate 0.7 with one forced dimension per
trial; mutation scale F drawn uniformly from [0.5, 1] once per generation;
greedy selection.  Converges when the spread of population values drops
below the tolerance.
"""

from __future__ import annotations

import numpy as np

from ..problems import DOMAIN_HIGH, DOMAIN_LOW
from .base import Optimizer

CROSSOVER_RATE = 0.7
SCALE_LOW = 0.5
SCALE_HIGH = 1.0
CONVERGENCE_TOL = 1e-12
POPULATION_MULTIPLIER = 5


def crossover_mask(rng, dim, crossover_rate):
    """Binomial crossover mask with one uniformly chosen forced dimension."""
    mask = rng.random(dim) < crossover_rate
    mask[rng.integers(dim)] = True
    return mask


class De(Optimizer):
    name = "DE"

    def __init__(self, dim, rng, population=None, population_size=None,
                 crossover_rate=CROSSOVER_RATE, tol=CONVERGENCE_TOL):
        super().__init__(dim, rng)
        size = population_size or POPULATION_MULTIPLIER * dim
        if population is None:
            population = rng.uniform(DOMAIN_LOW, DOMAIN_HIGH, size=(size, dim))
        self.population = np.asarray(population, dtype=float)
        if self.population.shape[0] < 4:
            raise ValueError("DE needs a population of at least 4")
        self.values = np.full(self.population.shape[0], np.inf)
        self.crossover_rate = crossover_rate
        self.tol = tol
        self._evaluated_once = False

    @property
    def best_index(self) -> int:
        return int(np.argmin(self.values))

    def _check_convergence(self):
        if np.all(np.isfinite(self.values)):
            spread = float(np.std(self.values))
            if spread <= self.tol * abs(float(np.mean(self.values))):
                self.finished = True

    def step(self, ev):
        if self.finished:
            return
        n, d = self.population.shape
        if not self._evaluated_once:
            for i in range(n):
                self.values[i] = ev(self.population[i])
            self._evaluated_once = True
            self._check_convergence()
            return
        scale = self.rng.uniform(SCALE_LOW, SCALE_HIGH)
        best = self.population[self.best_index]
        for i in range(n):
            candidates = [j for j in range(n) if j != i]
            r1, r2 = self.rng.choice(candidates, size=2, replace=False)
            mutant = best + scale * (self.population[r1] - self.population[r2])
            cross = crossover_mask(self.rng, d, self.crossover_rate)
            trial = np.where(cross, mutant, self.population[i])
            f = ev(trial)
            if f <= self.values[i]:
                self.population[i] = trial
                self.values[i] = f
        self._check_convergence()
