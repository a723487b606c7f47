"""Univariate estimation-of-distribution algorithm (incremental learning variant)."""

from __future__ import annotations

import math

import numpy as np

from .base import SolverConfig, SolverTrace, drive, init_candidate


def ueda_update(p, p_star, tau: float, n: int):
    """Blend the current marginals towards the selected-set frequencies and
    keep them inside [1/n, 1 - 1/n]."""
    p = np.asarray(p, dtype=np.float64)
    raw = p * (1.0 - tau) + np.asarray(p_star, dtype=np.float64) * tau
    return np.clip(raw, 1.0 / n, 1.0 - 1.0 / n)


def _ueda(objective, n, config: SolverConfig, rng, observer):
    mu = config.mu
    keep = math.ceil(mu / 2)
    p = np.full(n, 0.5)
    pop = np.array([init_candidate(n, rng) for _ in range(mu)])
    generation = 0
    while True:
        fit = objective.many(pop)
        best = pop[np.argsort(fit, kind="stable")[:keep]]
        p = ueda_update(p, best.mean(axis=0), config.tau, n)
        generation += 1
        if observer is not None:
            observer({"generation": generation, "probabilities": p.copy(), "population": pop, "fitness": fit})
        pop = (rng.random((mu, n)) < p).astype(np.int8)


def run_ueda(instance, config: SolverConfig, observer=None) -> SolverTrace:
    """Sample mu strings from independent Bernoulli marginals, keep the better
    half (rounded up) and move the marginals towards it at rate ``tau``."""
    return drive(_ueda, instance, config, observer)
