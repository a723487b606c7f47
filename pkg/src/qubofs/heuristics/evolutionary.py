"""(mu + mu) evolutionary algorithm and its self-adaptive variant."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .base import MUTATIONS, RECOMBINATIONS, SolverConfig, SolverTrace, drive, init_candidate
from .operators import mutate, mutation_count, recombine


# generations in a row without a new offspring before duplicates are allowed again
MAX_STALL = 10


def _truncate(pop: list, fit: np.ndarray, mu: int):
    order = np.argsort(fit, kind="stable")[:mu]
    return [pop[i] for i in order], fit[order]


def _ea(objective, n, config: SolverConfig, rng, observer):
    mu = config.mu
    count = mutation_count(config.r_m, n)
    pop = [init_candidate(n, rng) for _ in range(mu)]
    fit = objective.many(pop)
    generation = 0
    stall = 0
    while True:
        children = []
        child_fit = []
        seen = {z.tobytes() for z in pop} if stall < MAX_STALL else set()
        try:
            for _ in range(mu):
                a, b = rng.integers(0, mu, size=2)
                child = recombine(pop[a], pop[b], config.o_r, rng)
                child = mutate(child, config.o_m, count, rng)
                if child.tobytes() in seen:
                    continue
                seen.add(child.tobytes())
                child_fit.append(objective(child))
                children.append(child)
        finally:
            # offspring evaluated before the budget ran out still compete
            pop, fit = _truncate(pop + children, np.concatenate([fit, child_fit]), mu)
            generation += 1
            stall = 0 if children else stall + 1
            if observer is not None:
                observer({"generation": generation, "population": pop, "fitness": fit})


@dataclass
class Individual:
    bits: np.ndarray
    rate: float
    o_m: str
    o_r: str


def clamp_rate(rate: float, n: int) -> float:
    return float(min(1.0, max(1.0 / n, rate)))


def _saea(objective, n, config: SolverConfig, rng, observer):
    mu = config.mu
    pop = [
        Individual(init_candidate(n, rng), 1.0 / n, str(rng.choice(MUTATIONS)), str(rng.choice(RECOMBINATIONS)))
        for _ in range(mu)
    ]
    fit = objective.many([ind.bits for ind in pop])
    generation = 0
    stall = 0
    while True:
        children = []
        child_fit = []
        seen = {ind.bits.tobytes() for ind in pop} if stall < MAX_STALL else set()
        try:
            for _ in range(mu):
                a, b = (pop[i] for i in rng.integers(0, mu, size=2))
                rate_a = a.rate * np.exp(config.tau * rng.standard_normal())
                rate_b = b.rate * np.exp(config.tau * rng.standard_normal())
                rate = clamp_rate(0.5 * (rate_a + rate_b), n)
                o_m = str(rng.choice(MUTATIONS)) if rng.random() < config.p_r else a.o_m
                o_r = str(rng.choice(RECOMBINATIONS)) if rng.random() < config.p_r else a.o_r
                bits = recombine(a.bits, b.bits, o_r, rng)
                bits = mutate(bits, o_m, mutation_count(rate, n), rng)
                if bits.tobytes() in seen:
                    continue
                seen.add(bits.tobytes())
                child = Individual(bits, rate, o_m, o_r)
                child_fit.append(objective(bits))
                children.append(child)
        finally:
            pop, fit = _truncate(pop + children, np.concatenate([fit, child_fit]), mu)
            generation += 1
            stall = 0 if children else stall + 1
            if observer is not None:
                observer({"generation": generation, "population": pop, "fitness": fit})


def run_ea(instance, config: SolverConfig, observer=None) -> SolverTrace:
    """Generational (mu + mu) scheme with fixed operators and rate.

    Parents are drawn uniformly; each offspring is recombined and then
    mutated; the best mu of parents and offspring survive. An offspring
    identical to a population member or an earlier sibling is discarded
    without evaluation.
    """
    return drive(_ea, instance, config, observer)


def run_saea(instance, config: SolverConfig, observer=None) -> SolverTrace:
    """EA whose mutation rate and operator choices evolve with each individual.

    The rate is perturbed log-normally per parent, averaged between the two
    parents and clamped to [1/n, 1]. Operator genes come from the first
    parent and are redrawn uniformly with probability ``p_r``. Duplicate
    offspring are discarded as in :func:`run_ea`.
    """
    return drive(_saea, instance, config, observer)
