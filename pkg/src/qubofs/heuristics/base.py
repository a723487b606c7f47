"""Budgeted objective, solver configuration and trace shared by all solvers."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from ..qubo import QuboInstance, evaluate

ALGORITHMS = ("RS", "GRS", "EA", "SAEA", "UEDA", "DCMA")
MUTATIONS = ("bit-flip", "block-inversion", "cycle")
RECOMBINATIONS = ("one-point", "two-point", "uniform")


@dataclass(frozen=True)
class SolverConfig:
    """Parameters of one solver run. Each algorithm reads only its own fields.

    ``alpha_margin=None`` means the DCMA default ``1 / (mu * n)``.
    """

    algorithm: str
    budget: int = 5000
    seed: int = 0
    mu: int = 20
    r_m: float = 0.05
    o_m: str = "bit-flip"
    o_r: str = "uniform"
    tau: float = 0.05
    p_r: float = 0.3
    sigma_init: float = 1.0
    alpha_margin: float | None = None

    def __post_init__(self):
        algo = self.algorithm.upper()
        if algo not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}; choose from {ALGORITHMS}")
        object.__setattr__(self, "algorithm", algo)
        if self.budget < 1:
            raise ValueError("budget must be at least 1")
        if algo in ("EA", "SAEA", "UEDA", "DCMA") and self.mu < 4:
            raise ValueError("population size mu must be at least 4")
        if not 0.0 <= self.r_m <= 1.0:
            raise ValueError("r_m must lie in [0, 1]")
        if not 0.0 <= self.p_r <= 1.0:
            raise ValueError("p_r must lie in [0, 1]")
        if self.o_m not in MUTATIONS:
            raise ValueError(f"o_m must be one of {MUTATIONS}")
        if self.o_r not in RECOMBINATIONS:
            raise ValueError(f"o_r must be one of {RECOMBINATIONS}")
        if algo == "SAEA" and self.tau < 0:
            raise ValueError("tau must be non-negative")
        if algo == "UEDA" and not 0.0 <= self.tau <= 1.0:
            raise ValueError("UEDA learning rate tau must lie in [0, 1]")
        if self.sigma_init <= 0:
            raise ValueError("sigma_init must be positive")
        if self.alpha_margin is not None and self.alpha_margin < 0:
            raise ValueError("alpha_margin must be non-negative")

    def replace(self, **changes) -> "SolverConfig":
        return replace(self, **changes)

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, obj: dict) -> "SolverConfig":
        known = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in obj.items() if k in known})

    @classmethod
    def load(cls, path, **overrides) -> "SolverConfig":
        with open(path) as fh:
            obj = json.load(fh)
        obj.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_json(obj)


def tuned_config(algorithm: str, n: int, budget: int = 5000, seed: int = 0) -> SolverConfig:
    """Configurations found by the random-search tuning on the 27-feature credit data."""
    algo = algorithm.upper()
    if algo == "EA":
        return SolverConfig("EA", budget, seed, mu=52, r_m=0.042, o_m="bit-flip", o_r="uniform")
    if algo == "SAEA":
        return SolverConfig("SAEA", budget, seed, mu=14, tau=10**-1.32, p_r=0.30)
    if algo == "UEDA":
        return SolverConfig("UEDA", budget, seed, mu=15, tau=0.95)
    if algo == "DCMA":
        mu = 19
        return SolverConfig(
            "DCMA", budget, seed, mu=mu, sigma_init=10**-2.03, alpha_margin=(mu * n) ** -1.23
        )
    return SolverConfig(algo, budget, seed)


class BudgetExhausted(Exception):
    pass


class Objective:
    """Counts and records every evaluation; raises :class:`BudgetExhausted` when spent."""

    def __init__(self, instance: QuboInstance, budget: int):
        self.instance = instance
        self.budget = budget
        self.count = 0
        self._bits = np.zeros((budget, instance.n), dtype=np.int8)
        self._values = np.zeros(budget)

    @property
    def remaining(self) -> int:
        return self.budget - self.count

    def __call__(self, z: np.ndarray) -> float:
        if self.count >= self.budget:
            raise BudgetExhausted
        value = evaluate(self.instance, z)
        self._bits[self.count] = z
        self._values[self.count] = value
        self.count += 1
        return value

    def many(self, population: np.ndarray) -> np.ndarray:
        """Evaluate rows in order; stops (raising) as soon as the budget is spent."""
        return np.array([self(z) for z in population])

    def trace(self, config: SolverConfig, reason: str = "budget") -> "SolverTrace":
        k = self.count
        return SolverTrace(self._bits[:k].copy(), self._values[:k].copy(), config, reason)


@dataclass
class SolverTrace:
    """One row per objective evaluation, in evaluation order."""

    bits: np.ndarray
    objective: np.ndarray
    config: SolverConfig
    terminated_reason: str = "budget"

    def __len__(self):
        return len(self.objective)

    @property
    def ofe(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    @property
    def cumulative_best(self) -> np.ndarray:
        return np.minimum.accumulate(self.objective)

    @property
    def popcount(self) -> np.ndarray:
        return self.bits.sum(axis=1)

    @property
    def best_value(self) -> float:
        return float(self.objective.min())

    @property
    def best_bits(self) -> np.ndarray:
        return self.bits[int(np.argmin(self.objective))]

    def best_at(self, ofe: int) -> float:
        """Best objective among the first ``ofe`` evaluations."""
        return float(self.objective[: max(1, min(ofe, len(self)))].min())

    def entries(self):
        best = self.cumulative_best
        for i in range(len(self)):
            yield i + 1, self.bits[i], float(self.objective[i]), float(best[i])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["ofe", "popcount", "objective", "cumulative_best"])
            for ofe, pc, val, best in zip(self.ofe, self.popcount, self.objective, self.cumulative_best):
                w.writerow([int(ofe), int(pc), f"{val:.17g}", f"{best:.17g}"])


def init_candidate(n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw the number of ones uniformly from 1..n, then place them uniformly."""
    if n < 1:
        raise ValueError("n must be at least 1")
    k = int(rng.integers(1, n + 1))
    z = np.zeros(n, dtype=np.int8)
    z[rng.choice(n, size=k, replace=False)] = 1
    return z


def drive(step, instance: QuboInstance, config: SolverConfig, observer=None) -> SolverTrace:
    """Run ``step(objective, n, config, rng, observer)`` until the budget is exhausted."""
    objective = Objective(instance, config.budget)
    rng = np.random.default_rng(config.seed)
    try:
        step(objective, instance.n, config, rng, observer)
    except BudgetExhausted:
        pass
    return objective.trace(config)
