"""Budgeted stochastic solvers for QUBO instances."""

from .base import (
    ALGORITHMS,
    MUTATIONS,
    RECOMBINATIONS,
    BudgetExhausted,
    Objective,
    SolverConfig,
    SolverTrace,
    init_candidate,
    tuned_config,
)
from .dcma import run_dcma
from .evolutionary import run_ea, run_saea
from .search import run_greedy_restart, run_random_search
from .ueda import run_ueda, ueda_update

RUNNERS = {
    "RS": run_random_search,
    "GRS": run_greedy_restart,
    "EA": run_ea,
    "SAEA": run_saea,
    "UEDA": run_ueda,
    "DCMA": run_dcma,
}


def run(instance, config: SolverConfig, observer=None) -> SolverTrace:
    return RUNNERS[config.algorithm](instance, config, observer)


__all__ = [
    "ALGORITHMS",
    "MUTATIONS",
    "RECOMBINATIONS",
    "RUNNERS",
    "BudgetExhausted",
    "Objective",
    "SolverConfig",
    "SolverTrace",
    "init_candidate",
    "run",
    "run_dcma",
    "run_ea",
    "run_greedy_restart",
    "run_random_search",
    "run_saea",
    "run_ueda",
    "tuned_config",
    "ueda_update",
]
