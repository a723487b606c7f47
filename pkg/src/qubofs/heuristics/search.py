"""Random search and greedy bit-flip local search with restarts."""

from __future__ import annotations

from .base import SolverConfig, SolverTrace, drive, init_candidate


def _random_search(objective, n, config, rng, observer):
    while True:
        objective(init_candidate(n, rng))


def _greedy_restart(objective, n, config, rng, observer):
    while True:
        z = init_candidate(n, rng)
        fz = objective(z)
        improved = True
        while improved:
            improved = False
            for i in rng.permutation(n):
                nb = z.copy()
                nb[i] ^= 1
                f_nb = objective(nb)
                if f_nb < fz:
                    z, fz = nb, f_nb
                    improved = True
                    if observer is not None:
                        observer({"event": "accept", "bits": z, "value": fz})
                    break
        if observer is not None:
            observer({"event": "restart", "bits": z, "value": fz})


def run_random_search(instance, config: SolverConfig, observer=None) -> SolverTrace:
    return drive(_random_search, instance, config, observer)


def run_greedy_restart(instance, config: SolverConfig, observer=None) -> SolverTrace:
    """First-improvement hill climbing over single bit flips in random order.

    A sweep over all n neighbours without improvement triggers a restart
    from a fresh random candidate.
    """
    return drive(_greedy_restart, instance, config, observer)
