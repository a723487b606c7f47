"""CMA-ES over latent reals with thresholding at zero and a margin on the
marginal bit probabilities."""

from __future__ import annotations

import numpy as np
from scipy.stats import norm

from .base import SolverConfig, SolverTrace, drive


class _CMAState:
    """Standard (mu/mu_w, lambda) CMA-ES state with rank-one and rank-mu updates."""

    def __init__(self, n: int, popsize: int, sigma: float):
        self.n = n
        self.lam = popsize
        mu = popsize // 2
        w = np.log((popsize + 1) / 2.0) - np.log(np.arange(1, mu + 1))
        self.weights = w / w.sum()
        self.mu = mu
        self.mueff = 1.0 / np.sum(self.weights**2)
        mueff = self.mueff
        self.cc = (4 + mueff / n) / (n + 4 + 2 * mueff / n)
        self.cs = (mueff + 2) / (n + mueff + 5)
        self.c1 = 2 / ((n + 1.3) ** 2 + mueff)
        self.cmu = min(1 - self.c1, 2 * (mueff - 2 + 1 / mueff) / ((n + 2) ** 2 + mueff))
        self.damps = 1 + 2 * max(0.0, np.sqrt((mueff - 1) / (n + 1)) - 1) + self.cs
        self.chi_n = np.sqrt(n) * (1 - 1 / (4 * n) + 1 / (21 * n**2))
        self.mean = np.zeros(n)
        self.sigma = sigma
        self.C = np.eye(n)
        self.pc = np.zeros(n)
        self.ps = np.zeros(n)
        self.generation = 0
        self._decompose()

    def _decompose(self):
        self.C = (self.C + self.C.T) / 2
        vals, vecs = np.linalg.eigh(self.C)
        vals = np.maximum(vals, 1e-20)
        self.D = np.sqrt(vals)
        self.B = vecs
        self.inv_sqrt = vecs @ np.diag(1 / self.D) @ vecs.T

    def ask(self, rng) -> np.ndarray:
        z = rng.standard_normal((self.lam, self.n))
        y = (z * self.D) @ self.B.T
        return self.mean + self.sigma * y

    def tell(self, x: np.ndarray, fitness: np.ndarray) -> None:
        n = self.n
        self.generation += 1
        order = np.argsort(fitness, kind="stable")[: self.mu]
        y = (x[order] - self.mean) / self.sigma
        y_w = self.weights @ y
        self.mean = self.mean + self.sigma * y_w
        self.ps = (1 - self.cs) * self.ps + np.sqrt(self.cs * (2 - self.cs) * self.mueff) * (
            self.inv_sqrt @ y_w
        )
        norm_ps = np.linalg.norm(self.ps)
        h_sig = norm_ps / np.sqrt(1 - (1 - self.cs) ** (2 * self.generation)) < (
            1.4 + 2 / (n + 1)
        ) * self.chi_n
        self.pc = (1 - self.cc) * self.pc + h_sig * np.sqrt(self.cc * (2 - self.cc) * self.mueff) * y_w
        delta = (1 - h_sig) * self.cc * (2 - self.cc)
        rank_mu = (y.T * self.weights) @ y
        self.C = (
            (1 - self.c1 - self.cmu + self.c1 * delta) * self.C
            + self.c1 * np.outer(self.pc, self.pc)
            + self.cmu * rank_mu
        )
        self.sigma *= np.exp((self.cs / self.damps) * (norm_ps / self.chi_n - 1))
        self.sigma = float(np.clip(self.sigma, 1e-300, 1e300))
        self._decompose()

    def apply_margin(self, alpha: float) -> None:
        """Move each mean coordinate so that the minority bit value keeps
        marginal probability at least ``alpha``."""
        if alpha <= 0:
            return
        alpha = min(alpha, 0.5)
        sd = self.sigma * np.sqrt(np.diag(self.C))
        limit = norm.ppf(1 - alpha) * sd
        too_far = np.abs(self.mean) > limit
        self.mean[too_far] = np.sign(self.mean[too_far]) * limit[too_far]


def minority_probability(mean: np.ndarray, sd: np.ndarray) -> np.ndarray:
    """Per-bit probability of sampling the value opposite to the mean's side."""
    return norm.cdf(-np.abs(mean) / sd)


def _dcma(objective, n, config: SolverConfig, rng, observer):
    alpha = config.alpha_margin
    if alpha is None:
        alpha = 1.0 / (config.mu * n)
    state = _CMAState(n, config.mu, config.sigma_init)
    while True:
        x = state.ask(rng)
        bits = (x > 0).astype(np.int8)
        fitness = np.empty(state.lam)
        for k in range(state.lam):
            fitness[k] = objective(bits[k])
        state.tell(x, fitness)
        state.apply_margin(alpha)
        if observer is not None:
            observer(
                {
                    "generation": state.generation,
                    "bits": bits,
                    "fitness": fitness,
                    "mean": state.mean.copy(),
                    "sd": state.sigma * np.sqrt(np.diag(state.C)),
                }
            )


def run_dcma(instance, config: SolverConfig, observer=None) -> SolverTrace:
    """Bits are the signs of latent Gaussian samples; ``alpha_margin=0``
    disables the margin, ``None`` uses 1/(mu n)."""
    return drive(_dcma, instance, config, observer)
