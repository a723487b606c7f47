"""Variation operators on bit-strings.

The mutation strength ``count`` is the number of flipped bits, the length
of the inverted block, or the shift of the cyclic rotation.
"""

import numpy as np


def mutation_count(rate: float, n: int) -> int:
    return int(min(n, max(1, round(rate * n))))


def bit_flip(z: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    child = z.copy()
    idx = rng.choice(z.size, size=min(count, z.size), replace=False)
    child[idx] ^= 1
    return child


def block_inversion(z: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    n = z.size
    count = min(count, n)
    start = int(rng.integers(0, n - count + 1))
    child = z.copy()
    child[start : start + count] ^= 1
    return child


def cycle(z: np.ndarray, count: int, rng: np.random.Generator) -> np.ndarray:
    shift = count if rng.random() < 0.5 else -count
    return np.roll(z, shift)


def one_point(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    if a.size < 2:
        return a.copy()
    cut = int(rng.integers(1, a.size))
    return np.concatenate([a[:cut], b[cut:]])


def two_point(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    i, j = sorted(rng.integers(0, a.size, size=2))
    child = b.copy()
    child[i : j + 1] = a[i : j + 1]
    return child


def uniform(a: np.ndarray, b: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    mask = rng.random(a.size) < 0.5
    return np.where(mask, a, b).astype(a.dtype)


MUTATION_OPS = {"bit-flip": bit_flip, "block-inversion": block_inversion, "cycle": cycle}
RECOMBINATION_OPS = {"one-point": one_point, "two-point": two_point, "uniform": uniform}


def mutate(z, operator: str, count: int, rng):
    return MUTATION_OPS[operator](z, count, rng)


def recombine(a, b, operator: str, rng):
    return RECOMBINATION_OPS[operator](a, b, rng)
