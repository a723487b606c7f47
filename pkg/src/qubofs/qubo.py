"""QUBO objective for feature selection and exact solvers for it.

The objective of a selection ``z`` in {0,1}^n is::

    h(z) = -[ phi * sum_i z_i |r_iY| - (1 - phi) * sum_{i != j} z_i z_j |r_ij| ]
         = -z^T Q z

with ``Q_ii = phi |r_iY|`` and ``Q_ij = -(1 - phi) |r_ij|``. Lower is better.

Bit-strings are indexed with ``z_0`` as the most significant bit, so the
integer order of indices equals the lexicographic order of the strings.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .measures import DependencyMatrices

MAX_EXACT_BITS = 30
TIE_RTOL = 1e-12


class QuboError(ValueError):
    pass


@dataclass(frozen=True)
class QuboInstance:
    q: np.ndarray
    phi: float
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        q = np.array(self.q, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1] or q.shape[0] < 1:
            raise QuboError("q must be a non-empty square matrix")
        if not np.allclose(q, q.T, rtol=0.0, atol=1e-12):
            raise QuboError("q must be symmetric")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)

    @property
    def n(self) -> int:
        return self.q.shape[0]

    def __call__(self, z) -> float | np.ndarray:
        return evaluate(self, z)

    def to_json(self) -> dict:
        return {"phi": self.phi, "q": self.q.tolist(), "provenance": self.provenance}

    @classmethod
    def from_json(cls, obj: dict) -> "QuboInstance":
        return cls(np.asarray(obj["q"], dtype=float), float(obj["phi"]), obj.get("provenance", {}))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "QuboInstance":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class IsingInstance:
    """``energy(s) = sum_{i<j} J_ij s_i s_j + sum_i f_i s_i + c`` for s in {-1,+1}^n."""

    couplings: np.ndarray
    fields: np.ndarray
    offset: float

    def energy(self, s) -> float | np.ndarray:
        s = np.asarray(s, dtype=np.float64)
        # couplings is symmetric with a zero diagonal, so the i<j sum is half the full form
        quad = 0.5 * np.sum((s @ self.couplings) * s, axis=-1)
        return quad + s @ self.fields + self.offset


@dataclass(frozen=True)
class ExactSolution:
    z_min: np.ndarray
    h_min: float
    z_max: np.ndarray
    h_max: float

    def to_json(self) -> dict:
        return {
            "z_min": bitstring(self.z_min),
            "h_min": self.h_min,
            "z_max": bitstring(self.z_max),
            "h_max": self.h_max,
        }


def build(matrices: DependencyMatrices, phi: float, dataset_label: str = "") -> QuboInstance:
    if not 0.0 <= phi <= 1.0:
        raise QuboError(f"phi must lie in [0, 1], got {phi}")
    redundancy = np.abs(matrices.inter_feature)
    q = -(1.0 - phi) * redundancy
    np.fill_diagonal(q, phi * np.abs(matrices.to_target))
    provenance = {"tuple": str(matrices.tuple), "dataset": dataset_label}
    return QuboInstance(q, float(phi), provenance)


def as_bits(z, n: int | None = None) -> np.ndarray:
    """Bit vector(s) from arrays, ``"0101"`` strings or integer indices (needs ``n``)."""
    if isinstance(z, str):
        z = [int(c) for c in z.strip()]
    elif isinstance(z, (int, np.integer)):
        if n is None:
            raise QuboError("an integer index needs the dimension n")
        return index_to_bits(int(z), n)
    arr = np.asarray(z)
    if not np.all((arr == 0) | (arr == 1)):
        raise QuboError("bit-strings may only contain 0 and 1")
    return arr.astype(np.int8)


def bitstring(z) -> str:
    return "".join(str(int(b)) for b in np.asarray(z).ravel())


def index_to_bits(k, n: int) -> np.ndarray:
    """Bits of index ``k`` (scalar or array) with ``z_0`` most significant."""
    k = np.asarray(k, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((k[..., None] >> shifts) & 1).astype(np.int8)


def bits_to_index(z) -> np.ndarray | int:
    z = np.asarray(z, dtype=np.int64)
    n = z.shape[-1]
    weights = np.int64(1) << np.arange(n - 1, -1, -1, dtype=np.int64)
    out = z @ weights
    return int(out) if np.ndim(out) == 0 else out


def evaluate(instance: QuboInstance, z) -> float | np.ndarray:
    """``h(z) = -z^T Q z`` for one bit-string or a stack of them (rows)."""
    if isinstance(z, str):
        z = as_bits(z)
    zz = np.asarray(z, dtype=np.float64)
    if zz.shape[-1] != instance.n:
        raise QuboError(f"dimension mismatch: expected {instance.n} bits, got {zz.shape[-1]}")
    zz2 = np.atleast_2d(zz)
    vals = 0.0 - np.sum((zz2 @ instance.q) * zz2, axis=1)
    return float(vals[0]) if zz.ndim == 1 else vals


def to_ising(instance: QuboInstance) -> IsingInstance:
    """Substitute ``z = (1 + s) / 2``; linear fields and a constant offset are kept."""
    w = -instance.q
    diag = np.diag(w).copy()
    off = w - np.diag(diag)
    couplings = off / 2.0
    fields = diag / 2.0 + off.sum(axis=1) / 2.0
    offset = diag.sum() / 2.0 + off.sum() / 4.0
    return IsingInstance(couplings, fields, float(offset))


def spins(z) -> np.ndarray:
    return 2 * np.asarray(z, dtype=np.int8) - 1


# ---------------------------------------------------------------------------
# enumeration


def gray_code_sweep(instance: QuboInstance) -> Iterator[tuple[int, np.ndarray, float]]:
    """Yield ``(index, z, h(z))`` for all 2^n strings in reflected Gray-code order.

    Each step flips one bit and updates the objective with an O(n) delta.
    ``z`` is a view of the internal state; copy it if you keep it.
    """
    q = instance.q
    n = instance.n
    z = np.zeros(n, dtype=np.int8)
    g = np.zeros(n)  # g = Q z
    f = 0.0  # z^T Q z
    index = 0
    yield index, z, -f
    for step in range(1, 2**n):
        b = (step & -step).bit_length() - 1  # lowest set bit of the step counter
        i = n - 1 - b
        d = 1 - 2 * int(z[i])
        f += d * (q[i, i] + 2.0 * (g[i] - q[i, i] * z[i]))
        z[i] ^= 1
        g += d * q[:, i]
        index ^= 1 << b
        yield index, z, -f


def _sweep_low(q: np.ndarray, low_bits: int) -> tuple[np.ndarray, np.ndarray]:
    """z^T Q z over all settings of the last ``low_bits`` variables (others 0).

    Returns the values (length 2^low_bits, index order) and, for every
    remaining leading variable j, the vector ``sum_l Q_jl z_l`` over the same
    settings. Each new variable doubles the table using a one-flip delta.
    """
    n = q.shape[0]
    head = n - low_bits
    f = np.zeros(1)
    lin = np.zeros((n, 1))
    for i in range(n - 1, head - 1, -1):
        step = q[i, i] + 2.0 * lin[i]
        f = np.concatenate([f, f + step])
        lin = lin[:i]
        lin = np.concatenate([lin, lin + q[:i, i : i + 1]], axis=1)
    return f, lin


def all_energies(instance: QuboInstance) -> np.ndarray:
    """``h`` for every bit-string, indexed by :func:`bits_to_index`."""
    if instance.n > 26:
        raise QuboError("refusing to materialize more than 2^26 energies")
    f, _ = _sweep_low(instance.q, instance.n)
    return -f


def _popcounts(bits: int) -> np.ndarray:
    pc = np.zeros(1, dtype=np.int16)
    for _ in range(bits):
        pc = np.concatenate([pc, pc + 1])
    return pc


def _pick(idx: np.ndarray, pop: np.ndarray) -> int:
    """Position with the smallest popcount, then the smallest index."""
    return int(np.lexsort((idx, pop))[0])


def _tie_tol(value: float) -> float:
    return TIE_RTOL * max(1.0, abs(value))


def exact_minmax(instance: QuboInstance, block_bits: int = 20) -> ExactSolution:
    """Global minimum and maximum of ``h`` over all 2^n bit-strings.

    The trailing ``block_bits`` variables are tabulated once; the leading
    variables are walked in Gray-code order, each flip adding one
    precomputed vector to the block. Values within a relative 1e-12 of the
    optimum count as ties, resolved by smaller popcount and then
    lexicographic order. Reported values are re-evaluated from scratch.
    """
    n = instance.n
    if n > MAX_EXACT_BITS:
        raise QuboError(f"exact enumeration is limited to n <= {MAX_EXACT_BITS} (got n = {n})")
    q = instance.q
    low = min(n, block_bits)
    head = n - low
    f_low, cross = _sweep_low(q, low)
    pop_low = _popcounts(low)
    q_head = q[:head, :head]

    def blocks():
        b = np.zeros(head, dtype=np.int8)
        t = np.zeros_like(f_low)
        g = np.zeros(head)
        f_head = 0.0
        index = 0
        yield index, b, f_head, t
        for step in range(1, 2**head):
            bit = (step & -step).bit_length() - 1
            j = head - 1 - bit
            d = 1 - 2 * int(b[j])
            f_head += d * (q_head[j, j] + 2.0 * (g[j] - q_head[j, j] * b[j]))
            b[j] ^= 1
            g += d * q_head[:, j]
            t += (2.0 * d) * cross[j]
            index ^= 1 << bit
            yield index, b, f_head, t

    # pass 1: extreme values and the blocks that reach them
    mins, maxs = {}, {}
    for index, b, f_head, t in blocks():
        h = -(f_low + t + f_head)
        mins[index] = h.min()
        maxs[index] = h.max()
    g_min = min(mins.values())
    g_max = max(maxs.values())

    # pass 2: tie resolution inside the blocks that contain near-optimal strings
    lo_blocks = {k for k, v in mins.items() if v <= g_min + _tie_tol(g_min)}
    hi_blocks = {k for k, v in maxs.items() if v >= g_max - _tie_tol(g_max)}

    tol_lo, tol_hi = _tie_tol(g_min), _tie_tol(g_max)

    def best_key(mask, index, pop_head):
        cand = np.flatnonzero(mask).astype(np.int64)
        full = (np.int64(index) << low) | cand
        pop = pop_low[cand] + pop_head
        k = _pick(full, pop)
        return int(pop[k]), int(full[k])

    best_lo = best_hi = None
    for index, b, f_head, t in blocks():
        in_lo, in_hi = index in lo_blocks, index in hi_blocks
        if not (in_lo or in_hi):
            continue
        h = -(f_low + t + f_head)
        pop_head = int(b.sum())
        if in_lo:
            key = best_key(h <= g_min + tol_lo, index, pop_head)
            best_lo = key if best_lo is None else min(best_lo, key)
        if in_hi:
            key = best_key(h >= g_max - tol_hi, index, pop_head)
            best_hi = key if best_hi is None else min(best_hi, key)

    z_min = index_to_bits(best_lo[1], n)
    z_max = index_to_bits(best_hi[1], n)
    return ExactSolution(z_min, evaluate(instance, z_min), z_max, evaluate(instance, z_max))


def naive_minmax(instance: QuboInstance) -> ExactSolution:
    """Reference enumerator: evaluates every string from scratch (small n only)."""
    n = instance.n
    if n > 20:
        raise QuboError("naive enumeration is limited to n <= 20")
    z = index_to_bits(np.arange(2**n), n)
    h = evaluate(instance, z)
    pop = z.sum(axis=1)
    idx = np.arange(2**n)
    lo = np.flatnonzero(h <= h.min() + _tie_tol(h.min()))
    hi = np.flatnonzero(h >= h.max() - _tie_tol(h.max()))
    i_lo = lo[_pick(idx[lo], pop[lo])]
    i_hi = hi[_pick(idx[hi], pop[hi])]
    return ExactSolution(
        z[i_lo], evaluate(instance, z[i_lo]), z[i_hi], evaluate(instance, z[i_hi])
    )


# ---------------------------------------------------------------------------
# approximation ratio


def ratio_of_values(h, exact: ExactSolution) -> np.ndarray:
    span = exact.h_min - exact.h_max
    if span == 0.0:
        raise QuboError("flat objective: h_max equals h_min")
    return (np.asarray(h, dtype=np.float64) - exact.h_max) / span


def approximation_ratio(instance: QuboInstance, samples, exact: ExactSolution, counts=None) -> float:
    """Mean of ``(h(z) - h_max) / (h_min - h_max)`` over the sampled strings.

    ``samples`` is a stack of bit rows; ``counts`` optionally weights each row
    (multiset given as distinct strings with multiplicities).
    """
    z = np.atleast_2d(np.asarray(samples))
    r = ratio_of_values(evaluate(instance, z), exact)
    if counts is None:
        return float(r.mean())
    w = np.asarray(counts, dtype=np.float64)
    return float((r * w).sum() / w.sum())


def random_bitstrings(n: int, count: int, seed) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.integers(0, 2, size=(count, n), dtype=np.int8)


def random_baseline(instance: QuboInstance, count: int = 1000, seed=0, exact: ExactSolution | None = None) -> float:
    """Mean approximation ratio of ``count`` uniformly random bit-strings."""
    if count < 1:
        raise QuboError("count must be positive")
    if exact is None:
        exact = exact_minmax(instance)
    return approximation_ratio(instance, random_bitstrings(instance.n, count, seed), exact)
