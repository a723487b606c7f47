"""State-vector simulation of QAOA and a real-amplitudes VQE for QUBO instances.

Basis state ``k`` corresponds to the bit-string ``index_to_bits(k, n)``, so
qubit ``i`` is bit ``z_i`` and qubit 0 is the most significant. Because the
cost Hamiltonian is diagonal, its spectrum is the table of QUBO values.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .heuristics.base import SolverTrace
from .qubo import (
    ExactSolution,
    QuboInstance,
    all_energies,
    approximation_ratio,
    exact_minmax,
    index_to_bits,
    ratio_of_values,
)

MAX_QUBITS = 24
WARM_STARTS = ("extrapolate", "linear", "quadratic", "zeros")


class QuantumError(ValueError):
    pass


@dataclass(frozen=True)
class QaoaParams:
    gamma: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        g = np.atleast_1d(np.asarray(self.gamma, dtype=np.float64))
        b = np.atleast_1d(np.asarray(self.beta, dtype=np.float64))
        if g.shape != b.shape or g.ndim != 1 or g.size < 1:
            raise QuantumError("gamma and beta must be vectors of equal length p >= 1")
        if not (np.all(np.isfinite(g)) and np.all(np.isfinite(b))):
            raise QuantumError("non-finite angles")
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "beta", b)

    @property
    def p(self) -> int:
        return self.gamma.size

    @classmethod
    def from_vector(cls, x) -> "QaoaParams":
        x = np.asarray(x, dtype=np.float64)
        p = x.size // 2
        return cls(x[:p], x[p:])

    def vector(self) -> np.ndarray:
        return np.concatenate([self.gamma, self.beta])

    def to_json(self) -> dict:
        return {"p": self.p, "gamma": self.gamma.tolist(), "beta": self.beta.tolist()}


@dataclass
class StateVector:
    amplitudes: np.ndarray
    n: int

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2

    def norm(self) -> float:
        return float(np.sqrt(self.probabilities().sum()))


@dataclass
class ShotResult:
    """Counts keyed by bit-strings such as ``"0101"`` (``z_0`` first)."""

    counts: dict[str, int]
    shots: int

    def top(self, k: int = 10) -> list[tuple[str, float]]:
        ranked = sorted(self.counts.items(), key=lambda kv: (-kv[1], kv[0]))
        return [(s, c / self.shots) for s, c in ranked[:k]]

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        keys = list(self.counts)
        bits = np.array([[int(ch) for ch in s] for s in keys], dtype=np.int8)
        return bits, np.array([self.counts[s] for s in keys])

    def ratio(self, instance: QuboInstance, exact: ExactSolution) -> float:
        bits, counts = self.arrays()
        return approximation_ratio(instance, bits, exact, counts)


@dataclass(frozen=True)
class VqeAnsatz:
    layers: int
    thetas: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.thetas, dtype=np.float64).ravel()
        if self.layers < 0:
            raise QuantumError("layers must be non-negative")
        if t.size % (self.layers + 1):
            raise QuantumError("need one rotation angle per qubit per rotation layer")
        object.__setattr__(self, "thetas", t)

    @property
    def n(self) -> int:
        return self.thetas.size // (self.layers + 1)

    def to_json(self) -> dict:
        return {"layers": self.layers, "thetas": self.thetas.tolist()}


# ---------------------------------------------------------------------------
# gates


def _guard(n: int) -> None:
    if n > MAX_QUBITS:
        raise QuantumError(f"state-vector simulation is limited to {MAX_QUBITS} qubits, got {n}")


def cost_energies(instance: QuboInstance) -> np.ndarray:
    _guard(instance.n)
    return all_energies(instance)


def plus_state(n: int) -> np.ndarray:
    _guard(n)
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=np.complex128)


def apply_cost(amps: np.ndarray, energies: np.ndarray, gamma: float) -> np.ndarray:
    return amps * np.exp(-1j * gamma * energies)


def apply_mixer(amps: np.ndarray, beta: float, n: int) -> np.ndarray:
    """``exp(i beta X)`` on every qubit."""
    out = amps.copy()
    c, s = np.cos(beta), 1j * np.sin(beta)
    for i in range(n):
        a = out.reshape(1 << i, 2, -1)
        a0 = a[:, 0, :].copy()
        a1 = a[:, 1, :].copy()
        a[:, 0, :] = c * a0 + s * a1
        a[:, 1, :] = c * a1 + s * a0
    return out


def apply_ry(amps: np.ndarray, thetas: np.ndarray, n: int) -> np.ndarray:
    out = amps.copy()
    for i in range(n):
        c, s = np.cos(thetas[i] / 2), np.sin(thetas[i] / 2)
        a = out.reshape(1 << i, 2, -1)
        a0 = a[:, 0, :].copy()
        a1 = a[:, 1, :].copy()
        a[:, 0, :] = c * a0 - s * a1
        a[:, 1, :] = s * a0 + c * a1
    return out


def apply_cnot_chain(amps: np.ndarray, n: int) -> np.ndarray:
    """CNOT(i -> i+1) for i = 0..n-2, in order."""
    out = amps.copy()
    for i in range(n - 1):
        a = out.reshape(1 << i, 2, 2, -1)
        a[:, 1, :, :] = a[:, 1, ::-1, :].copy()
    return out


def qaoa_state(instance: QuboInstance, params: QaoaParams, energies=None, observer=None) -> StateVector:
    n = instance.n
    if energies is None:
        energies = cost_energies(instance)
    amps = plus_state(n)
    for layer, (g, b) in enumerate(zip(params.gamma, params.beta)):
        amps = apply_mixer(apply_cost(amps, energies, g), b, n)
        if observer is not None:
            observer(layer, amps)
    return StateVector(amps, n)


def vqe_state(ansatz: VqeAnsatz, observer=None) -> StateVector:
    n = ansatz.n
    _guard(n)
    amps = np.zeros(1 << n)
    amps[0] = 1.0
    rows = ansatz.thetas.reshape(ansatz.layers + 1, n)
    for layer in range(ansatz.layers):
        amps = apply_cnot_chain(apply_ry(amps, rows[layer], n), n)
        if observer is not None:
            observer(layer, amps)
    amps = apply_ry(amps, rows[-1], n)
    return StateVector(amps, n)


def expectation(state: StateVector, instance: QuboInstance, energies=None) -> float:
    if state.n != instance.n:
        raise QuantumError("dimension mismatch between state and instance")
    if energies is None:
        energies = cost_energies(instance)
    return float(state.probabilities() @ energies)


def sample(state: StateVector, shots: int, seed=0) -> ShotResult:
    if shots < 1:
        raise QuantumError("shots must be positive")
    probs = state.probabilities()
    probs = probs / probs.sum()
    counts = np.random.default_rng(seed).multinomial(shots, probs)
    hit = np.flatnonzero(counts)
    bits = index_to_bits(hit, state.n)
    return ShotResult({"".join(map(str, row)): int(c) for row, c in zip(bits, counts[hit])}, shots)


def exact_ratio(state: StateVector, energies: np.ndarray, exact: ExactSolution) -> float:
    """Approximation ratio of the full output distribution (no shot noise)."""
    return float(state.probabilities() @ ratio_of_values(energies, exact))


# ---------------------------------------------------------------------------
# QAOA optimization


def warm_starts(previous: QaoaParams, methods=WARM_STARTS) -> dict[str, QaoaParams]:
    """Candidate angles for ``p + 1`` layers from the optimum at ``p`` layers."""
    p = previous.p
    k = np.arange(1, p + 1)
    out = {}
    for method in methods:
        if method not in WARM_STARTS:
            raise QuantumError(f"unknown warm start {method!r}")
        if method == "extrapolate" and p >= 2:
            out[method] = QaoaParams(
                np.append(previous.gamma, 2 * previous.gamma[-1] - previous.gamma[-2]),
                np.append(previous.beta, 2 * previous.beta[-1] - previous.beta[-2]),
            )
        elif method in ("linear", "quadratic"):
            degree = 1 if method == "linear" else 2
            if p < degree + 1:
                continue
            grid = np.linspace(1, p, p + 1)
            out[method] = QaoaParams(
                np.polyval(np.polyfit(k, previous.gamma, degree), grid),
                np.polyval(np.polyfit(k, previous.beta, degree), grid),
            )
        elif method == "zeros":
            out[method] = QaoaParams(np.append(previous.gamma, 0.0), np.append(previous.beta, 0.0))
    return out


@dataclass
class QaoaLayer:
    params: QaoaParams
    expectation: float
    ratio: float
    exact_ratio: float
    shots: ShotResult
    start: str

    def to_json(self, top: int = 10) -> dict:
        return {
            **self.params.to_json(),
            "expectation": self.expectation,
            "approximation_ratio": self.ratio,
            "exact_approximation_ratio": self.exact_ratio,
            "start": self.start,
            "top": [{"bits": s, "frequency": f} for s, f in self.shots.top(top)],
        }


@dataclass
class QaoaResult:
    layers: list[QaoaLayer]
    trace: SolverTrace
    exact: ExactSolution

    @property
    def ratios(self) -> list[float]:
        return [layer.ratio for layer in self.layers]

    def to_json(self) -> dict:
        return {"exact": self.exact.to_json(), "layers": [layer.to_json() for layer in self.layers]}


class _Recorder:
    """Wraps the exact expectation and logs every call for the trace."""

    def __init__(self, instance, energies, build):
        self.instance = instance
        self.energies = energies
        self.build = build
        self.bits: list[np.ndarray] = []
        self.values: list[float] = []

    def __call__(self, x) -> float:
        state = self.build(x)
        probs = state.probabilities()
        value = float(probs @ self.energies)
        self.bits.append(index_to_bits(int(np.argmax(probs)), state.n))
        self.values.append(value)
        return value

    def trace(self) -> SolverTrace:
        n = self.instance.n
        bits = np.array(self.bits, dtype=np.int8).reshape(-1, n)
        return SolverTrace(bits, np.array(self.values), None, "budget")


def _nelder_mead(fun, x0, maxfev: int, restarts: int):
    best = minimize(fun, x0, method="Nelder-Mead", options={"maxfev": maxfev, "xatol": 1e-7, "fatol": 1e-10})
    for _ in range(restarts):
        again = minimize(fun, best.x, method="Nelder-Mead", options={"maxfev": maxfev, "xatol": 1e-7, "fatol": 1e-10})
        if again.fun >= best.fun - 1e-10:
            break
        best = again
    return best


def _grid_start(fun, size: int) -> QaoaParams:
    gammas = np.linspace(0, 2 * np.pi, size, endpoint=False)
    betas = np.linspace(0, np.pi, size, endpoint=False)
    values = [(fun(np.array([g, b])), g, b) for g in gammas for b in betas]
    _, g, b = min(values)
    return QaoaParams([g], [b])


def optimize_qaoa(
    instance: QuboInstance,
    p_max: int,
    warm_start=WARM_STARTS,
    maxfev: int = 2000,
    restarts: int = 2,
    shots: int = 8192,
    seed=0,
    n_random_starts: int = 1,
    exact: ExactSolution | None = None,
    grid_size: int = 16,
) -> QaoaResult:
    """Layer-by-layer QAOA optimization with warm-started angle candidates.

    At ``p = 1`` the starts are random plus the best point of a coarse
    ``grid_size`` x ``grid_size`` scan of (gamma, beta) in [0, 2 pi) x [0, pi)
    (``grid_size=0`` skips the scan); for larger ``p`` each selected warm
    start heuristic proposes angles from the previous optimum. Every start is
    refined by Nelder-Mead on the exact expectation and the best one is kept.
    """
    if p_max < 1:
        raise QuantumError("p_max must be at least 1")
    if warm_start == "all":
        warm_start = WARM_STARTS
    elif isinstance(warm_start, str):
        warm_start = tuple(w.strip() for w in warm_start.split(",") if w.strip())
    rng = np.random.default_rng(seed)
    energies = cost_energies(instance)
    if exact is None:
        exact = exact_minmax(instance)
    recorder = _Recorder(instance, energies, lambda x: qaoa_state(instance, QaoaParams.from_vector(x), energies))
    layers: list[QaoaLayer] = []
    for p in range(1, p_max + 1):
        if p == 1:
            starts = {
                f"random-{r}": QaoaParams(rng.uniform(0, 2 * np.pi, 1), rng.uniform(0, np.pi, 1))
                for r in range(n_random_starts)
            }
            if grid_size > 0:
                starts["grid"] = _grid_start(recorder, grid_size)
        else:
            starts = warm_starts(layers[-1].params, warm_start)
            if not starts:
                starts = warm_starts(layers[-1].params, ("zeros",))
        best_name, best = None, None
        for name, start in starts.items():
            res = _nelder_mead(recorder, start.vector(), maxfev, restarts)
            if best is None or res.fun < best.fun:
                best_name, best = name, res
        params = QaoaParams.from_vector(best.x)
        state = qaoa_state(instance, params, energies)
        shot = sample(state, shots, rng.integers(2**63))
        layers.append(
            QaoaLayer(
                params,
                expectation(state, instance, energies),
                shot.ratio(instance, exact),
                exact_ratio(state, energies, exact),
                shot,
                best_name,
            )
        )
    return QaoaResult(layers, recorder.trace(), exact)


# ---------------------------------------------------------------------------
# VQE


@dataclass
class VqeResult:
    ansatz: VqeAnsatz
    expectation: float
    ratio: float
    exact_ratio: float
    shots: ShotResult
    trace: SolverTrace = field(repr=False)

    def to_json(self, top: int = 10) -> dict:
        return {
            **self.ansatz.to_json(),
            "expectation": self.expectation,
            "approximation_ratio": self.ratio,
            "exact_approximation_ratio": self.exact_ratio,
            "top": [{"bits": s, "frequency": f} for s, f in self.shots.top(top)],
        }


def optimize_vqe(
    instance: QuboInstance,
    layers: int = 1,
    maxiter: int = 2000,
    n_starts: int = 5,
    shots: int = 8192,
    seed=0,
    exact: ExactSolution | None = None,
) -> VqeResult:
    """Minimize the exact expectation of the real-amplitudes ansatz with COBYLA
    from ``n_starts`` random angle vectors; report the best."""
    n = instance.n
    _guard(n)
    rng = np.random.default_rng(seed)
    energies = cost_energies(instance)
    if exact is None:
        exact = exact_minmax(instance)
    recorder = _Recorder(instance, energies, lambda x: vqe_state(VqeAnsatz(layers, x)))
    best = None
    for _ in range(n_starts):
        x0 = rng.uniform(0, 2 * np.pi, n * (layers + 1))
        res = minimize(recorder, x0, method="COBYLA", options={"maxiter": maxiter, "rhobeg": 0.5, "tol": 1e-10})
        if best is None or res.fun < best.fun:
            best = res
    ansatz = VqeAnsatz(layers, best.x)
    state = vqe_state(ansatz)
    shot = sample(state, shots, rng.integers(2**63))
    return VqeResult(
        ansatz,
        expectation(state, instance, energies),
        shot.ratio(instance, exact),
        exact_ratio(state, energies, exact),
        shot,
        recorder.trace(),
    )
