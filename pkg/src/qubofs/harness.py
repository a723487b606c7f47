"""Experiment drivers: phi sweeps, dependency-tuple comparison, random-search
tuning of the metaheuristics, multi-run validation and report writing.

Every run draws its generator seed from ``(master seed, cell index)`` so the
results do not depend on how cells are scheduled across workers.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import mleval
from .dataio import Dataset
from .heuristics import ALGORITHMS, MUTATIONS, RECOMBINATIONS, SolverConfig, SolverTrace, run, tuned_config
from .measures import DependencyTuple, all_tuples, build_matrices
from .qubo import ExactSolution, QuboInstance, build, exact_minmax, ratio_of_values


def run_seed(master: int, *index: int) -> int:
    """Independent 63-bit seed for one cell of an experiment."""
    state = np.random.SeedSequence([int(master), *map(int, index)]).generate_state(2, np.uint32)
    return int(state[0]) << 31 | int(state[1]) >> 1


def _map(fn, items: list, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items, chunksize=max(1, len(items) // (4 * threads))))


def score_subset(dataset: Dataset, bits) -> mleval.ModelScore:
    """Logistic benchmark that also accepts the empty selection."""
    model = mleval.fit_logistic(dataset, bits, allow_empty=True)
    return mleval.score(model, dataset)


# ---------------------------------------------------------------------------
# phi sweep and tuple comparison


@dataclass
class PhiPoint:
    phi: float
    bits: np.ndarray
    value: float
    score: mleval.ModelScore

    def row(self) -> dict:
        return {
            "phi": self.phi,
            "subset": "".join(map(str, self.bits.tolist())),
            "value": self.value,
            **self.score.to_json(),
        }


def sweep_phi(
    dataset: Dataset, tuple: DependencyTuple, phi_grid, evaluator=score_subset, bins: int = 10
) -> list[PhiPoint]:
    grid = np.asarray(phi_grid, dtype=np.float64)
    if np.any((grid < 0) | (grid > 1)):
        raise ValueError("phi values must lie in [0, 1]")
    matrices = build_matrices(dataset, tuple, bins)
    out = []
    for phi in grid:
        sol = exact_minmax(build(matrices, float(phi), dataset.label))
        out.append(PhiPoint(float(phi), sol.z_min, sol.h_min, evaluator(dataset, sol.z_min)))
    return out


@dataclass
class TupleRow:
    tuple: DependencyTuple
    value: float
    bits: np.ndarray
    score: mleval.ModelScore

    def row(self) -> dict:
        return {
            "feature_measure": self.tuple.feature_measure,
            "target_measure": self.tuple.target_measure,
            "value": self.value,
            "subset": "".join(map(str, self.bits.tolist())),
            **self.score.to_json(),
        }


def compare_tuples(
    dataset: Dataset, phi: float, tuples=None, evaluator=score_subset, bins: int = 10
) -> list[TupleRow]:
    if dataset.n_features > 30:
        raise ValueError("tuple comparison needs the exact solver (at most 30 features)")
    rows = []
    for tup in all_tuples() if tuples is None else tuples:
        sol = exact_minmax(build(build_matrices(dataset, tup, bins), phi, dataset.label))
        rows.append(TupleRow(tup, sol.h_min, sol.z_min, evaluator(dataset, sol.z_min)))
    return rows


def selection_table(dataset: Dataset, max_n: int = 20, seed=0) -> list[dict]:
    """All features versus the three classical selection baselines."""
    full = mleval.evaluate_subset(dataset, None)
    brute = mleval.brute_force_subset(dataset, max_n)
    elim = mleval.rfe(dataset)
    lasso = mleval.lasso_path(dataset, seed=seed)
    return [
        {"method": "all features", **full.to_json()},
        {"method": "brute force", **brute.score.to_json()},
        {"method": "RFE", **elim.score.to_json()},
        {"method": "LASSO", **lasso.score.to_json()},
    ]


# ---------------------------------------------------------------------------
# tuning


@dataclass(frozen=True)
class TuningSpec:
    algorithm: str
    n_configs: int = 100
    runs_per_config: int = 10
    budget_per_run: int = 2000
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "algorithm", self.algorithm.upper())
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}")
        if min(self.n_configs, self.runs_per_config, self.budget_per_run) < 1:
            raise ValueError("tuning counts must be positive")


def sample_config(algorithm: str, n: int, rng: np.random.Generator, budget: int) -> SolverConfig:
    """One random configuration within the tuning bounds."""
    algo = algorithm.upper()
    mu = int(rng.integers(4, 201))
    if algo == "EA":
        return SolverConfig(
            "EA",
            budget,
            mu=mu,
            r_m=float(rng.uniform(0, 1)),
            o_m=MUTATIONS[rng.integers(3)],
            o_r=RECOMBINATIONS[rng.integers(3)],
        )
    if algo == "SAEA":
        return SolverConfig("SAEA", budget, mu=mu, tau=float(10 ** rng.uniform(-4, 0)), p_r=float(rng.uniform(0, 1)))
    if algo == "UEDA":
        return SolverConfig("UEDA", budget, mu=mu, tau=float(rng.uniform(0, 1)))
    if algo == "DCMA":
        return SolverConfig(
            "DCMA",
            budget,
            mu=mu,
            sigma_init=float(10 ** rng.uniform(-4, 4)),
            alpha_margin=float((mu * n) ** -rng.uniform(0.5, 1.5)),
        )
    return SolverConfig(algo, budget)


@dataclass
class TuningResult:
    best_config: SolverConfig
    performance: float
    sd_all: float
    configs: list[SolverConfig] = field(repr=False)
    performances: np.ndarray = field(repr=False)

    def rows(self) -> list[dict]:
        return [
            {"config": i, "performance": float(p), **_config_fields(c)}
            for i, (c, p) in enumerate(zip(self.configs, self.performances))
        ]

    def summary(self) -> dict:
        return {"performance": self.performance, "sd_all": self.sd_all, **_config_fields(self.best_config)}


def _config_fields(config: SolverConfig) -> dict:
    obj = config.to_json()
    obj.pop("seed")
    return {k: ("" if v is None else v) for k, v in obj.items()}


def _area_cell(args) -> float:
    instance, config = args
    trace = run(instance, config)
    assert len(trace) <= config.budget
    return float(trace.cumulative_best.sum())


def tune(instance: QuboInstance, spec: TuningSpec, threads: int = 1, configs=None) -> TuningResult:
    """Random-search tuning: the configuration with the lowest median
    (over runs) sum of the cumulative-minimum curve wins.

    ``configs`` replaces the random sample with explicit candidates.
    """
    if configs is None:
        rng = np.random.default_rng(run_seed(spec.seed, 0))
        n_configs = 1 if spec.algorithm in ("RS", "GRS") else spec.n_configs
        configs = [sample_config(spec.algorithm, instance.n, rng, spec.budget_per_run) for _ in range(n_configs)]
    configs = [c.replace(budget=spec.budget_per_run) for c in configs]
    n_configs = len(configs)
    cells = [
        (instance, cfg.replace(seed=run_seed(spec.seed, 1, c, r)))
        for c, cfg in enumerate(configs)
        for r in range(spec.runs_per_config)
    ]
    areas = np.array(_map(_area_cell, cells, threads)).reshape(n_configs, spec.runs_per_config)
    perf = np.median(areas, axis=1)
    best = int(np.argmin(perf))
    sd_all = float(np.std(perf, ddof=1)) if n_configs > 1 else 0.0
    return TuningResult(configs[best], float(perf[best]), sd_all, configs, perf)


# ---------------------------------------------------------------------------
# validation


def gap_floor(h_min: float) -> float:
    """Optimum rounded down on the third decimal, so that log-scale gaps stay finite."""
    return math.floor(h_min * 1000.0) / 1000.0


@dataclass
class AlgorithmValidation:
    algorithm: str
    traces: list[SolverTrace] = field(repr=False)
    h_min: float
    ratio_window: int = 50

    @property
    def final_best(self) -> np.ndarray:
        return np.array([t.best_value for t in self.traces])

    def best_at(self, ofe: int) -> np.ndarray:
        return np.array([t.best_at(ofe) for t in self.traces])

    def hits(self, rtol: float = 1e-9) -> int:
        return int(np.sum(self.final_best <= self.h_min + rtol * max(1.0, abs(self.h_min))))

    def ratios(self, exact: ExactSolution) -> np.ndarray:
        """Mean approximation ratio of the last evaluations of each run."""
        return np.array([float(ratio_of_values(t.objective[-self.ratio_window :], exact).mean()) for t in self.traces])

    def gaps(self) -> np.ndarray:
        """runs x OFE matrix of best-so-far minus optimum, padded with the last value."""
        length = max(len(t) for t in self.traces)
        out = np.empty((len(self.traces), length))
        for i, t in enumerate(self.traces):
            best = t.cumulative_best
            out[i, : best.size] = best
            out[i, best.size :] = best[-1]
        return np.maximum(out - self.h_min, 0.0)

    def gap_curves(self, floor: bool = False) -> np.ndarray:
        """Columns ofe, p5, p50, p95 of the gap (measured from the rounded-down
        optimum when ``floor`` is set)."""
        gaps = self.gaps()
        if floor:
            gaps = gaps + (self.h_min - gap_floor(self.h_min))
        pct = np.percentile(gaps, [5, 50, 95], axis=0)
        return np.column_stack([np.arange(1, gaps.shape[1] + 1), pct.T])


@dataclass
class ValidationResult:
    exact: ExactSolution
    algorithms: dict[str, AlgorithmValidation]
    seed: int

    def summary_rows(self) -> list[dict]:
        rows = []
        for name, val in self.algorithms.items():
            b100, b5000, ar = val.best_at(100), val.final_best, val.ratios(self.exact)
            rows.append(
                {
                    "algorithm": name,
                    "runs": len(val.traces),
                    "hits": val.hits(),
                    "best_at_100_median": float(np.median(b100)),
                    "best_at_100_min": float(b100.min()),
                    "best_final_median": float(np.median(b5000)),
                    "best_final_max": float(b5000.max()),
                    "ar_last50_median": float(np.median(ar)),
                    "ar_last50_min": float(ar.min()),
                }
            )
        return rows

    def run_rows(self) -> list[dict]:
        rows = []
        for name, val in self.algorithms.items():
            ar = val.ratios(self.exact)
            for i, t in enumerate(val.traces):
                rows.append(
                    {
                        "algorithm": name,
                        "run": i,
                        "best_at_100": t.best_at(100),
                        "best_final": t.best_value,
                        "ar_last50": float(ar[i]),
                    }
                )
        return rows

    def curve_rows(self, floor: bool = True) -> list[dict]:
        rows = []
        for name, val in self.algorithms.items():
            for ofe, p5, p50, p95 in val.gap_curves(floor):
                rows.append({"algorithm": name, "ofe": int(ofe), "p5": p5, "p50": p50, "p95": p95})
        return rows


def _trace_cell(args) -> SolverTrace:
    instance, config = args
    trace = run(instance, config)
    assert len(trace) <= config.budget
    return trace


def validate(
    instance: QuboInstance,
    configs: dict[str, SolverConfig] | None = None,
    exact: ExactSolution | None = None,
    runs: int = 20,
    budget: int = 5000,
    seed: int = 0,
    threads: int = 1,
) -> ValidationResult:
    """Run every algorithm ``runs`` times with ``budget`` evaluations each.

    ``configs`` defaults to the tuned configurations; its budget and seed
    fields are overridden per run.
    """
    if exact is None:
        exact = exact_minmax(instance)
    if configs is None:
        configs = {a: tuned_config(a, instance.n) for a in ALGORITHMS}
    names = list(configs)
    cells = [
        (instance, configs[a].replace(budget=budget, seed=run_seed(seed, ALGORITHMS.index(configs[a].algorithm), r)))
        for a in names
        for r in range(runs)
    ]
    traces = _map(_trace_cell, cells, threads)
    result = {}
    for i, name in enumerate(names):
        result[name] = AlgorithmValidation(name, traces[i * runs : (i + 1) * runs], exact.h_min)
    return ValidationResult(exact, result, seed)


# ---------------------------------------------------------------------------
# reports


def _fmt(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.6g}")
    return value


def render(rows: list[dict], fmt: str = "csv") -> str:
    """Text of a report with floats rounded to 6 significant digits."""
    if not rows:
        raise ValueError("nothing to report")
    clean = [{k: _fmt(v) for k, v in r.items()} for r in rows]
    if fmt == "json":
        return json.dumps(clean, indent=2) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")
    buf = io.StringIO()
    columns = list(clean[0])
    for r in clean[1:]:
        columns += [k for k in r if k not in columns]
    writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    writer.writeheader()
    for r in clean:
        writer.writerow({k: (f"{v:.6g}" if isinstance(v, float) else v) for k, v in r.items()})
    return buf.getvalue()


def report(rows: list[dict], path, fmt: str | None = None) -> Path:
    path = Path(path)
    if fmt is None:
        fmt = "json" if path.suffix == ".json" else "csv"
    text = render(rows, fmt)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    return path


def credit_instances(seed: int = 0, phi: float = 0.9) -> tuple[QuboInstance, QuboInstance]:
    """Tuning and validation instances from the two halves of the credit data
    (correlation between features and against the target)."""
    from .dataio import SplitSpec, load_german_credit, split

    tup = DependencyTuple("Correl", "Correl")
    halves = split(load_german_credit(), SplitSpec(0.5, seed))
    return tuple(build(build_matrices(h, tup), phi, f"german-credit/{name}") for h, name in zip(halves, ("tune", "validate")))
