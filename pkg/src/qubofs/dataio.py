"""Tabular dataset loading, standardization and row splits."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

_MISSING = {"", "na", "nan", "null", "none", "?"}


class DataError(ValueError):
    """Raised when a dataset cannot be parsed or violates its invariants."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix with a binary target.

    ``features`` is ``(n_rows, n_features)`` float64, ``target`` holds 0/1.
    Both arrays are made read-only on construction.
    """

    features: np.ndarray
    target: np.ndarray
    names: tuple[str, ...]
    dropped_rows: int = 0
    dropped_columns: tuple[str, ...] = ()
    standardized: bool = False
    label: str = ""

    def __post_init__(self):
        x = np.array(self.features, dtype=np.float64)
        y = np.asarray(self.target)
        if x.ndim != 2:
            raise DataError("features must be a 2-D matrix")
        if y.shape != (x.shape[0],):
            raise DataError("target length does not match the number of rows")
        if len(self.names) != x.shape[1]:
            raise DataError("one name per feature column is required")
        if x.shape[0] < 2:
            raise DataError("fewer than 2 usable rows")
        if x.shape[1] < 1:
            raise DataError("no feature columns")
        if not np.all(np.isfinite(x)):
            raise DataError("features contain missing or non-finite values")
        if not np.all((y == 0) | (y == 1)):
            raise DataError("non-binary target")
        y = y.astype(np.int8)
        if y.min() == y.max():
            raise DataError("target must contain both classes")
        constant = np.ptp(x, axis=0) == 0
        if constant.any():
            bad = [n for n, c in zip(self.names, constant) if c]
            raise DataError(f"constant feature column(s): {bad}")
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "target", y)
        object.__setattr__(self, "names", tuple(self.names))

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def column(self, name: str) -> np.ndarray:
        return self.features[:, self.names.index(name)]

    def subset(self, rows) -> "Dataset":
        """Dataset restricted to ``rows`` (indices or boolean mask)."""
        return replace(
            self, features=self.features[rows], target=self.target[rows], dropped_rows=0
        )

    def summary(self) -> dict:
        positives = int(self.target.sum())
        return {
            "label": self.label,
            "n": self.n_features,
            "m": self.n_rows,
            "names": list(self.names),
            "positives": positives,
            "negatives": self.n_rows - positives,
            "dropped_rows": self.dropped_rows,
            "dropped_columns": list(self.dropped_columns),
            "standardized": self.standardized,
        }


@dataclass(frozen=True)
class SplitSpec:
    fraction: float = 0.5
    seed: int = 0
    mode: str = "row-split"
    max_redraws: int = field(default=100, repr=False)

    def __post_init__(self):
        if not 0.0 < self.fraction < 1.0:
            raise ValueError("fraction must lie in (0, 1)")
        if self.mode != "row-split":
            raise ValueError(f"unsupported split mode {self.mode!r}")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")


def standardize(dataset: Dataset) -> Dataset:
    """Zero mean, unit population variance per column."""
    x = dataset.features
    mean = x.mean(axis=0)
    std = x.std(axis=0)
    return replace(dataset, features=(x - mean) / std, standardized=True)


_standardize = standardize


def _parse_float(text: str) -> float | None:
    text = text.strip()
    if text.lower() in _MISSING:
        return None
    return float(text)


def load_csv(
    path,
    target_column: str,
    standardize: bool = False,
    drop_constant: bool = False,
) -> Dataset:
    """Read a comma-separated file with a header row.

    Rows with any missing field are dropped. Constant feature columns raise
    unless ``drop_constant`` is set, in which case they are removed with a
    warning.
    """
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            raw_rows = [row for row in reader if row and any(c.strip() for c in row)]
    except StopIteration:
        raise DataError(f"{path}: empty file") from None
    except OSError as exc:
        raise DataError(f"{path}: {exc}") from exc
    if target_column not in header:
        raise DataError(f"target column {target_column!r} not found")
    t_idx = header.index(target_column)
    f_idx = [i for i in range(len(header)) if i != t_idx]

    rows, targets, dropped = [], [], 0
    for lineno, row in enumerate(raw_rows, start=2):
        if len(row) != len(header):
            raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        try:
            values = [_parse_float(row[i]) for i in f_idx]
            t = _parse_float(row[t_idx])
        except ValueError as exc:
            raise DataError(f"{path}:{lineno}: parse failure ({exc})") from exc
        if t is None or any(v is None for v in values):
            dropped += 1
            continue
        if t not in (0.0, 1.0):
            raise DataError("non-binary target")
        rows.append(values)
        targets.append(int(t))
    if dropped:
        logger.info("dropped %d row(s) with missing values from %s", dropped, path)
    if len(rows) < 2:
        raise DataError("fewer than 2 usable rows")

    x = np.array(rows, dtype=np.float64)
    names = [header[i] for i in f_idx]
    constant = np.ptp(x, axis=0) == 0
    dropped_cols: tuple[str, ...] = ()
    if constant.any():
        dropped_cols = tuple(n for n, c in zip(names, constant) if c)
        if not drop_constant:
            raise DataError(f"constant feature column(s): {list(dropped_cols)}")
        logger.warning("dropping constant column(s) %s", list(dropped_cols))
        x = x[:, ~constant]
        names = [n for n, c in zip(names, constant) if not c]

    ds = Dataset(
        x,
        np.array(targets, dtype=np.int8),
        tuple(names),
        dropped_rows=dropped,
        dropped_columns=dropped_cols,
        label=path.stem,
    )
    if standardize:
        ds = _standardize(ds)
    return ds


def write_csv(dataset: Dataset, path, target_column: str = "target") -> None:
    """Write ``dataset`` so that :func:`load_csv` reproduces it bit for bit."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([*dataset.names, target_column])
        for row, t in zip(dataset.features, dataset.target):
            writer.writerow([repr(float(v)) for v in row] + [int(t)])


def _part_ok(ds_x: np.ndarray, ds_y: np.ndarray) -> bool:
    return (
        len(ds_y) >= 2
        and 0 < ds_y.sum() < len(ds_y)
        and not np.any(np.ptp(ds_x, axis=0) == 0)
    )


def split(dataset: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset]:
    """Random row partition into two parts of sizes ``round(fraction*m)`` and the rest.

    A draw is rejected when either part has fewer than 2 rows, misses a
    class, or has a constant column; up to ``spec.max_redraws`` draws are tried.
    Rows keep their original order inside each part.
    """
    m = dataset.n_rows
    k = int(round(spec.fraction * m))
    rng = np.random.default_rng(int(spec.seed))
    x, y = dataset.features, dataset.target
    for _ in range(spec.max_redraws):
        perm = rng.permutation(m)
        a, b = np.sort(perm[:k]), np.sort(perm[k:])
        if _part_ok(x[a], y[a]) and _part_ok(x[b], y[b]):
            return dataset.subset(a), dataset.subset(b)
    raise DataError(
        f"could not draw a split with both classes in each part after {spec.max_redraws} redraws"
    )


# ---------------------------------------------------------------------------
# bundled data


def load_breast_cancer(standardize: bool = False) -> Dataset:
    """Wisconsin diagnostic breast cancer data, 10 mean features, 569 rows.

    Target is 1 for malignant.
    """
    ref = resources.files("qubofs.data").joinpath("wdbc_mean.csv")
    with resources.as_file(ref) as p:
        ds = load_csv(p, "malignant", standardize=standardize)
    return replace(ds, label="wdbc")


_GERMAN_NUMERIC = {
    1: "duration",
    4: "credit_amount",
    7: "installment_rate",
    10: "residence_since",
    12: "age",
    15: "existing_credits",
    17: "dependents",
}
# (column index, level code, name); the omitted level of each attribute is the baseline
_GERMAN_INDICATORS = [
    (0, "A11", "checking_negative"),
    (0, "A12", "checking_low"),
    (0, "A13", "checking_high"),
    (2, "A30", "history_no_credits"),
    (2, "A31", "history_paid_this_bank"),
    (2, "A32", "history_paid_till_now"),
    (2, "A33", "history_delayed"),
    (5, "A61", "savings_lt100"),
    (5, "A62", "savings_100_500"),
    (5, "A63", "savings_500_1000"),
    (5, "A64", "savings_ge1000"),
    (6, "A72", "employed_lt1"),
    (6, "A73", "employed_1_4"),
    (6, "A74", "employed_4_7"),
    (6, "A75", "employed_ge7"),
    (14, "A151", "housing_rent"),
    (14, "A152", "housing_own"),
    (18, "A192", "telephone"),
    (19, "A201", "foreign_worker"),
    (13, "A143", "no_other_installments"),
]


def load_german_credit(standardize: bool = False) -> Dataset:
    """UCI Statlog German credit data encoded as 27 numeric features.

    Seven numeric attributes plus 20 indicator columns (drop-one encoding of
    checking status, credit history, savings, employment and housing, and
    single indicators for telephone, foreign worker and no other installment
    plans). Target is 1 for bad credit. 1000 rows.
    """
    ref = resources.files("qubofs.data").joinpath("german.data")
    records = [line.split() for line in ref.read_text().splitlines() if line.strip()]
    cols = []
    names = []
    for idx, name in _GERMAN_NUMERIC.items():
        cols.append([float(r[idx]) for r in records])
        names.append(name)
    for idx, code, name in _GERMAN_INDICATORS:
        cols.append([1.0 if r[idx] == code else 0.0 for r in records])
        names.append(name)
    y = np.array([1 if r[20] == "2" else 0 for r in records], dtype=np.int8)
    ds = Dataset(np.array(cols).T, y, tuple(names), label="german_credit")
    return _standardize(ds) if standardize else ds


def make_lending_standin(n_rows: int = 1000, seed: int = 20230601) -> Dataset:
    """Synthetic 8-feature credit-style dataset with a planted logistic target.

    Stand-in for a lending data subset that is not publicly available:
    correlated Gaussian features, a weak signal on a few of them and a
    positive rate around 17%.
    """
    rng = np.random.default_rng(seed)
    n = 8
    mixing = rng.normal(size=(n, n)) * 0.35 + np.eye(n)
    x = rng.normal(size=(n_rows, n)) @ mixing.T
    weights = np.array([0.55, -0.45, 0.30, 0.0, 0.20, 0.0, -0.15, 0.05])
    logits = -1.8 + x @ weights
    y = (rng.random(n_rows) < 1.0 / (1.0 + np.exp(-logits))).astype(np.int8)
    names = (
        "loan_amnt",
        "int_rate",
        "annual_inc",
        "emp_length",
        "dti",
        "open_acc",
        "revol_util",
        "total_acc",
    )
    return Dataset(x, y, names, label="lending_standin")


def make_planted(
    n_rows: int,
    n_features: int,
    informative: dict[int, float],
    intercept: float = 0.0,
    seed: int = 0,
    correlation: float = 0.0,
) -> Dataset:
    """Gaussian features with a logistic target driven by ``informative`` weights."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n_rows, n_features))
    if correlation:
        x = x + correlation * rng.normal(size=(n_rows, 1))
    w = np.zeros(n_features)
    for j, v in informative.items():
        w[j] = v
    p = 1.0 / (1.0 + np.exp(-(intercept + x @ w)))
    y = (rng.random(n_rows) < p).astype(np.int8)
    names = tuple(f"x{j}" for j in range(n_features))
    return Dataset(x, y, names, label="planted")

