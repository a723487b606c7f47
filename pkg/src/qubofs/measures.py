"""Dependency measures between feature columns and against the binary target.

Inter-feature dependence is restricted to correlation and mutual information;
feature-to-target dependence may use any of the four measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import rankdata

from .dataio import Dataset

FEATURE_MEASURES = ("Correl", "MI")
TARGET_MEASURES = ("Correl", "MI", "ROC", "Anova")


class MeasureError(ValueError):
    pass


@dataclass(frozen=True)
class DependencyTuple:
    feature_measure: str = "Correl"
    target_measure: str = "Correl"

    def __post_init__(self):
        fm = _canonical(self.feature_measure)
        tm = _canonical(self.target_measure)
        if fm not in FEATURE_MEASURES:
            raise MeasureError(
                f"inter-feature measure must be one of {FEATURE_MEASURES}, got {self.feature_measure!r}"
            )
        if tm not in TARGET_MEASURES:
            raise MeasureError(
                f"target measure must be one of {TARGET_MEASURES}, got {self.target_measure!r}"
            )
        object.__setattr__(self, "feature_measure", fm)
        object.__setattr__(self, "target_measure", tm)

    @classmethod
    def parse(cls, text: str) -> "DependencyTuple":
        """Parse ``"Correl,ROC"`` style strings."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 2:
            raise MeasureError(f"expected '<feature>,<target>', got {text!r}")
        return cls(*parts)

    def __str__(self):
        return f"{self.feature_measure},{self.target_measure}"


def all_tuples() -> list[DependencyTuple]:
    return [DependencyTuple(f, t) for f in FEATURE_MEASURES for t in TARGET_MEASURES]


def _canonical(name: str) -> str:
    lookup = {m.lower(): m for m in TARGET_MEASURES}
    lookup["corr"] = "Correl"
    lookup["correlation"] = "Correl"
    return lookup.get(str(name).strip().lower(), str(name))


@dataclass(frozen=True)
class DependencyMatrices:
    """Absolute dependencies: ``inter_feature`` is n x n with a zero diagonal,
    ``to_target`` has length n."""

    inter_feature: np.ndarray
    to_target: np.ndarray
    tuple: DependencyTuple

    @property
    def n(self) -> int:
        return self.to_target.shape[0]

    def to_json(self) -> dict:
        return {
            "tuple": str(self.tuple),
            "inter_feature": self.inter_feature.tolist(),
            "to_target": self.to_target.tolist(),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "DependencyMatrices":
        return cls(
            np.asarray(obj["inter_feature"], dtype=float),
            np.asarray(obj["to_target"], dtype=float),
            DependencyTuple.parse(obj["tuple"]),
        )


def _pair(x, y) -> tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise MeasureError("inputs must have equal length")
    return x, y


def _binary_classes(y: np.ndarray) -> np.ndarray:
    if not np.all((y == 0) | (y == 1)):
        raise MeasureError("target must be binary")
    mask = y == 1
    if mask.all() or not mask.any():
        raise MeasureError("target must contain both classes")
    return mask


def pearson(x, y) -> float:
    x, y = _pair(x, y)
    if x.size < 2:
        raise MeasureError("at least two observations are required")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = dx @ dx
    syy = dy @ dy
    if sxx == 0.0 or syy == 0.0:
        raise MeasureError("zero variance")
    r = (dx @ dy) / np.sqrt(sxx * syy)
    return float(np.clip(r, -1.0, 1.0))


def discretize(x, bins: int = 10) -> np.ndarray:
    """Integer codes for ``x``.

    Variables with at most two distinct values keep their categories; others
    are cut at the empirical quantiles into (at most) ``bins`` groups. Values
    equal to a cut point go to the upper group.
    """
    x = np.asarray(x, dtype=np.float64).ravel()
    uniq, codes = np.unique(x, return_inverse=True)
    if uniq.size <= 2:
        return codes
    cuts = np.unique(np.quantile(x, np.linspace(0.0, 1.0, bins + 1)[1:-1]))
    return np.searchsorted(cuts, x, side="right")


def mutual_information(x, y, bins: int = 10) -> float:
    """Plug-in mutual information in nats from the joint histogram of the codes."""
    if bins < 2:
        raise MeasureError("bins must be at least 2")
    x, y = _pair(x, y)
    if x.size == 0:
        raise MeasureError("empty input")
    cx = discretize(x, bins)
    cy = discretize(y, bins)
    joint = np.zeros((cx.max() + 1, cy.max() + 1))
    np.add.at(joint, (cx, cy), 1.0)
    joint /= x.size
    px = joint.sum(axis=1, keepdims=True)
    py = joint.sum(axis=0, keepdims=True)
    nz = joint > 0
    mi = np.sum(joint[nz] * np.log(joint[nz] / (px @ py)[nz]))
    return float(max(mi, 0.0))


def mann_whitney_u(x, y) -> float:
    """U statistic of the positives with midranks for ties."""
    x, y = _pair(x, y)
    pos = _binary_classes(y)
    ranks = rankdata(x, method="average")
    n1 = pos.sum()
    return float(ranks[pos].sum() - n1 * (n1 + 1) / 2.0)


def univariate_roc(x, y) -> float:
    """AUROC of ``x`` as a score for the binary ``y``; ties count one half."""
    x, y = _pair(x, y)
    pos = _binary_classes(y)
    n1 = int(pos.sum())
    n0 = pos.size - n1
    return mann_whitney_u(x, y) / (n1 * n0)


def anova_f(x, y) -> float:
    """One-way F statistic for the two groups defined by ``y``, df = (1, m - 2)."""
    x, y = _pair(x, y)
    pos = _binary_classes(y)
    g1, g0 = x[pos], x[~pos]
    if g1.size < 2 or g0.size < 2:
        raise MeasureError("degenerate groups: each class needs at least two members")
    grand = x.mean()
    ssb = g1.size * (g1.mean() - grand) ** 2 + g0.size * (g0.mean() - grand) ** 2
    ssw = ((g1 - g1.mean()) ** 2).sum() + ((g0 - g0.mean()) ** 2).sum()
    if ssw <= 0.0:
        raise MeasureError("degenerate groups: zero within-group variance")
    return float(ssb / (ssw / (x.size - 2)))


def dependency(name: str, x, y, bins: int = 10) -> float:
    """Absolute dependency between ``x`` and ``y`` under measure ``name``."""
    name = _canonical(name)
    if name == "Correl":
        value = pearson(x, y)
    elif name == "MI":
        value = mutual_information(x, y, bins)
    elif name == "ROC":
        value = univariate_roc(x, y)
    elif name == "Anova":
        value = anova_f(x, y)
    else:
        raise MeasureError(f"unknown measure {name!r}")
    return abs(value)


def build_matrices(
    dataset: Dataset, tuple: DependencyTuple, bins: int = 10
) -> DependencyMatrices:
    x = dataset.features
    y = dataset.target.astype(np.float64)
    n = dataset.n_features
    inter = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            inter[i, j] = inter[j, i] = dependency(tuple.feature_measure, x[:, i], x[:, j], bins)
    to_target = np.array([dependency(tuple.target_measure, x[:, i], y, bins) for i in range(n)])
    return DependencyMatrices(inter, to_target, tuple)
