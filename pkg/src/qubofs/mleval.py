"""Logistic-regression benchmark for feature subsets and the classical
selection baselines (exhaustive search, recursive elimination, LASSO).

Models are trained and scored on the full dataset they are given.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .dataio import Dataset
from .measures import univariate_roc

WEIGHT_CAP = 30.0
RIDGE_JITTER = 1e-8


class FitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class LogisticModel:
    """``weights`` act on the original feature scale, intercept last."""

    weights: np.ndarray
    feature_subset: np.ndarray
    standardized_weights: np.ndarray = field(repr=False)
    converged: bool = True
    iterations: int = 0
    loglik_history: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.weights.size != int(self.feature_subset.sum()) + 1:
            raise ValueError("weight count must be subset popcount + 1")
        if not np.all(np.isfinite(self.weights)):
            raise ValueError("non-finite weights")

    def decision(self, dataset: Dataset) -> np.ndarray:
        if dataset.n_features != self.feature_subset.size:
            raise ValueError("model and dataset disagree on the number of features")
        x = dataset.features[:, self.feature_subset.astype(bool)]
        return x @ self.weights[:-1] + self.weights[-1]

    def predict_proba(self, dataset: Dataset) -> np.ndarray:
        return expit(self.decision(dataset))


@dataclass(frozen=True)
class ModelScore:
    auroc: float
    accuracy: float
    n_selected: int

    def to_json(self) -> dict:
        return {"auroc": self.auroc, "accuracy": self.accuracy, "n_features": self.n_selected}


def _subset_mask(subset, n: int) -> np.ndarray:
    if subset is None:
        return np.ones(n, dtype=np.int8)
    if isinstance(subset, str):
        text = subset[2:] if subset.startswith("0b") else subset
        subset = [int(c) for c in text]
    mask = np.asarray(subset, dtype=np.int8).ravel()
    if mask.size != n or not np.all((mask == 0) | (mask == 1)):
        raise ValueError(f"subset must be a bit-string of length {n}")
    return mask


def _loglik(eta: np.ndarray, y: np.ndarray) -> float:
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def _standardize(x: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    mean = x.mean(axis=0)
    sd = x.std(axis=0)
    sd[sd == 0] = 1.0
    return (x - mean) / sd, mean, sd


def _to_original(w_std: np.ndarray, mean: np.ndarray, sd: np.ndarray) -> np.ndarray:
    w = w_std[:-1] / sd
    return np.append(w, w_std[-1] - np.sum(w * mean))


def _irls(xs: np.ndarray, y: np.ndarray, max_iter: int, tol: float):
    m, k = xs.shape
    design = np.column_stack([xs, np.ones(m)])
    beta = np.zeros(k + 1)
    ybar = y.mean()
    beta[-1] = np.log(ybar / (1 - ybar))
    eta = design @ beta
    ll = _loglik(eta, y)
    history = [ll]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        p = expit(eta)
        grad = design.T @ (y - p)
        if np.max(np.abs(grad)) / m < tol:
            converged = True
            it -= 1
            break
        hess = design.T @ (design * (p * (1 - p))[:, None])
        try:
            if np.linalg.cond(hess) > 1e12:
                raise np.linalg.LinAlgError
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            warnings.warn("singular normal equations; adding ridge jitter", FitWarning, stacklevel=3)
            step = np.linalg.solve(hess + RIDGE_JITTER * np.eye(k + 1), grad)
        t = 1.0
        while True:
            cand = beta + t * step
            cand_eta = design @ cand
            cand_ll = _loglik(cand_eta, y)
            if cand_ll >= ll or t < 1e-10:
                break
            t *= 0.5
        if cand_ll < ll:
            converged = True
            break
        beta, eta, ll = cand, cand_eta, cand_ll
        history.append(ll)
        norm = np.linalg.norm(beta[:-1])
        if norm > WEIGHT_CAP:
            warnings.warn("weights diverge (separable data); capping the weight norm", FitWarning, stacklevel=3)
            beta[:-1] *= WEIGHT_CAP / norm
            eta = design @ beta
            ll = _loglik(eta, y)
            history.append(ll)
            break
    return beta, converged, it, tuple(history)


def fit_logistic(
    dataset: Dataset, subset=None, max_iter: int = 100, tol: float = 1e-10, allow_empty: bool = False
) -> LogisticModel:
    """Maximum-likelihood logistic regression by Newton/IRLS with step halving.

    Features are standardized internally; the returned weights are mapped
    back to the original scale.
    """
    mask = _subset_mask(subset, dataset.n_features)
    if mask.sum() == 0 and not allow_empty:
        raise ValueError("empty feature subset (pass allow_empty=True for an intercept-only model)")
    y = dataset.target.astype(np.float64)
    xs, mean, sd = _standardize(dataset.features[:, mask.astype(bool)])
    beta, converged, iterations, history = _irls(xs, y, max_iter, tol)
    return LogisticModel(_to_original(beta, mean, sd), mask, beta, converged, iterations, history)


def score(model: LogisticModel, dataset: Dataset) -> ModelScore:
    """AUROC of the predicted probabilities and accuracy at threshold 0.5."""
    y = dataset.target
    if y.min() == y.max():
        raise ValueError("scoring needs both classes in the dataset")
    prob = model.predict_proba(dataset)
    auroc = univariate_roc(prob, y)
    accuracy = float(np.mean((prob > 0.5) == (y == 1)))
    return ModelScore(float(auroc), accuracy, int(model.feature_subset.sum()))


def evaluate_subset(dataset: Dataset, subset) -> ModelScore:
    return score(fit_logistic(dataset, subset), dataset)


# ---------------------------------------------------------------------------
# baselines


@dataclass
class SubsetSearch:
    bits: np.ndarray
    score: ModelScore
    table: dict[str, float] = field(default_factory=dict, repr=False)

    def __iter__(self):
        yield self.bits
        yield self.score


def _bit_key(bits: np.ndarray) -> str:
    return "".join(map(str, bits.tolist()))


def brute_force_subset(dataset: Dataset, max_n: int = 20) -> SubsetSearch:
    """Fit every non-empty subset; best AUROC wins, ties go to fewer
    features and then to the lexicographically smaller bit-string."""
    n = dataset.n_features
    if n > max_n:
        raise ValueError(f"brute force over {n} features exceeds max_n={max_n}")
    table = {}
    best_key, best = None, None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FitWarning)
        for k in range(1, 1 << n):
            bits = np.array([(k >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.int8)
            s = evaluate_subset(dataset, bits)
            text = _bit_key(bits)
            table[text] = s.auroc
            key = (-s.auroc, s.n_selected, text)
            if best_key is None or key < best_key:
                best_key, best = key, (bits, s)
    return SubsetSearch(best[0], best[1], table)


@dataclass
class RfeResult:
    path: list[np.ndarray]
    scores: list[ModelScore]
    best_index: int

    @property
    def bits(self) -> np.ndarray:
        return self.path[self.best_index]

    @property
    def score(self) -> ModelScore:
        return self.scores[self.best_index]


def rfe(dataset: Dataset) -> RfeResult:
    """Drop the feature with the smallest absolute standardized coefficient,
    one at a time, down to a single feature. Ties in AUROC favour the later
    (smaller) step."""
    n = dataset.n_features
    if n < 2:
        raise ValueError("recursive elimination needs at least two features")
    mask = np.ones(n, dtype=np.int8)
    path, scores = [], []
    while True:
        model = fit_logistic(dataset, mask)
        path.append(mask.copy())
        scores.append(score(model, dataset))
        if mask.sum() == 1:
            break
        active = np.flatnonzero(mask)
        weakest = active[int(np.argmin(np.abs(model.standardized_weights[:-1])))]
        mask[weakest] = 0
    aurocs = np.array([s.auroc for s in scores])
    best = int(np.flatnonzero(aurocs == aurocs.max())[-1])
    return RfeResult(path, scores, best)


def default_alphas() -> np.ndarray:
    return np.logspace(-4, 1, 30)


def _l1_fit(xs: np.ndarray, y: np.ndarray, alpha: float, start=None, max_iter: int = 5000, tol: float = 1e-9):
    """Minimize mean log-loss + alpha * |w|_1 (intercept unpenalized) by FISTA."""
    m, k = xs.shape
    design = np.column_stack([xs, np.ones(m)])
    lipschitz = np.linalg.norm(design, 2) ** 2 / (4.0 * m)
    step = 1.0 / lipschitz
    beta = np.zeros(k + 1) if start is None else start.copy()
    v = beta.copy()
    t = 1.0
    for _ in range(max_iter):
        grad = design.T @ (expit(design @ v) - y) / m
        nxt = v - step * grad
        nxt[:-1] = np.sign(nxt[:-1]) * np.maximum(np.abs(nxt[:-1]) - step * alpha, 0.0)
        t_next = (1 + np.sqrt(1 + 4 * t * t)) / 2
        v = nxt + ((t - 1) / t_next) * (nxt - beta)
        done = np.max(np.abs(nxt - beta)) < tol
        beta, t = nxt, t_next
        if done:
            break
    return beta


def lasso_fit(dataset: Dataset, alpha: float, max_iter: int = 5000) -> np.ndarray:
    """L1-penalized weights on the original scale (intercept last)."""
    xs, mean, sd = _standardize(dataset.features)
    beta = _l1_fit(xs, dataset.target.astype(np.float64), alpha, max_iter=max_iter)
    return _to_original(beta, mean, sd)


def _stratified_folds(y: np.ndarray, folds: int, rng) -> np.ndarray:
    fold = np.empty(y.size, dtype=np.int64)
    for cls in (0, 1):
        idx = rng.permutation(np.flatnonzero(y == cls))
        fold[idx] = np.arange(idx.size) % folds
    return fold


@dataclass
class LassoResult:
    bits: np.ndarray
    score: ModelScore
    alpha: float
    alphas: np.ndarray = field(repr=False)
    cv_auroc: np.ndarray = field(repr=False)

    def __iter__(self):
        yield self.bits
        yield self.score
        yield self.alpha


def lasso_path(dataset: Dataset, alphas=None, cv_folds: int = 5, seed=0) -> LassoResult:
    """Pick alpha by mean validation AUROC over stratified folds, select the
    features with non-zero weights at that alpha, refit without penalty."""
    if cv_folds < 2:
        raise ValueError("need at least two folds")
    alphas = np.sort(np.asarray(default_alphas() if alphas is None else alphas, dtype=np.float64))[::-1]
    y = dataset.target.astype(np.float64)
    fold = _stratified_folds(dataset.target, cv_folds, np.random.default_rng(seed))
    cv = np.zeros(alphas.size)
    for f in range(cv_folds):
        train, valid = fold != f, fold == f
        xs, mean, sd = _standardize(dataset.features[train])
        xv = (dataset.features[valid] - mean) / sd
        beta = None
        for a, alpha in enumerate(alphas):
            beta = _l1_fit(xs, y[train], alpha, start=beta)
            cv[a] += univariate_roc(xv @ beta[:-1] + beta[-1], y[valid]) / cv_folds
    # largest alpha among the best, i.e. the sparsest model
    best = int(np.flatnonzero(cv == cv.max())[0])
    xs, _, _ = _standardize(dataset.features)
    beta = None
    for alpha in alphas[: best + 1]:
        beta = _l1_fit(xs, y, alpha, start=beta)
    bits = (beta[:-1] != 0).astype(np.int8)
    if bits.sum() == 0:
        warnings.warn("LASSO removed every feature; returning the intercept-only model", FitWarning, stacklevel=2)
        model = fit_logistic(dataset, bits, allow_empty=True)
        prob = model.predict_proba(dataset)
        s = ModelScore(float(univariate_roc(prob, dataset.target)), float(np.mean((prob > 0.5) == (dataset.target == 1))), 0)
    else:
        s = evaluate_subset(dataset, bits)
    return LassoResult(bits, s, float(alphas[best]), alphas, cv)
