"""Evaluation machinery: stratified folds, grid search, SMOTE and metrics."""
from __future__ import annotations

import csv
import itertools
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .forest import ForestHyper, fit_forest


class StratificationError(ValueError):
    pass


class MetricError(ValueError):
    pass


def balanced_accuracy(y_true, y_pred, classes: Optional[Sequence] = None) -> float:
    """Unweighted mean of per-class recall over the classes of ``y_true``."""
    y_true = [str(v) for v in y_true]
    y_pred = [str(v) for v in y_pred]
    if len(y_true) != len(y_pred):
        raise MetricError("y_true and y_pred lengths differ")
    if not y_true:
        raise MetricError("balanced accuracy of an empty set is undefined")
    present = sorted(set(y_true))
    if classes is not None:
        missing = [c for c in map(str, classes) if c not in present]
        if missing:
            raise MetricError(f"classes {missing} absent from y_true; recall undefined")
        present = [str(c) for c in classes]
    t = np.array(y_true)
    p = np.array(y_pred)
    recalls = [float(np.mean(p[t == c] == c)) for c in present]
    return float(np.mean(recalls))


@dataclass
class ConfusionMatrix:
    classes: tuple
    counts: np.ndarray  # rows = true, cols = predicted

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["true\\pred", *self.classes])
            for c, row in zip(self.classes, self.counts):
                w.writerow([c, *(int(v) for v in row)])


def confusion(y_true, y_pred, classes: Sequence) -> ConfusionMatrix:
    classes = tuple(str(c) for c in classes)
    pos = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(y_true, y_pred):
        t, p = str(t), str(p)
        if t not in pos or p not in pos:
            raise ValueError(f"label {t if t not in pos else p!r} not in {classes}")
        counts[pos[t], pos[p]] += 1
    return ConfusionMatrix(classes, counts)


def stratified_kfold(y, k: int, seed: int = 0) -> np.ndarray:
    """Fold index of every example.

    Each class is shuffled with the seeded generator and dealt round-robin;
    the dealing position carries over from one class to the next so fold
    sizes stay within one of each other too.
    """
    y = np.array([str(v) for v in y])
    if k < 1:
        raise StratificationError("k must be >= 1")
    folds = np.zeros(y.shape[0], dtype=np.int64)
    if k == 1:
        return folds
    classes, counts = np.unique(y, return_counts=True)
    small = [str(c) for c, n in zip(classes, counts) if n < k]
    if small:
        raise StratificationError(f"classes with fewer than {k} members: {small}")
    rng = np.random.default_rng(seed)
    offset = 0
    for c in classes:
        members = np.flatnonzero(y == c)
        members = members[rng.permutation(members.shape[0])]
        folds[members] = (offset + np.arange(members.shape[0])) % k
        offset = (offset + members.shape[0]) % k
    return folds


def stratified_split(y, test_fraction: float = 0.2, seed: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Holdout split with per-class proportions (4:1 by default)."""
    if not 0.0 < test_fraction < 1.0:
        raise ValueError("test_fraction must lie in (0, 1)")
    y = np.array([str(v) for v in y])
    rng = np.random.default_rng(seed)
    test = np.zeros(y.shape[0], dtype=bool)
    for c in np.unique(y):
        members = np.flatnonzero(y == c)
        members = members[rng.permutation(members.shape[0])]
        n_test = int(round(test_fraction * members.shape[0]))
        test[members[:n_test]] = True
    return np.flatnonzero(~test), np.flatnonzero(test)


def smote(X, y, minority_class, k: int = 5, n_synthetic: int = 0, seed: int = 0):
    """Append ``n_synthetic`` interpolated minority rows after the original data."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    if k < 1:
        raise ValueError("k must be >= 1")
    if n_synthetic < 0:
        raise ValueError("n_synthetic must be >= 0")
    if n_synthetic == 0:
        return X.copy(), y.copy()
    minority = X[y == minority_class]
    if minority.shape[0] < 2:
        raise ValueError("SMOTE needs at least 2 minority rows")
    m = minority.shape[0]
    kk = min(k, m - 1)
    diff = minority[:, None, :] - minority[None, :, :]
    dist = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    np.fill_diagonal(dist, np.inf)
    neighbours = np.argsort(dist, axis=1, kind="stable")[:, :kk]
    rng = np.random.default_rng(seed)
    out = np.empty((n_synthetic, X.shape[1]))
    for s in range(n_synthetic):
        i = rng.integers(m)
        j = neighbours[i, rng.integers(kk)]
        u = rng.random()
        out[s] = minority[i] + u * (minority[j] - minority[i])
    y_new = np.concatenate([y, np.full(n_synthetic, minority_class, dtype=y.dtype)])
    return np.vstack([X, out]), y_new


def balance_with_smote(X, y, k: int = 5, seed: int = 0):
    """Oversample every smaller class up to the largest class count."""
    y = np.asarray(y)
    classes, counts = np.unique(y, return_counts=True)
    top = counts.max()
    for i, (c, n) in enumerate(zip(classes, counts)):
        if n < top:
            X, y = smote(X, y, c, k, int(top - n), seed + i)
    return X, y


@dataclass
class CVReport:
    fold_scores: list
    mean: float
    std: float
    best_params: dict
    surface: list = field(default_factory=list)  # dicts with params, mean_score, std_score

    def write_surface_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["n_estimators", "min_samples_split", "max_depth", "mean_score", "std_score"])
            for cell in self.surface:
                depth = cell["max_depth"]
                w.writerow([cell["n_estimators"], cell["min_samples_split"],
                            "none" if depth is None else depth,
                            repr(cell["mean_score"]), repr(cell["std_score"])])


def _cost_key(cell):
    depth = cell["max_depth"]
    return (-cell["mean_score"], cell["n_estimators"], float("inf") if depth is None else depth)


def grid_search(X, y, grid: dict, k: int = 10, seed: int = 0, *, smote_k: Optional[int] = None) -> CVReport:
    """Exhaustive stratified k-fold search over forest hyperparameters.

    ``grid`` maps ``n_estimators``, ``min_samples_split`` and ``max_depth``
    to candidate lists.  The best cell maximises mean balanced accuracy;
    ties go to fewer trees, then the shallower depth, then grid order.
    ``smote_k`` balances each training fold with SMOTE when given.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.array([str(v) for v in y])
    axes = [list(grid.get("n_estimators", [100])), list(grid.get("min_samples_split", [2])),
            list(grid.get("max_depth", [None]))]
    if any(len(a) == 0 for a in axes):
        raise ValueError("every grid axis needs at least one value")
    folds = stratified_kfold(y, k, seed)
    surface = []
    for n_est, min_split, depth in itertools.product(*axes):
        hyper = ForestHyper(int(n_est), int(min_split), None if depth is None else int(depth))
        scores = []
        for f in range(k):
            test = folds == f
            train = ~test if k > 1 else test
            Xt, yt = X[train], y[train]
            if smote_k is not None:
                Xt, yt = balance_with_smote(Xt, yt, smote_k, seed + f)
            model = fit_forest(Xt, yt, hyper, seed=seed * 1000 + f)
            pred, _ = model.predict_batch(X[test])
            scores.append(balanced_accuracy(y[test], pred))
        surface.append({"n_estimators": hyper.n_estimators, "min_samples_split": hyper.min_samples_split,
                        "max_depth": hyper.max_depth, "mean_score": float(np.mean(scores)),
                        "std_score": float(np.std(scores)), "fold_scores": scores})
    best = min(surface, key=_cost_key)
    params = {key: best[key] for key in ("n_estimators", "min_samples_split", "max_depth")}
    return CVReport(list(best["fold_scores"]), best["mean_score"], best["std_score"], params, surface)
