"""CART trees and random forests with Gini importance.

Class labels are stored as strings.  Trees are grown by the compiled
kernel in :mod:`pvrelay.kernels`; the per-node feature subsets come from a
pre-drawn uniform key matrix so the numba and numpy builders produce the
same tree for the same seed.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels

FOREST_MAGIC = "pvrelay-forest 1"


class ModelFormatError(ValueError):
    """A serialized model could not be parsed."""


def gini(class_counts) -> float:
    counts = np.asarray(class_counts, dtype=np.float64)
    if counts.ndim != 1 or np.any(counts < 0):
        raise ValueError("class counts must be a 1-D non-negative sequence")
    total = counts.sum()
    if total <= 0:
        raise ValueError("gini of an empty node is undefined")
    acc = 0.0
    for c in counts:
        p = c / total
        acc += p * p
    return 1.0 - acc


@dataclass(frozen=True)
class ForestHyper:
    n_estimators: int = 100
    min_samples_split: int = 2
    max_depth: Optional[int] = None
    features_per_split: Optional[int] = None  # None -> ceil(sqrt(d))

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0 or None")
        if self.features_per_split is not None and self.features_per_split < 1:
            raise ValueError("features_per_split must be >= 1")

    def k_features(self, d: int) -> int:
        if self.features_per_split is None:
            return max(1, math.ceil(math.sqrt(d)))
        return min(self.features_per_split, d)


@dataclass
class TreeModel:
    feature: np.ndarray      # -1 marks a leaf
    threshold: np.ndarray    # go left when x[feature] <= threshold
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray       # (nodes, n_classes) training counts reaching each node
    wdelta: np.ndarray       # sample-weighted impurity decrease of each split
    classes: tuple

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def depth(self) -> int:
        best = 0
        stack = [(0, 0)]
        while stack:
            node, d = stack.pop()
            best = max(best, d)
            if self.feature[node] >= 0:
                stack.append((self.left[node], d + 1))
                stack.append((self.right[node], d + 1))
        return best

    def apply(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        return kernels.tree_apply(self.feature, self.threshold, self.left, self.right, X)

    def predict_index(self, X) -> np.ndarray:
        """Majority class index of the reached leaf (ties to the lowest index)."""
        return np.argmax(self.counts[self.apply(X)], axis=1)

    def predict(self, X) -> list:
        return [self.classes[i] for i in self.predict_index(X)]

    def raw_importances(self, n_features: int) -> np.ndarray:
        out = np.zeros(n_features)
        split = self.feature >= 0
        np.add.at(out, self.feature[split], self.wdelta[split])
        return out


def _encode(y, classes=None):
    labels = [str(v) for v in np.asarray(y).tolist()]
    if classes is None:
        classes = tuple(sorted(set(labels)))
    lookup = {c: i for i, c in enumerate(classes)}
    try:
        codes = np.array([lookup[v] for v in labels], dtype=np.int64)
    except KeyError as exc:
        raise ValueError(f"label {exc.args[0]!r} not among classes {classes}") from None
    return codes, tuple(classes)


def _check_X(X) -> np.ndarray:
    X = np.ascontiguousarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError("X must be a non-empty 2-D array")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    return X


def _grow(X, codes, n_classes, hyper: ForestHyper, rng) -> tuple:
    n, d = X.shape
    keys = rng.random((2 * n - 1, d))
    max_depth = -1 if hyper.max_depth is None else int(hyper.max_depth)
    return kernels.build_tree(X, codes, n_classes, max_depth, int(hyper.min_samples_split),
                              hyper.k_features(d), keys)


def fit_tree(X, y, hyper: Optional[ForestHyper] = None, feature_subset_seed: int = 0,
             classes: Optional[Sequence[str]] = None) -> TreeModel:
    """Grow one CART tree on all rows of ``X`` (no bootstrap)."""
    hyper = hyper or ForestHyper()
    X = _check_X(X)
    codes, classes = _encode(y, classes)
    if codes.shape[0] != X.shape[0]:
        raise ValueError("X and y lengths differ")
    rng = np.random.default_rng(feature_subset_seed)
    parts = _grow(X, codes, len(classes), hyper, rng)
    return TreeModel(*parts, classes=classes)


@dataclass
class ForestModel:
    trees: list
    hyper: ForestHyper
    classes: tuple
    importances: np.ndarray
    train_seed: int
    n_features: int
    degenerate: bool = False

    def _check(self, X) -> np.ndarray:
        X = np.ascontiguousarray(np.atleast_2d(np.asarray(X, dtype=np.float64)))
        if X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} features, got {X.shape[1]}")
        return X

    def votes(self, X) -> np.ndarray:
        """Tree vote counts ``(n, n_classes)``."""
        X = self._check(X)
        out = np.zeros((X.shape[0], len(self.classes)), dtype=np.int64)
        rows = np.arange(X.shape[0])
        for tree in self.trees:
            np.add.at(out, (rows, tree.predict_index(X)), 1)
        return out

    def predict_batch(self, X):
        v = self.votes(X)
        idx = np.argmax(v, axis=1)
        return [self.classes[i] for i in idx], v / len(self.trees)

    def predict(self, x):
        """Majority vote for one example: ``(class, vote_fractions)``."""
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError("predict takes a single feature vector")
        labels, frac = self.predict_batch(x[None, :])
        return labels[0], frac[0]

    # -- serialization -------------------------------------------------

    def to_text(self) -> str:
        h = self.hyper
        lines = [FOREST_MAGIC,
                 "classes " + json.dumps(list(self.classes)),
                 f"hyper {h.n_estimators} {h.min_samples_split} "
                 f"{'none' if h.max_depth is None else h.max_depth} "
                 f"{'none' if h.features_per_split is None else h.features_per_split}",
                 f"train_seed {self.train_seed}",
                 f"n_features {self.n_features}",
                 f"degenerate {int(self.degenerate)}",
                 "importances " + " ".join(repr(float(v)) for v in self.importances)]
        for t_i, t in enumerate(self.trees):
            lines.append(f"tree {t_i} {t.n_nodes}")
            for j in range(t.n_nodes):
                cnt = " ".join(str(int(c)) for c in t.counts[j])
                lines.append(f"{int(t.feature[j])} {float(t.threshold[j])!r} {int(t.left[j])} "
                             f"{int(t.right[j])} {float(t.wdelta[j])!r} {cnt}")
        lines.append("end forest")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ForestModel":
        return cls.from_lines(iter(text.splitlines()))

    @classmethod
    def from_lines(cls, lines) -> "ForestModel":
        try:
            if next(lines) != FOREST_MAGIC:
                raise ModelFormatError("missing forest header")
            classes = tuple(json.loads(_field(next(lines), "classes")))
            hp = _field(next(lines), "hyper").split()
            hyper = ForestHyper(int(hp[0]), int(hp[1]),
                                None if hp[2] == "none" else int(hp[2]),
                                None if hp[3] == "none" else int(hp[3]))
            seed = int(_field(next(lines), "train_seed"))
            n_features = int(_field(next(lines), "n_features"))
            degenerate = bool(int(_field(next(lines), "degenerate")))
            imp_text = _field(next(lines), "importances")
            importances = np.array([float(v) for v in imp_text.split()])
            trees = []
            for t_i in range(hyper.n_estimators):
                head = _field(next(lines), "tree").split()
                if int(head[0]) != t_i:
                    raise ModelFormatError(f"tree {t_i} out of order")
                n_nodes = int(head[1])
                rows = [next(lines).split() for _ in range(n_nodes)]
                trees.append(TreeModel(
                    np.array([int(r[0]) for r in rows], dtype=np.int64),
                    np.array([float(r[1]) for r in rows]),
                    np.array([int(r[2]) for r in rows], dtype=np.int64),
                    np.array([int(r[3]) for r in rows], dtype=np.int64),
                    np.array([[int(c) for c in r[5:]] for r in rows], dtype=np.int64).reshape(n_nodes, len(classes)),
                    np.array([float(r[4]) for r in rows]),
                    classes))
            if next(lines) != "end forest":
                raise ModelFormatError("missing forest trailer")
        except StopIteration:
            raise ModelFormatError("truncated forest text") from None
        except (ValueError, IndexError) as exc:
            if isinstance(exc, ModelFormatError):
                raise
            raise ModelFormatError(f"malformed forest text: {exc}") from None
        return cls(trees, hyper, classes, importances, seed, n_features, degenerate)


def _field(line: str, name: str) -> str:
    head, _, rest = line.partition(" ")
    if head != name:
        raise ModelFormatError(f"expected {name!r} line, got {line[:40]!r}")
    return rest


def fit_forest(X, y, hyper: Optional[ForestHyper] = None, seed: int = 0) -> ForestModel:
    """Bootstrap-aggregated CART forest.

    Tree ``j`` uses its own child of ``SeedSequence(seed)`` for the
    bootstrap draw and the feature-subset keys.  Importances are the
    per-tree impurity-decrease totals, normalised per tree, averaged and
    renormalised to sum to 1.  A single-class ``y`` yields a degenerate
    forest whose importances are all zero.
    """
    hyper = hyper or ForestHyper()
    X = _check_X(X)
    codes, classes = _encode(y)
    n, d = X.shape
    if codes.shape[0] != n:
        raise ValueError("X and y lengths differ")
    if n < 2:
        raise ValueError("a forest needs at least 2 training rows")
    degenerate = len(classes) < 2
    trees = []
    per_tree = np.zeros((hyper.n_estimators, d))
    for j, child in enumerate(np.random.SeedSequence(seed).spawn(hyper.n_estimators)):
        rng = np.random.default_rng(child)
        boot = rng.integers(0, n, size=n)
        parts = _grow(np.ascontiguousarray(X[boot]), codes[boot], len(classes), hyper, rng)
        tree = TreeModel(*parts, classes=classes)
        trees.append(tree)
        raw = tree.raw_importances(d)
        total = raw.sum()
        if total > 0:
            per_tree[j] = raw / total
    imp = per_tree.mean(axis=0)
    if imp.sum() > 0:
        imp = imp / imp.sum()
    return ForestModel(trees, hyper, classes, imp, int(seed), d, degenerate)


def predict(forest: ForestModel, x):
    return forest.predict(x)


@dataclass
class FeatureRanking:
    ranked: list = field(default_factory=list)   # (FeatureSpec, importance), descending
    families: list = field(default_factory=list)  # (group key, summed importance), descending

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("rank,feature,importance\n")
            for i, (spec, imp) in enumerate(self.ranked, 1):
                fh.write(f"{i},{spec.name},{imp!r}\n")


def rank_features(X_full, y, specs, hyper: Optional[ForestHyper] = None, seed: int = 0) -> FeatureRanking:
    """Train a forest on the full bank and order the specs by importance."""
    specs = list(specs)
    X_full = _check_X(X_full)
    if X_full.shape[1] != len(specs):
        raise ValueError("feature matrix columns do not match the spec list")
    forest = fit_forest(X_full, y, hyper, seed)
    order = sorted(range(len(specs)), key=lambda i: (-forest.importances[i], i))
    ranked = [(specs[i], float(forest.importances[i])) for i in order]
    groups: dict = {}
    for spec, imp in zip(specs, forest.importances):
        groups[spec.group_key()] = groups.get(spec.group_key(), 0.0) + float(imp)
    families = sorted(groups.items(), key=lambda kv: (-kv[1], kv[0]))
    return FeatureRanking(ranked, families)
