"""Simple and combined linear-trend attributes of captured current windows.

The regression abscissa is the sample (or segment) index ``0 .. n-1``.
Combined trends first reduce the series to one value per contiguous segment
(the final segment may be shorter) with mean, population variance, max or
min, then regress the reduced series.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import special

ATTRIBUTES = ("pvalue", "rvalue", "intercept", "slope", "stderr")
SEGMENT_SIZES = (5, 10, 50)
AGGREGATORS = ("mean", "variance", "max", "min")
PHASES = ("a", "b", "c")
FAMILIES = ("SLT", "CLT")


class FeatureError(ValueError):
    """A feature cannot be computed for the given window."""


@dataclass(frozen=True)
class LinTrendAttrs:
    slope: float
    intercept: float
    pearson_r: float
    p_value: float
    stderr: float

    def get(self, attribute: str) -> float:
        return {"pvalue": self.p_value, "rvalue": self.pearson_r, "intercept": self.intercept,
                "slope": self.slope, "stderr": self.stderr}[attribute]


def linregress_batch(y) -> dict:
    """Least-squares line through every row of ``y`` against ``0 .. n-1``.

    Returns arrays keyed by attribute name.  Conventions: a constant row has
    slope 0, r 0 and p 1; with two points stderr is 0 and p is 1; an exact
    non-flat fit with more than two points has p 0.
    """
    y = np.atleast_2d(np.asarray(y, dtype=np.float64))
    k, n = y.shape
    if n < 2:
        raise FeatureError(f"linear trend needs at least 2 points, got {n}")
    x = np.arange(n, dtype=np.float64)
    xbar = (n - 1) / 2.0
    xc = x - xbar
    sxx = float(np.dot(xc, xc))
    ybar = y.mean(axis=1)
    yc = y - ybar[:, None]
    sxy = (yc * xc).sum(axis=1)  # row-wise reduction: a row scores the same alone or in a batch
    syy = (yc * yc).sum(axis=1)
    slope = sxy / sxx
    intercept = ybar - slope * xbar

    flat = syy == 0.0
    denom = np.sqrt(sxx * np.where(flat, 1.0, syy))
    r = np.where(flat, 0.0, sxy / denom)
    if np.any(np.abs(r) > 1.0 + 1e-12):
        raise FeatureError("correlation escaped [-1, 1]; input is not finite?")
    r = np.clip(r, -1.0, 1.0)
    slope = np.where(flat, 0.0, slope)
    intercept = np.where(flat, ybar, intercept)

    if n == 2:
        stderr = np.zeros(k)
        pvalue = np.ones(k)
    else:
        df = n - 2
        resid = yc - slope[:, None] * xc[None, :]
        ssr = (resid * resid).sum(axis=1)
        stderr = np.sqrt(ssr / df / sxx)
        pvalue = np.ones(k)
        exact = (stderr == 0.0) & ~flat
        pvalue[exact] = 0.0
        live = stderr > 0.0
        if live.any():
            t = slope[live] / stderr[live]
            pvalue[live] = special.betainc(df / 2.0, 0.5, df / (df + t * t))
        stderr = np.where(flat, 0.0, stderr)
    return {"slope": slope, "intercept": intercept, "rvalue": r,
            "pvalue": np.clip(pvalue, 0.0, 1.0), "stderr": stderr}


def linregress(y) -> LinTrendAttrs:
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise FeatureError("linregress takes a 1-D series")
    res = linregress_batch(y[None, :])
    return LinTrendAttrs(float(res["slope"][0]), float(res["intercept"][0]),
                         float(res["rvalue"][0]), float(res["pvalue"][0]),
                         float(res["stderr"][0]))


def pearson_r(x, y) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise FeatureError("pearson_r needs two 1-D sequences of equal length")
    if x.shape[0] < 2:
        raise FeatureError("pearson_r needs at least 2 points")
    xc = x - x.mean()
    yc = y - y.mean()
    # r is scale free, so normalising guards the squares against underflow
    xs, ys = float(np.max(np.abs(xc))), float(np.max(np.abs(yc)))
    if xs == 0.0 or ys == 0.0:
        return 0.0
    xc, yc = xc / xs, yc / ys
    sxx = float(np.dot(xc, xc))
    syy = float(np.dot(yc, yc))
    if sxx == 0.0 or syy == 0.0:
        return 0.0
    r = float(np.dot(xc, yc)) / math.sqrt(sxx * syy)
    if abs(r) > 1.0 + 1e-12:
        raise FeatureError("correlation escaped [-1, 1]")
    return min(1.0, max(-1.0, r))


def n_segments(length: int, segment_size: int) -> int:
    return -(-length // segment_size)


def aggregate_segments(series, segment_size: int, aggregator: str) -> np.ndarray:
    """Reduce each contiguous chunk of ``segment_size`` samples to one value.

    Works on a 1-D series or row-wise on a 2-D array.
    """
    if segment_size < 1:
        raise FeatureError("segment_size must be >= 1")
    arr = np.asarray(series, dtype=np.float64)
    one_d = arr.ndim == 1
    arr = np.atleast_2d(arr)
    length = arr.shape[1]
    if length == 0:
        raise FeatureError("cannot aggregate an empty series")
    starts = np.arange(0, length, segment_size)
    sizes = np.diff(np.append(starts, length))
    if aggregator == "mean":
        out = np.add.reduceat(arr, starts, axis=1) / sizes
    elif aggregator == "max":
        out = np.maximum.reduceat(arr, starts, axis=1)
    elif aggregator == "min":
        out = np.minimum.reduceat(arr, starts, axis=1)
    elif aggregator == "variance":
        means = np.add.reduceat(arr, starts, axis=1) / sizes
        dev = arr - np.repeat(means, sizes, axis=1)
        out = np.add.reduceat(dev * dev, starts, axis=1) / sizes
    else:
        raise FeatureError(f"unknown aggregator {aggregator!r}")
    return out[0] if one_d else out


def clt(series, segment_size: int, aggregator: str, attribute: str) -> float:
    series = np.asarray(series, dtype=np.float64)
    if n_segments(series.shape[0], segment_size) < 2:
        raise FeatureError(f"segment size {segment_size} leaves fewer than 2 segments")
    return linregress(aggregate_segments(series, segment_size, aggregator)).get(attribute)


# ---------------------------------------------------------------------------
# registry


@dataclass(frozen=True)
class FeatureSpec:
    family: str
    attribute: str
    phase: str
    segment_size: Optional[int] = None
    aggregator: Optional[str] = None

    def __post_init__(self):
        if self.family not in FAMILIES or self.attribute not in ATTRIBUTES or self.phase not in PHASES:
            raise FeatureError(f"invalid feature spec {self}")
        if self.family == "SLT" and (self.segment_size is not None or self.aggregator is not None):
            raise FeatureError("SLT specs carry no segment size or aggregator")
        if self.family == "CLT" and (self.segment_size is None or self.aggregator not in AGGREGATORS):
            raise FeatureError("CLT specs need a segment size and an aggregator")

    @property
    def name(self) -> str:
        if self.family == "SLT":
            return f"{self.phase}:SLT:{self.attribute}"
        return f"{self.phase}:CLT:{self.attribute}:{self.segment_size}:{self.aggregator}"

    @classmethod
    def parse(cls, text: str) -> "FeatureSpec":
        parts = text.strip().split(":")
        try:
            if len(parts) == 3 and parts[1] == "SLT":
                return cls("SLT", parts[2], parts[0])
            if len(parts) == 5 and parts[1] == "CLT":
                return cls("CLT", parts[2], parts[0], int(parts[3]), parts[4])
        except ValueError as exc:
            raise FeatureError(f"bad feature spec {text!r}: {exc}") from None
        raise FeatureError(f"bad feature spec {text!r}")

    def group_key(self) -> str:
        """Name without the phase, for per-family importance totals."""
        return self.name.split(":", 1)[1]

    def min_length(self) -> int:
        if self.family == "SLT":
            return 2
        return self.segment_size + 1


def full_registry() -> list[FeatureSpec]:
    """Canonical 195-entry order: phase, then family, attribute, segment size, aggregator."""
    specs = []
    for ph in PHASES:
        for attr in ATTRIBUTES:
            specs.append(FeatureSpec("SLT", attr, ph))
        for attr in ATTRIBUTES:
            for size in SEGMENT_SIZES:
                for agg in AGGREGATORS:
                    specs.append(FeatureSpec("CLT", attr, ph, size, agg))
    return specs


DEFAULT_SPECS = tuple(FeatureSpec("CLT", "rvalue", ph, 50, "mean") for ph in PHASES)


def registry_id(specs: Sequence[FeatureSpec]) -> str:
    if list(specs) == full_registry():
        return "full-195"
    return "custom-" + str(len(specs)) + ":" + "|".join(s.name for s in specs)


@dataclass
class FeatureVector:
    values: np.ndarray
    registry_id: str
    label: object = None


def extract_matrix(windows, specs: Sequence[FeatureSpec]) -> np.ndarray:
    """Feature matrix ``(n_windows, len(specs))`` for a ``(n, 3, L)`` stack."""
    specs = list(specs)
    if not specs:
        raise FeatureError("no feature specs requested")
    w = np.asarray(windows, dtype=np.float64)
    if w.ndim == 2:
        w = w[None]
    if w.ndim != 3 or w.shape[1] != 3:
        raise FeatureError(f"expected windows shaped (n, 3, L), got {w.shape}")
    length = w.shape[2]
    short = [s.name for s in specs if length < s.min_length()]
    if short:
        raise FeatureError(f"window of {length} samples too short for {short}")

    cache: dict = {}
    out = np.empty((w.shape[0], len(specs)))
    for j, s in enumerate(specs):
        p = PHASES.index(s.phase)
        key = (p, s.segment_size, s.aggregator)
        if key not in cache:
            rows = w[:, p, :]
            if s.family == "CLT":
                rows = aggregate_segments(rows, s.segment_size, s.aggregator)
            cache[key] = linregress_batch(rows)
        out[:, j] = cache[key][s.attribute]
    return out


def extract_selected(window, specs: Optional[Sequence[FeatureSpec]] = None) -> FeatureVector:
    specs = list(specs) if specs is not None else list(DEFAULT_SPECS)
    samples = getattr(window, "samples", window)
    vals = extract_matrix(np.asarray(samples)[None], specs)[0]
    return FeatureVector(vals, registry_id(specs), getattr(window, "source_label", None))


def extract_all(window) -> FeatureVector:
    return extract_selected(window, full_registry())


def write_registry(path, specs: Sequence[FeatureSpec]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["column", "phase", "family", "attribute", "segment_size", "aggregator"])
        for i, s in enumerate(specs, 1):
            w.writerow([f"f_{i}", s.phase, s.family, s.attribute,
                        "" if s.segment_size is None else s.segment_size, s.aggregator or ""])


def write_feature_csv(path, X, labels, specs: Sequence[FeatureSpec]) -> None:
    """Plot-ready feature export: ``label,zone,phase_class,f_1..f_K``."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["label", "zone", "phase_class"] + [f"f_{i}" for i in range(1, len(specs) + 1)])
        for row, lab in zip(np.asarray(X), labels):
            w.writerow([lab.kind, lab.zone or "", lab.phase_class or ""] + [repr(float(v)) for v in row])
