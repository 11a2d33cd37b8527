"""Cycle-to-cycle event detector, window capture and threshold tuning."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .gwo import GwoParams, gwo_minimize
from .synth import EventLabel, WaveformRecord

POLICIES = ("any-phase", "all-phases")


class CaptureError(ValueError):
    """The record has too few samples after the trigger."""


@dataclass(frozen=True)
class DetectorConfig:
    samples_per_cycle: int = 128
    gamma: float = 0.06
    trigger_policy: str = "any-phase"

    def __post_init__(self):
        if self.samples_per_cycle < 8:
            raise ValueError("samples_per_cycle must be >= 8")
        if not 0.0 < self.gamma < 1.0:
            raise ValueError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.trigger_policy not in POLICIES:
            raise ValueError(f"trigger_policy must be one of {POLICIES}")


@dataclass
class TriggerResult:
    triggered: bool
    trigger_index: Optional[int]
    ed_trace: np.ndarray
    """Shape ``(3, n - 2M + 1)``; column ``j`` is ED at sample ``j + 2M - 1``."""


@dataclass
class WaveformWindow:
    samples: np.ndarray
    source_label: Optional[EventLabel]
    window_cycles: float = 1.0

    @property
    def length(self) -> int:
        return self.samples.shape[1]


def ed_series(phase_samples, samples_per_cycle: int) -> np.ndarray:
    """Fractional increase of the rectified sum of the latest cycle over the one before.

    Entry ``j`` belongs to sample ``x = j + 2M - 1``; earlier samples have no
    value.  A zero current-cycle sum yields 0.
    """
    x = np.ascontiguousarray(np.abs(np.asarray(phase_samples, dtype=np.float64)))
    m = int(samples_per_cycle)
    if x.shape[0] < 2 * m:
        raise ValueError(f"need at least {2 * m} samples, got {x.shape[0]}")
    return kernels.ed_trace(x, m)


def ed_traces(currents, samples_per_cycle: int) -> np.ndarray:
    return np.vstack([ed_series(c, samples_per_cycle) for c in currents])


def _hits(traces: np.ndarray, gamma: float, policy: str) -> np.ndarray:
    over = traces >= gamma
    return over.any(axis=0) if policy == "any-phase" else over.all(axis=0)


def detect(record: WaveformRecord, config: DetectorConfig) -> TriggerResult:
    m = config.samples_per_cycle
    if record.samples_per_cycle != m:
        raise ValueError(f"record has {record.samples_per_cycle} samples/cycle, detector expects {m}")
    if record.n_samples < 2 * m:
        return TriggerResult(False, None, np.zeros((3, 0)))
    traces = ed_traces(record.currents, m)
    hits = _hits(traces, config.gamma, config.trigger_policy)
    if not hits.any():
        return TriggerResult(False, None, traces)
    return TriggerResult(True, int(np.argmax(hits)) + 2 * m - 1, traces)


def capture_window(record: WaveformRecord, trigger_index: int, window_cycles: float = 1.0) -> WaveformWindow:
    length = int(round(window_cycles * record.samples_per_cycle))
    if length < 1:
        raise CaptureError("window must hold at least one sample")
    if trigger_index < 0 or trigger_index + length > record.n_samples:
        raise CaptureError(
            f"window of {length} samples at index {trigger_index} overruns "
            f"record of {record.n_samples} samples")
    block = record.currents[:, trigger_index:trigger_index + length].copy()
    return WaveformWindow(block, record.label, float(window_cycles))


# ---------------------------------------------------------------------------
# threshold tuning


@dataclass
class GammaTuning:
    gamma: float
    fitness: float
    trace: list
    """``(iteration, best_gamma, best_fitness)`` rows."""

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["iter", "best_gamma", "best_fitness"])
            for row in self.trace:
                w.writerow([row[0], repr(row[1]), repr(row[2])])


class _DetectionProfile:
    """Per-record ED extremes that decide trigger timing for any threshold."""

    def __init__(self, records: Sequence[WaveformRecord], policy: str):
        pre, post, peak = [], [], []
        for rec in records:
            n0 = rec.inception_index
            if n0 is None:
                continue
            m = rec.samples_per_cycle
            traces = ed_traces(rec.currents, m)
            combined = traces.max(axis=0) if policy == "any-phase" else traces.min(axis=0)
            x = np.arange(combined.shape[0]) + 2 * m - 1
            before = combined[x < n0]
            window = combined[(x >= n0) & (x <= n0 + m)]
            pre.append(before.max() if before.size else -np.inf)
            post.append(window.max() if window.size else -np.inf)
            peak.append(combined.max() if combined.size else -np.inf)
        self.pre = np.array(pre)
        self.post = np.array(post)
        self.peak = np.array(peak)

    def __len__(self):
        return self.pre.shape[0]

    def fitness(self, gamma: float, denominator: str = "total") -> float:
        quick = np.count_nonzero((self.pre < gamma) & (self.post >= gamma))
        if denominator == "total":
            total = len(self)
        else:
            total = np.count_nonzero(self.peak >= gamma)
        if total == 0:
            return 1.0
        return 1.0 - quick / total


def tune_gamma(corpus: Sequence[WaveformRecord], gwo_params: Optional[GwoParams] = None, *,
               trigger_policy: str = "any-phase", denominator: str = "total") -> GammaTuning:
    """Choose the ED threshold with the grey wolf optimizer.

    Fitness is ``1 - quick / total`` where ``quick`` counts disturbance
    records whose first trigger falls within one cycle after the true
    inception.  ``denominator="total"`` divides by all disturbance records;
    ``"triggered"`` divides by the records that trigger at all.  Equal
    fitness is resolved toward the larger threshold.
    """
    if denominator not in ("total", "triggered"):
        raise ValueError("denominator must be 'total' or 'triggered'")
    disturbances = [r for r in corpus if r.label.kind != "Steady" and r.inception_index is not None]
    if not disturbances:
        raise ValueError("corpus holds no disturbance records with a known inception")
    prof = _DetectionProfile(disturbances, trigger_policy)
    params = gwo_params or GwoParams()
    # tie-break: below half a fitness quantum, so it never reorders distinct levels
    eps = 0.5 / max(len(prof), 1) / max(abs(params.upper), abs(params.lower), 1.0)

    def objective(p):
        g = float(p[0])
        return prof.fitness(g, denominator) - eps * g

    res = gwo_minimize(objective, params)
    rows = []
    for it, pos in enumerate(res.best_positions):
        g = float(pos[0])
        rows.append((it, g, prof.fitness(g, denominator)))
    gamma = float(np.clip(res.best_position[0], 1e-9, 1.0 - 1e-9))
    return GammaTuning(gamma, prof.fitness(gamma, denominator), rows)
