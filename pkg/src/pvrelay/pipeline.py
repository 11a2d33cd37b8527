"""Relay pipeline: trigger, capture, trend features, fused detection, zone and phase stages."""
from __future__ import annotations

import csv
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import signal

from . import trends
from .detector import DetectorConfig, capture_window, detect, tune_gamma
from .forest import FeatureRanking, ForestHyper, ForestModel, fit_forest, rank_features
from .fuzzy import FuzzySystem, GaParams, default_system, ga_tune
from .gwo import GwoParams
from .synth import PHASE_CLASSES, ZONES, WaveformRecord
from .validation import (CVReport, balance_with_smote, balanced_accuracy, confusion,
                         grid_search, stratified_split)

BUNDLE_MAGIC = "pvrelay-bundle 1"
FUSIONS = ("fuzzy-only", "forest-only", "and", "or")
FAULT, NON_FAULT = "fault", "non-fault"
STAGES = ("detect", "capture", "features", "fuzzy", "forest", "locate", "phase")
# reference per-stage latency budget in microseconds (soft, not enforced)
LATENCY_BUDGET_US = {"detect": 1.0, "features": 10.0, "fuzzy": 1800.0, "forest": 500.0}


class TrainingError(RuntimeError):
    """A training stage lacks the classes it needs."""


class InferenceError(ValueError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    trigger_policy: str = "any-phase"
    gamma: Optional[float] = None          # None: tune on the training split
    gamma_denominator: str = "total"
    gwo_population: int = 25
    gwo_iterations: int = 200
    window_cycles: float = 1.0
    feature_selection: str = "default"     # or "top-k" from the ranking
    top_k: int = 3
    rank_trees: int = 100
    smote: bool = False
    smote_k: int = 5
    grid_n_estimators: tuple = (50, 100)
    grid_min_samples_split: tuple = (2, 5)
    grid_max_depth: tuple = (8, 14)
    cv_folds: int = 10
    ga_population: int = 50
    ga_generations: int = 100
    ga_crossover_rate: float = 0.9
    ga_mutation_rate: float = 0.1
    ga_mutation_sigma: float = 0.05
    ga_elitism: int = 2
    fusion: str = "and"
    test_fraction: float = 0.2

    def __post_init__(self):
        if self.fusion not in FUSIONS:
            raise ValueError(f"fusion must be one of {FUSIONS}")
        if self.feature_selection not in ("default", "top-k"):
            raise ValueError("feature_selection must be 'default' or 'top-k'")
        if self.window_cycles <= 0:
            raise ValueError("window_cycles must be positive")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")

    def grid(self) -> dict:
        return {"n_estimators": list(self.grid_n_estimators),
                "min_samples_split": list(self.grid_min_samples_split),
                "max_depth": list(self.grid_max_depth)}


@dataclass
class TrainedBundle:
    gamma: float
    detector_config: DetectorConfig
    window_cycles: float
    feature_specs: list
    fuzzy: FuzzySystem
    detect_forest: ForestModel
    locate_forest: ForestModel
    phase_forest: ForestModel
    fusion: str = "and"
    version: str = BUNDLE_MAGIC

    def to_text(self) -> str:
        parts = [BUNDLE_MAGIC,
                 f"gamma {self.gamma!r}",
                 f"samples_per_cycle {self.detector_config.samples_per_cycle}",
                 f"trigger_policy {self.detector_config.trigger_policy}",
                 f"window_cycles {self.window_cycles!r}",
                 f"fusion {self.fusion}",
                 f"features {len(self.feature_specs)}"]
        parts += [s.name for s in self.feature_specs]
        text = "\n".join(parts) + "\n"
        text += self.fuzzy.to_text()
        for name, model in (("detect", self.detect_forest), ("locate", self.locate_forest),
                            ("phase", self.phase_forest)):
            text += f"section {name}\n" + model.to_text()
        return text + "end bundle\n"

    def save(self, path) -> None:
        with open(path, "w", newline="\n") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "TrainedBundle":
        lines = iter(text.splitlines())

        def field_(name):
            head, _, rest = next(lines).partition(" ")
            if head != name:
                raise InferenceError(f"bundle: expected {name!r}")
            return rest

        try:
            if next(lines) != BUNDLE_MAGIC:
                raise InferenceError("not a bundle file (bad magic line)")
            gamma = float(field_("gamma"))
            m = int(field_("samples_per_cycle"))
            policy = field_("trigger_policy")
            window = float(field_("window_cycles"))
            fusion = field_("fusion")
            specs = [trends.FeatureSpec.parse(next(lines)) for _ in range(int(field_("features")))]
            fuzzy = FuzzySystem.from_lines(lines)
            forests = {}
            for name in ("detect", "locate", "phase"):
                if next(lines) != f"section {name}":
                    raise InferenceError(f"bundle: missing {name} section")
                forests[name] = ForestModel.from_lines(lines)
            if next(lines) != "end bundle":
                raise InferenceError("bundle: missing trailer")
        except StopIteration:
            raise InferenceError("bundle file is truncated") from None
        return cls(gamma, DetectorConfig(m, gamma, policy), window, specs, fuzzy,
                   forests["detect"], forests["locate"], forests["phase"], fusion)

    @classmethod
    def load(cls, path) -> "TrainedBundle":
        with open(path) as fh:
            return cls.from_text(fh.read())


@dataclass
class Verdict:
    triggered: bool
    is_fault: bool = False
    fuzzy_score: Optional[float] = None
    forest_vote: Optional[float] = None
    zone: Optional[str] = None
    trip: bool = False
    phases: Optional[str] = None
    trigger_index: Optional[int] = None
    forest_label: Optional[str] = None
    timings: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {"triggered": self.triggered, "is_fault": self.is_fault,
                "fuzzy_score": self.fuzzy_score, "forest_vote": self.forest_vote,
                "zone": self.zone, "trip": self.trip, "phases": self.phases,
                "trigger_index": self.trigger_index, "forest_label": self.forest_label}


def fuse(policy: str, fuzzy_score: float, forest_says_fault: bool) -> bool:
    fz = fuzzy_score >= 0.5
    if policy == "fuzzy-only":
        return fz
    if policy == "forest-only":
        return forest_says_fault
    if policy == "and":
        return fz and forest_says_fault
    if policy == "or":
        return fz or forest_says_fault
    raise ValueError(f"unknown fusion policy {policy!r}")


# ---------------------------------------------------------------------------
# shared front end


@dataclass
class _Captured:
    rows: list            # corpus indices with a captured window
    trigger: dict         # corpus index -> trigger index (triggered records only)
    windows: np.ndarray   # (len(rows), 3, L)


def _capture_all(records: Sequence[WaveformRecord], cfg: DetectorConfig, window_cycles: float) -> _Captured:
    rows, trig, wins = [], {}, []
    length = int(round(window_cycles * cfg.samples_per_cycle))
    for i, rec in enumerate(records):
        tr = detect(rec, cfg)
        if not tr.triggered:
            continue
        trig[i] = tr.trigger_index
        if tr.trigger_index + length <= rec.n_samples:
            rows.append(i)
            wins.append(capture_window(rec, tr.trigger_index, window_cycles).samples)
    windows = np.array(wins) if wins else np.zeros((0, 3, length))
    return _Captured(rows, trig, windows)


def _stratum(rec) -> str:
    lab = rec.label
    return f"{lab.kind}|{lab.zone or ''}|{lab.phase_class or ''}"


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainingReport:
    gamma: float
    gamma_fitness: float
    gamma_trace: list
    ranking: Optional[FeatureRanking]
    feature_specs: list
    cv: dict                      # stage -> CVReport
    ga_trace: list
    holdout: dict                 # stage -> balanced accuracy
    holdout_fusion: dict          # fusion policy -> detection balanced accuracy
    n_train: int
    n_test: int
    test_indices: list

    def to_text(self) -> str:
        lines = ["pvrelay training report",
                 f"records_train {self.n_train}", f"records_test {self.n_test}",
                 f"gamma {self.gamma!r}", f"gamma_fitness {self.gamma_fitness!r}",
                 "features " + " ".join(s.name for s in self.feature_specs)]
        for stage in ("detect", "locate", "phase"):
            cv = self.cv[stage]
            lines.append(f"cv {stage} best {cv.best_params} mean {cv.mean!r} std {cv.std!r}")
        lines.append(f"ga_best_fitness {self.ga_trace[-1][1]!r}")
        for stage, score in self.holdout.items():
            lines.append(f"holdout {stage} {score!r}")
        for policy, score in self.holdout_fusion.items():
            lines.append(f"holdout_fusion {policy} {score!r}")
        if self.ranking is not None:
            lines.append("ranking_top10 " + " ".join(s.name for s, _ in self.ranking.ranked[:10]))
            lines.append("family_top5 " + " ".join(k for k, _ in self.ranking.families[:5]))
        return "\n".join(lines) + "\n"


def _require(labels, needed, stage):
    present = set(labels)
    if len(present) < needed:
        raise TrainingError(f"{stage} stage needs at least {needed} classes, found {sorted(present)}")


def train_bundle(corpus: Sequence[WaveformRecord], config: Optional[PipelineConfig] = None,
                 seed: int = 0, *, rank: bool = True) -> tuple[TrainedBundle, TrainingReport]:
    config = config or PipelineConfig()
    records = list(corpus)
    if not records:
        raise TrainingError("empty corpus")
    m = records[0].samples_per_cycle
    if any(r.samples_per_cycle != m for r in records):
        raise TrainingError("corpus mixes sampling rates")
    if not any(r.label.is_fault for r in records):
        raise TrainingError("detection stage: corpus holds no faults")
    if all(r.label.is_fault for r in records):
        raise TrainingError("detection stage: corpus holds no non-fault transients")

    train_idx, test_idx = stratified_split([_stratum(r) for r in records], config.test_fraction, seed)
    train = [records[i] for i in train_idx]

    # (1) trigger threshold
    if config.gamma is None:
        tuning = tune_gamma(train, GwoParams(population=config.gwo_population, max_iter=config.gwo_iterations,
                                             seed=seed),
                            trigger_policy=config.trigger_policy, denominator=config.gamma_denominator)
        gamma, gamma_fit, gamma_trace = tuning.gamma, tuning.fitness, tuning.trace
    else:
        gamma, gamma_fit, gamma_trace = float(config.gamma), float("nan"), []
    det_cfg = DetectorConfig(m, gamma, config.trigger_policy)

    # (2) windows and the full bank on the training split
    cap = _capture_all(train, det_cfg, config.window_cycles)
    if not cap.rows:
        raise TrainingError("detection stage: no training record triggered")
    labels = [train[i].label for i in cap.rows]
    y_det = np.array([FAULT if lab.is_fault else NON_FAULT for lab in labels])
    _require(y_det, 2, "detection")

    # (3) ranking and feature choice
    ranking = None
    full = trends.full_registry()
    usable = [s for s in full if cap.windows.shape[2] >= s.min_length()]
    if rank or config.feature_selection == "top-k":
        X_full = trends.extract_matrix(cap.windows, usable)
        ranking = rank_features(X_full, y_det, usable, ForestHyper(config.rank_trees), seed)
    if config.feature_selection == "top-k":
        specs = [s for s, _ in ranking.ranked[:config.top_k]]
    else:
        specs = list(trends.DEFAULT_SPECS)
    X = trends.extract_matrix(cap.windows, specs)

    # (4)-(5) detection forest
    cv = {}
    X_det, y_det_fit = (balance_with_smote(X, y_det, config.smote_k, seed) if config.smote else (X, y_det))
    cv["detect"] = grid_search(X_det, y_det_fit, config.grid(), config.cv_folds, seed)
    detect_forest = fit_forest(X_det, y_det_fit, _hyper(cv["detect"]), seed + 1)

    # (6) fuzzy detector on the same inputs
    base = default_system(tuple(f"in_{i}" for i in range(len(specs)))) if len(specs) != 3 else default_system()
    ga = ga_tune(X, y_det == FAULT, base,
                 GaParams(config.ga_population, config.ga_generations, config.ga_crossover_rate,
                          config.ga_mutation_rate, config.ga_mutation_sigma, config.ga_elitism, seed=seed))

    # (7) zone forest on fault windows
    fault_rows = np.flatnonzero(y_det == FAULT)
    y_zone = np.array([labels[i].zone for i in fault_rows])
    _require(y_zone, 2, "location")
    cv["locate"] = grid_search(X[fault_rows], y_zone, config.grid(), config.cv_folds, seed)
    locate_forest = fit_forest(X[fault_rows], y_zone, _hyper(cv["locate"]), seed + 2)

    # (8) phase forest on internal fault windows
    internal = np.array([i for i in fault_rows if labels[i].zone == "internal"], dtype=np.int64)
    if internal.size == 0:
        raise TrainingError("phase-selection stage: no internal faults in the training split")
    y_phase = np.array([labels[i].phase_class for i in internal])
    _require(y_phase, 2, "phase-selection")
    cv["phase"] = grid_search(X[internal], y_phase, config.grid(), config.cv_folds, seed)
    phase_forest = fit_forest(X[internal], y_phase, _hyper(cv["phase"]), seed + 3)

    bundle = TrainedBundle(gamma, det_cfg, config.window_cycles, specs, ga.system,
                           detect_forest, locate_forest, phase_forest, config.fusion)

    test = [records[i] for i in test_idx]
    ev = evaluate(test, bundle)
    report = TrainingReport(gamma, gamma_fit, gamma_trace, ranking, specs, cv, ga.trace,
                            {"detect": ev.detect_score, "locate": ev.zone_score, "phase": ev.phase_score},
                            ev.fusion_scores, len(train), len(test), [int(i) for i in test_idx])
    return bundle, report


def _hyper(cv: CVReport) -> ForestHyper:
    p = cv.best_params
    return ForestHyper(p["n_estimators"], p["min_samples_split"], p["max_depth"])


# ---------------------------------------------------------------------------
# inference


def _check_rate(record: WaveformRecord, bundle: TrainedBundle):
    if record.samples_per_cycle != bundle.detector_config.samples_per_cycle:
        raise InferenceError(
            f"record has {record.samples_per_cycle} samples per cycle but the bundle expects "
            f"{bundle.detector_config.samples_per_cycle}; resample explicitly first")


def run_inference(record: WaveformRecord, bundle: TrainedBundle) -> Verdict:
    _check_rate(record, bundle)
    timings = {}
    t0 = time.perf_counter()
    tr = detect(record, bundle.detector_config)
    timings["detect"] = (time.perf_counter() - t0) * 1e6
    if not tr.triggered:
        return Verdict(False, timings=timings)
    length = int(round(bundle.window_cycles * record.samples_per_cycle))
    if tr.trigger_index + length > record.n_samples:
        return Verdict(True, trigger_index=tr.trigger_index, timings=timings)
    t0 = time.perf_counter()
    win = capture_window(record, tr.trigger_index, bundle.window_cycles)
    timings["capture"] = (time.perf_counter() - t0) * 1e6
    t0 = time.perf_counter()
    x = trends.extract_matrix(win.samples[None], bundle.feature_specs)
    timings["features"] = (time.perf_counter() - t0) * 1e6
    t0 = time.perf_counter()
    score = float(bundle.fuzzy.infer_batch(x)[0])
    timings["fuzzy"] = (time.perf_counter() - t0) * 1e6
    t0 = time.perf_counter()
    det_labels, det_frac = bundle.detect_forest.predict_batch(x)
    timings["forest"] = (time.perf_counter() - t0) * 1e6
    vote = _fault_fraction(bundle.detect_forest, det_frac)[0]
    is_fault = fuse(bundle.fusion, score, det_labels[0] == FAULT)
    v = Verdict(True, is_fault, score, float(vote), trigger_index=tr.trigger_index,
                forest_label=det_labels[0], timings=timings)
    if is_fault:
        t0 = time.perf_counter()
        v.zone = bundle.locate_forest.predict_batch(x)[0][0]
        timings["locate"] = (time.perf_counter() - t0) * 1e6
        v.trip = v.zone == "internal"
        if v.trip:
            t0 = time.perf_counter()
            v.phases = bundle.phase_forest.predict_batch(x)[0][0]
            timings["phase"] = (time.perf_counter() - t0) * 1e6
    return v


def _fault_fraction(forest: ForestModel, frac: np.ndarray) -> np.ndarray:
    if FAULT in forest.classes:
        return frac[:, forest.classes.index(FAULT)]
    return np.zeros(frac.shape[0])


def infer_batch(records: Sequence[WaveformRecord], bundle: TrainedBundle) -> list[Verdict]:
    """Verdicts for many records; identical to calling :func:`run_inference` on each (minus timings)."""
    for rec in records:
        _check_rate(rec, bundle)
    cap = _capture_all(records, bundle.detector_config, bundle.window_cycles)
    verdicts = [Verdict(i in cap.trigger, trigger_index=cap.trigger.get(i)) for i in range(len(records))]
    if not cap.rows:
        return verdicts
    X = trends.extract_matrix(cap.windows, bundle.feature_specs)
    scores = bundle.fuzzy.infer_batch(X)
    det_labels, det_frac = bundle.detect_forest.predict_batch(X)
    votes = _fault_fraction(bundle.detect_forest, det_frac)
    zones, _ = bundle.locate_forest.predict_batch(X)
    phases, _ = bundle.phase_forest.predict_batch(X)
    for j, i in enumerate(cap.rows):
        v = verdicts[i]
        v.fuzzy_score = float(scores[j])
        v.forest_vote = float(votes[j])
        v.forest_label = det_labels[j]
        v.is_fault = fuse(bundle.fusion, float(scores[j]), det_labels[j] == FAULT)
        if v.is_fault:
            v.zone = zones[j]
            v.trip = v.zone == "internal"
            if v.trip:
                v.phases = phases[j]
    return verdicts


# ---------------------------------------------------------------------------
# evaluation


@dataclass
class EvaluationReport:
    n_records: int
    detect_score: float
    zone_score: Optional[float]
    phase_score: Optional[float]
    fusion_scores: dict
    detect_confusion: object
    zone_confusion: object
    phase_confusion: object
    scenarios: list       # (scenario key, n, detection balanced accuracy or None)
    verdicts: list

    def to_text(self) -> str:
        def fmt(v):
            return "na" if v is None else repr(v)
        lines = ["pvrelay evaluation report", f"records {self.n_records}",
                 f"detect_balanced_accuracy {fmt(self.detect_score)}",
                 f"zone_balanced_accuracy {fmt(self.zone_score)}",
                 f"phase_balanced_accuracy {fmt(self.phase_score)}"]
        for policy, score in self.fusion_scores.items():
            lines.append(f"fusion {policy} {fmt(score)}")
        for name, cm in (("detect", self.detect_confusion), ("zone", self.zone_confusion),
                         ("phase", self.phase_confusion)):
            if cm is None:
                continue
            lines.append(f"confusion {name} classes {' '.join(cm.classes)}")
            for c, row in zip(cm.classes, cm.counts):
                lines.append(f"  {c} " + " ".join(str(int(v)) for v in row))
        for key, n, score in self.scenarios:
            lines.append(f"scenario {key} n {n} detect {fmt(score)}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {"records": self.n_records, "detect": self.detect_score,
                "zone": self.zone_score, "phase": self.phase_score}


def _scenario_key(rec: WaveformRecord) -> str:
    parts = [f"kind={rec.label.kind}"]
    for key in ("noise_snr_db", "ct_burden_ohm"):
        if key in rec.meta:
            parts.append(f"{key}={rec.meta[key]}")
    return ",".join(parts)


def evaluate(corpus: Sequence[WaveformRecord], bundle: TrainedBundle) -> EvaluationReport:
    """Per-stage balanced accuracy on a labelled corpus.

    The detection score covers every record (untriggered records count as
    non-fault verdicts).  Zone and phase scores isolate their stage: the
    zone forest is scored on every triggered true fault and the phase
    forest on every triggered internal fault.
    """
    records = list(corpus)
    verdicts = infer_batch(records, bundle)
    y_true = [FAULT if r.label.is_fault else NON_FAULT for r in records]
    y_pred = [FAULT if v.is_fault else NON_FAULT for v in verdicts]
    detect_score = balanced_accuracy(y_true, y_pred)
    detect_cm = confusion(y_true, y_pred, [NON_FAULT, FAULT])

    # every fusion policy, from the same detector outputs
    fusion_scores = {}
    for policy in FUSIONS:
        pred = []
        for v in verdicts:
            if v.fuzzy_score is None:
                pred.append(NON_FAULT)
            else:
                forest_fault = v.forest_label == FAULT
                pred.append(FAULT if fuse(policy, v.fuzzy_score, forest_fault) else NON_FAULT)
        fusion_scores[policy] = balanced_accuracy(y_true, pred)

    cap = _capture_all(records, bundle.detector_config, bundle.window_cycles)
    zone_score = phase_score = None
    zone_cm = phase_cm = None
    rows = [i for i in cap.rows if records[i].label.is_fault]
    if rows:
        pos = {i: j for j, i in enumerate(cap.rows)}
        X = trends.extract_matrix(cap.windows, bundle.feature_specs)
        zt = [records[i].label.zone for i in rows]
        zp, _ = bundle.locate_forest.predict_batch(X[[pos[i] for i in rows]])
        zone_score = balanced_accuracy(zt, zp)
        zone_cm = confusion(zt, zp, ZONES)
        internal = [i for i in rows if records[i].label.zone == "internal"]
        if internal:
            pt = [records[i].label.phase_class for i in internal]
            pp, _ = bundle.phase_forest.predict_batch(X[[pos[i] for i in internal]])
            phase_score = balanced_accuracy(pt, pp)
            phase_cm = confusion(pt, pp, PHASE_CLASSES)

    groups: dict = {}
    for r, t, p in zip(records, y_true, y_pred):
        groups.setdefault(_scenario_key(r), ([], []))
        groups[_scenario_key(r)][0].append(t)
        groups[_scenario_key(r)][1].append(p)
    scenarios = [(k, len(t), balanced_accuracy(t, p)) for k, (t, p) in sorted(groups.items())]
    return EvaluationReport(len(records), detect_score, zone_score, phase_score, fusion_scores,
                            detect_cm, zone_cm, phase_cm, scenarios, verdicts)


def filter_records(corpus: Sequence[WaveformRecord], *, noise: Optional[float] = None,
                   ct_burden: Optional[float] = None, kind: Optional[str] = None) -> list:
    out = []
    for rec in corpus:
        if noise is not None and rec.meta.get("noise_snr_db") != repr(float(noise)):
            continue
        if ct_burden is not None and rec.meta.get("ct_burden_ohm") != repr(float(ct_burden)):
            continue
        if kind is not None and rec.label.kind != kind:
            continue
        out.append(rec)
    return out


# ---------------------------------------------------------------------------
# latency


def latency_table(verdicts: Sequence[Verdict]) -> list[tuple]:
    """``(stage, n, p50_us, p99_us, max_us, budget_us)`` per stage that ran."""
    rows = []
    for stage in STAGES:
        vals = np.array([v.timings[stage] for v in verdicts if stage in v.timings])
        if vals.size == 0:
            continue
        rows.append((stage, int(vals.size), float(np.percentile(vals, 50)),
                     float(np.percentile(vals, 99)), float(vals.max()), LATENCY_BUDGET_US.get(stage)))
    return rows


def write_latency_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["stage", "n", "p50_us", "p99_us", "max_us", "budget_us"])
        for r in rows:
            w.writerow([r[0], r[1], f"{r[2]:.3f}", f"{r[3]:.3f}", f"{r[4]:.3f}",
                        "" if r[5] is None else r[5]])


# ---------------------------------------------------------------------------
# resampling


def resample(record: WaveformRecord, target_rate: float) -> WaveformRecord:
    """Anti-aliased decimation to ``target_rate`` (polyphase FIR, Kaiser window)."""
    src = Fraction(repr(float(record.sample_rate_hz)))
    dst = Fraction(repr(float(target_rate)))
    if dst <= 0:
        raise ValueError("target rate must be positive")
    if dst > src:
        raise ValueError("resample only decimates; upsampling is refused")
    if dst == src:
        return record.with_currents(record.currents.copy())
    ratio = dst / src
    if ratio.denominator > 10000:
        raise ValueError(f"rate ratio {ratio} is not a small rational")
    m_new = float(dst) / record.base_freq_hz
    if abs(m_new - round(m_new)) > 1e-9:
        raise ValueError(f"{float(dst)} Hz does not give an integer number of samples per "
                         f"{record.base_freq_hz} Hz cycle")
    up, down = ratio.numerator, ratio.denominator
    out = signal.resample_poly(record.currents, up, down, axis=1)
    meta = dict(record.meta)
    meta["sample_rate_hz"] = repr(float(dst))
    if record.inception_index is not None:
        meta["inception_index"] = str(int(math.floor(record.inception_index * up / down + 0.5)))
    return WaveformRecord(out[0], out[1], out[2], record.label, record.seed, float(dst),
                          record.base_freq_hz, meta)
