"""Single-ended protection for lines fed by PV plants.

Cycle-to-cycle event detection on three-phase currents, linear-trend
features of the captured window, a fused fuzzy and random-forest fault
detector, and forests for fault zone and faulted-phase selection.  A
closed-form transient generator supplies labelled training data.
"""
from .detector import DetectorConfig, capture_window, detect, ed_series, tune_gamma
from .forest import ForestHyper, ForestModel, fit_forest, fit_tree, gini, rank_features
from .fuzzy import FuzzySystem, GaParams, Trapezoid, default_system, ga_tune, infer, trap_mu
from .gwo import GwoParams, gwo_minimize
from .pipeline import PipelineConfig, TrainedBundle, Verdict, evaluate, resample, run_inference, train_bundle
from .synth import (EventLabel, SweepConfig, SynthParams, WaveformRecord, add_noise, apply_ct_saturation,
                    build_corpus, synth_fault, synth_hif, synth_steady, synth_switching)
from .trends import FeatureSpec, aggregate_segments, clt, extract_all, extract_selected, linregress, pearson_r

__version__ = "0.1.0"
