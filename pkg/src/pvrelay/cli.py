"""Command line interface: ``pvrelay <command> [options]``.

Every command accepts ``--seed`` and ``--config`` and finishes by printing
one JSON summary line on stdout.  Exit codes: 0 success, 2 configuration
error, 3 data error, 4 training error.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import trends
from .corpus import CorpusFormatError, infer_sample_rate, read_corpus, read_waveform, write_corpus
from .detector import DetectorConfig, tune_gamma
from .forest import ForestHyper, ModelFormatError, rank_features
from .fuzzy import FuzzyError
from .gwo import GwoParams
from .pipeline import (InferenceError, PipelineConfig, TrainedBundle, TrainingError, _capture_all,
                       evaluate, filter_records, latency_table, run_inference, train_bundle,
                       write_latency_csv)
from .synth import EventLabel, SweepConfig, SynthError, SynthParams, WaveformRecord, build_corpus

EXIT_CONFIG, EXIT_DATA, EXIT_TRAIN = 2, 3, 4


class _Settings:
    def __init__(self, path):
        values = cfgmod.load(path) if path else {}
        cfgmod.check_known(values)
        self.synth = cfgmod.apply(SynthParams(), "synth", values)
        self.sweep = cfgmod.apply(SweepConfig(), "sweep", values)
        self.pipeline = cfgmod.apply(PipelineConfig(), "pipeline", values)
        try:
            self.synth.validate()
        except SynthError as exc:
            raise cfgmod.ConfigError(str(exc)) from None


def _summary(command, **fields):
    print(json.dumps({"command": command, "status": "ok", **fields}, sort_keys=True))


def _pipeline_overrides(args, base: PipelineConfig) -> PipelineConfig:
    import dataclasses
    upd = {}
    for name in ("window_cycles", "fusion", "gamma", "trigger_policy"):
        val = getattr(args, name, None)
        if val is not None:
            upd[name] = val
    try:
        return dataclasses.replace(base, **upd)
    except ValueError as exc:
        raise cfgmod.ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# commands


def cmd_generate(args, st: _Settings):
    sweep = SweepConfig.full_grid() if args.grid == "full" else st.sweep
    if args.hif:
        sweep.include_hif = True
    if args.steady is not None:
        sweep.steady_count = args.steady
    params = st.synth
    if args.noise is not None:
        params.noise_snr_db = args.noise
    if args.ct_burden is not None:
        params.ct_burden_ohm = args.ct_burden
    corpus = build_corpus(sweep, args.seed, params)
    write_corpus(corpus, args.out)
    kinds = {}
    for r in corpus:
        kinds[r.label.kind] = kinds.get(r.label.kind, 0) + 1
    _summary("generate", records=len(corpus), kinds=kinds, out=str(args.out))


def cmd_tune_gamma(args, st: _Settings):
    corpus = read_corpus(args.corpus)
    p = st.pipeline
    res = tune_gamma(corpus, GwoParams(population=p.gwo_population, max_iter=p.gwo_iterations, seed=args.seed),
                     trigger_policy=args.trigger_policy or p.trigger_policy,
                     denominator=args.denominator or p.gamma_denominator)
    if args.out:
        res.write_csv(args.out)
    _summary("tune-gamma", gamma=res.gamma, fitness=res.fitness)


def _windows(corpus, st: _Settings, args):
    p = _pipeline_overrides(args, st.pipeline)
    m = corpus[0].samples_per_cycle
    gamma = p.gamma if p.gamma is not None else DetectorConfig().gamma
    cap = _capture_all(corpus, DetectorConfig(m, gamma, p.trigger_policy), p.window_cycles)
    return cap, [corpus[i].label for i in cap.rows]


def cmd_extract(args, st: _Settings):
    corpus = read_corpus(args.corpus)
    cap, labels = _windows(corpus, st, args)
    specs = trends.full_registry() if args.all else list(trends.DEFAULT_SPECS)
    specs = [s for s in specs if cap.windows.shape[2] >= s.min_length()]
    X = trends.extract_matrix(cap.windows, specs)
    trends.write_feature_csv(args.out, X, labels, specs)
    registry = Path(str(args.out) + ".registry.csv")
    trends.write_registry(registry, specs)
    _summary("extract", windows=len(labels), features=len(specs), out=str(args.out), registry=str(registry))


def cmd_rank(args, st: _Settings):
    corpus = read_corpus(args.corpus)
    cap, labels = _windows(corpus, st, args)
    specs = [s for s in trends.full_registry() if cap.windows.shape[2] >= s.min_length()]
    X = trends.extract_matrix(cap.windows, specs)
    y = ["fault" if lab.is_fault else "non-fault" for lab in labels]
    ranking = rank_features(X, y, specs, ForestHyper(st.pipeline.rank_trees), args.seed)
    if args.out:
        ranking.write_csv(args.out)
    _summary("rank-features", top=[s.name for s, _ in ranking.ranked[:5]],
             top_family=ranking.families[0][0] if ranking.families else None)


def cmd_train(args, st: _Settings):
    corpus = read_corpus(args.corpus)
    p = _pipeline_overrides(args, st.pipeline)
    bundle, report = train_bundle(corpus, p, args.seed)
    bundle.save(args.out)
    report_path = Path(args.report) if args.report else Path(str(args.out) + ".report.txt")
    report_path.write_text(report.to_text())
    _summary("train", bundle=str(args.out), report=str(report_path), gamma=bundle.gamma,
             holdout=report.holdout)


def cmd_evaluate(args, st: _Settings):
    bundle = TrainedBundle.load(args.bundle)
    corpus = filter_records(read_corpus(args.corpus), noise=args.noise, ct_burden=args.ct_burden, kind=args.kind)
    if not corpus:
        raise InferenceError("no records left after filtering")
    rep = evaluate(corpus, bundle)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.txt").write_text(rep.to_text())
    for name, cm in (("detect", rep.detect_confusion), ("zone", rep.zone_confusion),
                     ("phase", rep.phase_confusion)):
        if cm is not None:
            cm.write_csv(out / f"confusion_{name}.csv")
    if args.latency:
        verdicts = [run_inference(r, bundle) for r in corpus]
        write_latency_csv(args.latency, latency_table(verdicts))
    _summary("evaluate", **rep.summary(), out_dir=str(out))


def _load_record(path) -> WaveformRecord:
    wave = read_waveform(path)
    fs = infer_sample_rate(wave, path)
    return WaveformRecord(wave[1], wave[2], wave[3], EventLabel("Steady"), 0, fs, 60.0, {})


def cmd_infer(args, st: _Settings):
    bundle = TrainedBundle.load(args.bundle)
    if args.record:
        rec = _load_record(args.record)
    else:
        corpus = read_corpus(args.corpus)
        if not 0 <= args.index < len(corpus):
            raise InferenceError(f"index {args.index} outside corpus of {len(corpus)} records")
        rec = corpus[args.index]
    v = run_inference(rec, bundle)
    _summary("infer", verdict=v.as_dict(), timings_us={k: round(t, 3) for k, t in v.timings.items()})


def cmd_replay(args, st: _Settings):
    bundle = TrainedBundle.load(args.bundle)
    corpus = read_corpus(args.corpus)
    with ThreadPoolExecutor(max_workers=max(1, args.workers)) as pool:
        verdicts = list(pool.map(lambda r: run_inference(r, bundle), corpus))
    if args.log:
        with open(args.log, "w") as fh:
            for i, v in enumerate(verdicts):
                fh.write(json.dumps({"index": i, **v.as_dict()}, sort_keys=True) + "\n")
    rows = latency_table(verdicts)
    if args.latency:
        write_latency_csv(args.latency, rows)
    _summary("replay", records=len(verdicts), trips=sum(v.trip for v in verdicts),
             p99_us={r[0]: round(r[3], 3) for r in rows})


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pvrelay", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--config", help="flat key = value config file")
        p.set_defaults(func=func)
        return p

    def window_opts(p):
        p.add_argument("--gamma", type=float)
        p.add_argument("--window-cycles", dest="window_cycles", type=float)
        p.add_argument("--trigger-policy", dest="trigger_policy", choices=("any-phase", "all-phases"))

    p = add("generate", cmd_generate, "write a synthetic corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--grid", choices=("desk", "full"), default="desk")
    p.add_argument("--hif", action="store_true", help="add high impedance faults")
    p.add_argument("--steady", type=int, help="number of steady records")
    p.add_argument("--noise", type=float, help="SNR in dB")
    p.add_argument("--ct-burden", dest="ct_burden", type=float, help="CT burden in ohm")

    p = add("tune-gamma", cmd_tune_gamma, "tune the trigger threshold")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", help="trace CSV")
    p.add_argument("--trigger-policy", dest="trigger_policy", choices=("any-phase", "all-phases"))
    p.add_argument("--denominator", choices=("total", "triggered"))

    p = add("extract", cmd_extract, "export the feature matrix CSV")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--all", action="store_true", help="full 195-feature bank")
    window_opts(p)

    p = add("rank-features", cmd_rank, "rank the full feature bank")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out")
    window_opts(p)

    p = add("train", cmd_train, "train a relay bundle")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.add_argument("--fusion", choices=("fuzzy-only", "forest-only", "and", "or"))
    window_opts(p)

    p = add("evaluate", cmd_evaluate, "score a bundle on a labelled corpus")
    p.add_argument("--bundle", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--noise", type=float)
    p.add_argument("--ct-burden", dest="ct_burden", type=float)
    p.add_argument("--kind")
    p.add_argument("--latency", help="write per-stage latency CSV")

    p = add("infer", cmd_infer, "verdict for one record")
    p.add_argument("--bundle", required=True)
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--record", help="waveform CSV with t,ia,ib,ic")
    grp.add_argument("--corpus")
    p.add_argument("--index", type=int, default=0)

    p = add("replay", cmd_replay, "stream a corpus through inference")
    p.add_argument("--bundle", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--log")
    p.add_argument("--latency")
    p.add_argument("--workers", type=int, default=1)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        st = _Settings(args.config)
        np.seterr(all="ignore")
        args.func(args, st)
    except cfgmod.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CorpusFormatError, ModelFormatError, FuzzyError, InferenceError, FileNotFoundError,
            SynthError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except TrainingError as exc:
        print(f"training error: {exc}", file=sys.stderr)
        return EXIT_TRAIN
    return 0


if __name__ == "__main__":
    sys.exit(main())
