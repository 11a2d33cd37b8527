"""Compare the numba kernels against the pure-numpy fallback.

Each path runs in its own interpreter because the kernel binding is chosen
at import time from ``PVRELAY_DISABLE_NUMBA``.  Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

The numba timings exclude compilation: every workload runs once as warm-up
before the timed repeats.
"""
import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _workloads():
    from pvrelay import kernels
    from pvrelay.detector import ed_traces
    from pvrelay.forest import ForestHyper, fit_forest
    from pvrelay.fuzzy import default_system
    from pvrelay.synth import EventLabel, SynthParams, apply_ct_saturation, synth_fault

    params = SynthParams(record_cycles=20)
    rec = synth_fault(EventLabel("Fault", "abcg", "f4", 0.01, 0.0, "P"), params, seed=3)
    rng = np.random.default_rng(0)
    X = rng.uniform(-1.0, 1.0, size=(1500, 3))
    y = np.where(X[:, 0] + 0.5 * X[:, 1] > 0.1, "fault", "non-fault")
    forest = fit_forest(X, y, ForestHyper(n_estimators=20, max_depth=10), seed=1)
    fz = default_system()
    Xf = rng.uniform(-1.0, 1.0, size=(500, 3))
    return kernels.USE_NUMBA, {
        "ed_trace (20-cycle record)": lambda: ed_traces(rec.currents, rec.samples_per_cycle),
        "fit_forest (20 trees, 1500x3)": lambda: fit_forest(X, y, ForestHyper(20, 2, 10), seed=1),
        "forest predict (1500 rows)": lambda: forest.predict_batch(X),
        "fuzzy infer (500 rows)": lambda: fz.infer_batch(Xf),
        "ct saturation (20 ohm)": lambda: apply_ct_saturation(rec, 20.0),
    }


def _worker(repeat: int) -> None:
    numba_on, work = _workloads()
    out = {"numba": numba_on, "timings_ms": {}}
    for name, fn in work.items():
        fn()
        runs = []
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            runs.append((time.perf_counter() - t0) * 1e3)
        out["timings_ms"][name] = float(np.median(runs))
    print(json.dumps(out))


def _run(disable: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env["PVRELAY_DISABLE_NUMBA"] = "1" if disable else "0"
    res = subprocess.run([sys.executable, __file__, "--worker", "--repeat", str(repeat)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write results to this file")
    ap.add_argument("--worker", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)
    if args.worker:
        _worker(args.repeat)
        return 0
    fast = _run(False, args.repeat)
    slow = _run(True, args.repeat)
    if not fast["numba"]:
        print("numba unavailable: both columns use the numpy kernels")
    print(f"{'workload':34s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    rows = {}
    for name, t_fast in fast["timings_ms"].items():
        t_slow = slow["timings_ms"][name]
        rows[name] = {"numba_ms": t_fast, "numpy_ms": t_slow, "speedup": t_slow / t_fast}
        print(f"{name:34s} {t_fast:10.3f} {t_slow:10.3f} {t_slow / t_fast:8.1f}")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump(rows, fh, indent=2)
    return 0


if __name__ == "__main__":
    sys.exit(main())
