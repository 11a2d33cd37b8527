import csv
import json

import pytest

from pvrelay.cli import EXIT_CONFIG, EXIT_DATA, EXIT_TRAIN, main

SMALL_CONFIG = """
sweep.fault_resistances = 0.01, 10
sweep.fault_angles = 0, 150
sweep.switching_angles = 0, 150
sweep.switching_buses = bus8
sweep.switching_ratings = 1, 3
pipeline.gwo_population = 8
pipeline.gwo_iterations = 10
pipeline.grid_n_estimators = 10
pipeline.grid_min_samples_split = 2
pipeline.grid_max_depth = none
pipeline.cv_folds = 3
pipeline.ga_population = 6
pipeline.ga_generations = 2
pipeline.rank_trees = 10
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out.strip().splitlines()
    return code, (json.loads(out[-1]) if code == 0 else None)


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    (root / "small.cfg").write_text(SMALL_CONFIG)
    return root


@pytest.fixture(scope="module")
def generated(workspace):
    code = main(["generate", "--out", str(workspace / "corpus"), "--config", str(workspace / "small.cfg"),
                 "--seed", "3"])
    assert code == 0
    return workspace


@pytest.fixture(scope="module")
def bundle(generated):
    ws = generated
    code = main(["train", "--corpus", str(ws / "corpus"), "--out", str(ws / "bundle.txt"),
                 "--config", str(ws / "small.cfg"), "--seed", "1"])
    assert code == 0
    return ws / "bundle.txt"


def test_generate_summary(workspace, capsys):
    code, summary = run(capsys, "generate", "--out", str(workspace / "g2"), "--config",
                        str(workspace / "small.cfg"), "--steady", "2", "--noise", "30")
    assert code == 0 and summary["command"] == "generate" and summary["status"] == "ok"
    assert summary["kinds"]["Steady"] == 2 and summary["records"] == sum(summary["kinds"].values())


def test_tune_gamma(generated, capsys):
    code, summary = run(capsys, "tune-gamma", "--corpus", str(generated / "corpus"), "--config",
                        str(generated / "small.cfg"), "--out", str(generated / "gamma.csv"))
    assert code == 0 and 0.0 < summary["gamma"] < 1.0
    assert (generated / "gamma.csv").read_text().startswith("iter,best_gamma,best_fitness")


def test_extract_and_rank(generated, capsys):
    code, summary = run(capsys, "extract", "--corpus", str(generated / "corpus"), "--out",
                        str(generated / "f.csv"), "--all", "--gamma", "0.03")
    assert code == 0 and summary["features"] == 195
    with open(generated / "f.csv") as fh:
        rows = list(csv.reader(fh))
    assert len(rows) == summary["windows"] + 1 and len(rows[0]) == 3 + 195
    code, summary = run(capsys, "rank-features", "--corpus", str(generated / "corpus"), "--config",
                        str(generated / "small.cfg"), "--gamma", "0.03")
    assert code == 0 and len(summary["top"]) == 5


def test_train_evaluate_infer_replay(bundle, capsys, tmp_path):
    ws = bundle.parent
    assert (ws / "bundle.txt.report.txt").read_text().startswith("pvrelay training report")
    code, summary = run(capsys, "evaluate", "--bundle", str(bundle), "--corpus", str(ws / "corpus"),
                        "--out-dir", str(tmp_path / "ev"), "--latency", str(tmp_path / "lat.csv"))
    assert code == 0 and summary["records"] > 0
    for name in ("detect", "zone", "phase"):
        with open(tmp_path / "ev" / f"confusion_{name}.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0][0] == "true\\pred"
        assert all(sum(int(v) for v in row[1:]) >= 0 for row in rows[1:])
    with open(tmp_path / "ev" / "confusion_detect.csv") as fh:
        total = sum(int(v) for row in list(csv.reader(fh))[1:] for v in row[1:])
    assert total == summary["records"]

    code, summary = run(capsys, "infer", "--bundle", str(bundle), "--corpus", str(ws / "corpus"), "--index", "0")
    assert code == 0 and set(summary["verdict"]) >= {"triggered", "is_fault", "zone", "trip", "phases"}
    code, summary = run(capsys, "infer", "--bundle", str(bundle), "--record", str(ws / "corpus" / "rec_000000.csv"))
    assert code == 0

    code, summary = run(capsys, "replay", "--bundle", str(bundle), "--corpus", str(ws / "corpus"),
                        "--workers", "3", "--log", str(tmp_path / "log.jsonl"))
    assert code == 0 and "detect" in summary["p99_us"]
    lines = (tmp_path / "log.jsonl").read_text().splitlines()
    assert [json.loads(line)["index"] for line in lines] == list(range(summary["records"]))


def test_replay_matches_serial(bundle, capsys, tmp_path):
    ws = bundle.parent
    for workers in ("1", "4"):
        main(["replay", "--bundle", str(bundle), "--corpus", str(ws / "corpus"), "--workers", workers,
              "--log", str(tmp_path / f"log{workers}.jsonl")])
    capsys.readouterr()
    assert (tmp_path / "log1.jsonl").read_text() == (tmp_path / "log4.jsonl").read_text()


class TestExitCodes:
    def test_bad_config(self, tmp_path, capsys):
        (tmp_path / "bad.cfg").write_text("pipeline.fusion = xor\n")
        assert main(["generate", "--out", str(tmp_path / "x"), "--config", str(tmp_path / "bad.cfg")]) == EXIT_CONFIG
        (tmp_path / "unknown.cfg").write_text("detector.gamma = 0.1\n")
        assert main(["generate", "--out", str(tmp_path / "x"), "--config", str(tmp_path / "unknown.cfg")]) \
            == EXIT_CONFIG

    def test_missing_corpus(self, tmp_path, capsys):
        assert main(["tune-gamma", "--corpus", str(tmp_path / "nowhere")]) == EXIT_DATA

    def test_corrupt_bundle(self, generated, tmp_path, capsys):
        (tmp_path / "b.txt").write_text("not a bundle\n")
        assert main(["infer", "--bundle", str(tmp_path / "b.txt"), "--corpus", str(generated / "corpus")]) \
            == EXIT_DATA

    def test_index_out_of_range(self, bundle, capsys):
        assert main(["infer", "--bundle", str(bundle), "--corpus", str(bundle.parent / "corpus"),
                     "--index", "99999"]) == EXIT_DATA

    def test_training_error(self, generated, tmp_path, capsys):
        cfg = tmp_path / "sw.cfg"
        cfg.write_text(SMALL_CONFIG + "sweep.include_faults = false\n")
        assert main(["generate", "--out", str(tmp_path / "sw"), "--config", str(cfg)]) == 0
        assert main(["train", "--corpus", str(tmp_path / "sw"), "--out", str(tmp_path / "b.txt"),
                     "--config", str(cfg)]) == EXIT_TRAIN
