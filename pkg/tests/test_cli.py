import csv
import json
import re
import subprocess
import sys

import numpy as np
import pytest

from gdaids import project_gda
from gdaids.cli import main
from gdaids.persist import atomic_write, load
from gdaids.pipeline import CSV_COLUMNS, FIGURES, strip_timings
from gdaids.synthetic import kdd_like_lines, write_rings_corpus


@pytest.fixture
def corpus(tmp_path):
    return write_rings_corpus(tmp_path / "data", n=120)


def run(cfg, out, *extra, command="run"):
    return main([command, "--config", str(cfg), "--out", str(out), *extra])


def test_stepwise_commands(corpus, tmp_path, capsys):
    out = tmp_path / "out"
    assert run(corpus, out, command="ingest") == 0
    printed = capsys.readouterr().out
    assert "train: 60 rows" in printed and "Normal 30" in printed
    for name in ("train.npz", "test.npz", "encoder.npz", "ingest_summary.json"):
        assert (out / name).is_file()

    assert run(corpus, out, "--set", "reducer.kind=gda", command="reduce") == 0
    summary = json.loads(capsys.readouterr().out)
    assert summary["tag"] == "GDADATA" and summary["components"] == 1
    assert (out / "GDADATA_train.npz").is_file() and (out / "reducer.npz").is_file()

    assert run(corpus, out, "--set", "reducer.kind=gda", command="train-eval") == 0
    report = json.loads((out / "report.json").read_text())
    assert report["schema"] == "gdaids-report/1"
    assert report["variant"] == "GDA/C4.5"
    assert np.sum(report["confusion_matrix"]["counts"]) == 60
    for cls in report["classes"][:2]:
        assert all(cls[k] is not None for k in ("detection_rate", "far_tabular",
                                                 "far_textual", "precision"))
    assert set(report["timings"]) == {"reduce_fit_s", "train_s", "test_s", "test_per_class_s"}
    for name in ("classifier.npz", "confusion.txt", "report.csv", *FIGURES):
        assert (out / name).is_file()


def test_train_eval_needs_reduce(corpus, tmp_path):
    assert run(corpus, tmp_path / "empty", command="train-eval") == 3


def test_origdata_keeps_all_41_features(tmp_path):
    atomic_write(tmp_path / "train.csv", kdd_like_lines(150, seed=1))
    atomic_write(tmp_path / "test.csv", kdd_like_lines(60, seed=2))
    cfg = tmp_path / "kdd.cfg"
    cfg.write_text("paths.train=train.csv\npaths.test=test.csv\n")
    assert run(cfg, tmp_path / "out") == 0
    ds = load(tmp_path / "out" / "ORIGDATA_train.npz")
    assert ds.tag == "ORIGDATA"
    assert len(ds.original_features()) == 41
    report = json.loads((tmp_path / "out" / "report.json").read_text())
    assert [c["name"] for c in report["classes"]] == ["Normal", "DOS", "R2L", "U2R", "Probe"]


def test_lda_select_mode_and_mlp(tmp_path):
    atomic_write(tmp_path / "train.csv", kdd_like_lines(200, seed=3))
    atomic_write(tmp_path / "test.csv", kdd_like_lines(80, seed=4))
    cfg = tmp_path / "kdd.cfg"
    cfg.write_text("paths.train=train.csv\npaths.test=test.csv\nreducer.kind=lda\n"
                   "reducer.mode=select\nreducer.select_k=17\nclassifier.kind=mlp\n"
                   "classifier.mlp.epochs=5\n")
    assert run(cfg, tmp_path / "out") == 0
    summary = json.loads((tmp_path / "out" / "reduce_summary.json").read_text())
    assert len(summary["selected_features"]) == 17
    ds = load(tmp_path / "out" / "LDADATA_train.npz")
    assert sorted(ds.original_features()) == sorted(summary["selected_features"])
    assert json.loads((tmp_path / "out" / "report.json").read_text())["variant"] == "LDA/ANN"


def test_gda_reload_matches_persisted_projection(corpus, tmp_path):
    out = tmp_path / "out"
    assert run(corpus, out, "--set", "reducer.kind=gda") == 0
    model = load(out / "reducer.npz")
    test = load(out / "test.npz")
    reduced = load(out / "GDADATA_test.npz")
    assert np.abs(project_gda(model, test.X) - reduced.X).max() <= 1e-12


def test_repeat_runs_identical_apart_from_timings(corpus, tmp_path):
    out = tmp_path / "out"
    texts = []
    for _ in range(2):
        assert run(corpus, out, "--set", "reducer.kind=gda", "--seed", "3") == 0
        report = json.loads((out / "report.json").read_text())
        texts.append(json.dumps(strip_timings(report), sort_keys=True))
    assert texts[0] == texts[1]


def test_report_command_outputs(corpus, tmp_path, capsys):
    for kind in ("gda", "lda"):
        assert run(corpus, tmp_path / kind, "--set", f"reducer.kind={kind}") == 0
    capsys.readouterr()
    cmp = tmp_path / "cmp"
    assert main(["report", str(tmp_path / "gda" / "report.json"),
                 str(tmp_path / "lda" / "report.json"), "--out", str(cmp)]) == 0
    for fname in FIGURES:
        svg = (cmp / fname).read_text()
        ids = re.findall(r'id="bar_(\d+)_(\d+)"', svg)
        assert len(ids) == 10
        assert {s for s, _ in ids} == {"0", "1"} and {c for _, c in ids} == set("01234")
        assert "GDA/C4.5" in svg and "LDA/C4.5" in svg
    with open(cmp / "comparison.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == CSV_COLUMNS == ("class", "variant", "DR", "FAR_tabular",
                                             "FAR_textual", "train_s", "test_s")
    assert len(rows) == 11


def test_env_var_sets_output_dir(corpus, tmp_path, monkeypatch):
    monkeypatch.setenv("GDAIDS_OUT", str(tmp_path / "envout"))
    assert main(["ingest", "--config", str(corpus)]) == 0
    assert (tmp_path / "envout" / "train.npz").is_file()


def test_exit_codes(corpus, tmp_path):
    assert main(["run", "--config", str(tmp_path / "missing.cfg")]) == 2
    assert run(corpus, tmp_path / "o1", "--set", "reducer.kind=pca") == 2
    assert run(corpus, tmp_path / "o2", "--set", "bogus.key=1") == 2
    bad = corpus.parent / "train.csv"
    lines = bad.read_text().splitlines()
    lines[4] = "1.0,normal."
    bad.write_text("\n".join(lines) + "\n")
    assert run(corpus, tmp_path / "o3") == 3
    # every training row identical: the centered kernel vanishes
    bad.write_text("0.5,0.5,normal.\n0.5,0.5,smurf.\n0.5,0.5,normal.\n0.5,0.5,smurf.\n")
    assert run(corpus, tmp_path / "o4", "--set", "reducer.kind=gda") == 4


def test_console_entry_point(corpus, tmp_path):
    proc = subprocess.run([sys.executable, "-m", "gdaids", "run", "--config", str(corpus),
                           "--out", str(tmp_path / "sp"), "--set", "bogus=1"],
                          capture_output=True, text=True)
    assert proc.returncode == 2
    assert "unknown config key" in proc.stderr
