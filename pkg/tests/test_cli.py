import json
import re

import pytest
from click.testing import CliRunner

from conftest import EXPERIMENT, FIXTURES, TABLE4
from fusionbench.cli import cli
from fusionbench.io import read_predictions, read_report

NUMBER = re.compile(r"-?\d+(?:\.\d+)?(?:e[-+]?\d+)?")


@pytest.fixture
def run(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)

    def invoke(*args):
        return CliRunner().invoke(cli, [str(a) for a in args])

    return invoke


def rows(output):
    return [line.split(",") for line in output.splitlines() if line and not line.startswith("#")]


class TestMetrics:
    def test_table4_values(self, run):
        r = run("metrics", "--cm", TABLE4)
        assert r.exit_code == 0, r.output
        got = {k: float(v) for k, v in rows(r.stdout)[1:]}
        want = {"REC": 0.9458, "PREC": 0.9458, "SPEC": 0.9964, "ACC": 0.9932, "MCC": 0.9421, "F1": 0.9458}
        for k, v in want.items():
            assert got[k] == pytest.approx(v, abs=1e-4)
        assert got["RK"] == pytest.approx(0.9398, abs=1e-4)

    def test_printed_numbers_are_in_report(self, run, tmp_path):
        r = run("metrics", "--cm", TABLE4, "--per-class", "--report", tmp_path / "m.json")
        assert r.exit_code == 0, r.output
        report = (tmp_path / "m.json").read_text()
        for n in NUMBER.findall(r.stdout):
            assert n in report, n

    def test_macro_and_csv(self, run, tmp_path):
        r = run("metrics", "--cm", TABLE4, "--aggregate", "macro", "--csv", tmp_path / "m.csv")
        assert r.exit_code == 0
        assert (tmp_path / "m.csv").read_text().startswith("scenario,model,test,REC")

    def test_from_predictions(self, run):
        r = run("metrics", "--predictions", FIXTURES / "small.csv")
        assert r.exit_code == 0 and rows(r.stdout)[0] == ["metric", "value"]

    def test_needs_exactly_one_input(self, run):
        assert run("metrics").exit_code == 1
        assert run("metrics", "--cm", TABLE4, "--predictions", FIXTURES / "small.csv").exit_code == 1


class TestErrors:
    def test_curves_without_probabilities(self, run, tmp_path):
        r = run("curves", "--predictions", FIXTURES / "labels_only.csv", "--positive", "cat", "--out-dir", tmp_path)
        assert r.exit_code == 1
        assert "probabilit" in r.stderr

    def test_json_errors(self, run, tmp_path):
        bad = FIXTURES / "bad" / "cm_negative.cm"
        r = run("--json-errors", "metrics", "--cm", bad)
        assert r.exit_code == 1
        doc = json.loads(r.stderr.strip().splitlines()[-1])
        assert doc["error"] == "ParseError" and doc["exit_code"] == 1
        assert doc["file"] == str(bad) and doc["line"] == 3

    def test_missing_file(self, run):
        r = run("--json-errors", "metrics", "--cm", "nope.cm")
        assert r.exit_code == 1
        assert "not found" in json.loads(r.stderr.strip().splitlines()[-1])["message"]

    def test_usage_error(self, run):
        assert run("metrics", "--bogus").exit_code == 1

    def test_training_divergence_is_exit_2(self, run, tmp_path):
        a = FIXTURES / "experiment" / "member_a_train.csv"
        b = FIXTURES / "experiment" / "member_b_train.csv"
        r = run("fuse", "train", "--member", a, "--member", b, "--out", tmp_path / "h.json",
                "--lr", "1e200", "--epochs", "5")
        assert r.exit_code == 2, r.output
        assert "diverged" in r.stderr


class TestMatrix:
    def test_empty_manifest(self, run, tmp_path):
        r = run("matrix", "--manifest", EXPERIMENT / "empty_manifest.json", "--out-dir", tmp_path / "o")
        assert r.exit_code == 0, r.output
        results, header = read_report(tmp_path / "o" / "report.json")
        assert results == [] and header["seed"] == 0
        assert r.stdout == "scenario,model,test,REC,PREC,SPEC,ACC,MCC,F1\n"

    def test_fixture_manifest(self, run, tmp_path):
        r = run("matrix", "--manifest", EXPERIMENT / "manifest.json", "--out-dir", tmp_path / "o", "--jobs", "2")
        assert r.exit_code == 0, r.output
        assert len(rows(r.stdout)) == 7
        assert (tmp_path / "o" / "report.csv").read_text() == r.stdout
        assert (tmp_path / "o" / "T3__pair_test__roc.svg").exists()

    def test_bad_manifest(self, run):
        r = run("--json-errors", "matrix", "--manifest", FIXTURES / "bad" / "manifest_duplicate.json")
        assert r.exit_code == 1
        assert json.loads(r.stderr.strip().splitlines()[-1])["line"] == 2


def test_collapse(run, tmp_path):
    r = run("collapse", "--cm", TABLE4, "--positive", "polyps", "--out", tmp_path / "c.cm")
    assert r.exit_code == 0, r.output
    text = (tmp_path / "c.cm").read_text()
    assert "polyps,358,65" in text and "non-polyps,16,8301" in text


def test_curves(run, tmp_path):
    r = run("curves", "--predictions", FIXTURES / "small.csv", "--positive", "cat", "--out-dir", tmp_path)
    assert r.exit_code == 0, r.output
    assert rows(r.stdout)[0] == ["curve", "auc", "baseline", "csv", "figure"]
    assert (tmp_path / "small__roc.csv").exists() and (tmp_path / "small__prc.svg").exists()


def test_hexagon(run, tmp_path):
    run("metrics", "--cm", TABLE4, "--report", tmp_path / "m.json")
    r = run("hexagon", "--report", tmp_path / "m.json", "--min", "0.75", "--out", tmp_path / "h.svg")
    assert r.exit_code == 0, r.output
    assert "<svg" in (tmp_path / "h.svg").read_text()
    assert run("hexagon", "--report", tmp_path / "m.json", "--min", "1", "--out", tmp_path / "x.svg").exit_code == 1


def test_fuse_round(run, tmp_path):
    e = EXPERIMENT
    train = ["--member", e / "member_a_train.csv", "--member", e / "member_b_train.csv"]
    test = ["--member", e / "member_a_test.csv", "--member", e / "member_b_test.csv"]
    r = run("fuse", "train", *train, "--out", tmp_path / "h.json", "--hidden", "6", "--epochs", "5")
    assert r.exit_code == 0, r.output
    assert rows(r.stdout)[0] == ["epoch", "mean_loss"] and len(rows(r.stdout)) == 6
    assert run("fuse", "apply", "--head", tmp_path / "h.json", *test, "--out", tmp_path / "p.csv").exit_code == 0
    assert len(read_predictions(tmp_path / "p.csv")) == 40
    assert run("fuse", "average", *test, "--out", tmp_path / "avg.csv").exit_code == 0
    assert run("fuse", "select", *test).exit_code == 0


def test_boost_round(run, tmp_path):
    e = EXPERIMENT
    r = run("boost", "train", "--arff", e / "features_train.arff", "--out", tmp_path / "m.json",
            "--max-iter", "20", "--folds", "3")
    assert r.exit_code == 0, r.output
    r = run("boost", "predict", "--model", tmp_path / "m.json", "--arff", e / "features_test.arff",
            "--out", tmp_path / "p.csv")
    assert r.exit_code == 0, r.output
    assert len(read_predictions(tmp_path / "p.csv")) == 40


def test_summary(run):
    r = run("summary", "--counts", "medico=423:8317", "--counts", "cvc=10025:1929")
    assert r.exit_code == 0, r.output
    body = rows(r.stdout)
    assert float(body[1][-1]) == pytest.approx(0.0484, abs=2e-4)
    assert float(body[2][-1]) == pytest.approx(0.8386, abs=1e-4)


def test_version(run):
    r = run("--version")
    assert r.exit_code == 0 and "fusionbench" in r.stdout
