import json
from dataclasses import replace

import pytest

from conftest import EXPERIMENT
from fusionbench.harness import run_matrix, run_scenario, scenario_seed
from fusionbench.io import load_manifest, write_report
from fusionbench.io.report import report_json


@pytest.fixture(scope="module")
def manifest():
    return load_manifest(EXPERIMENT / "manifest.json")


@pytest.fixture(scope="module")
def results(manifest):
    return run_matrix(manifest, seed=0)


def without_timing(text):
    doc = json.loads(text)
    for s in doc["scenarios"]:
        s.pop("timing")
    return json.dumps(doc, indent=2)


def by_key(results):
    return {r.key: r for r in results}


def test_result_order_and_keys(results):
    assert [r.key for r in results] == [
        "T1:medico_cm", "T2:medico_cm", "T3:pair_test", "T4:pair_test", "T4:pair_train", "T5:feats_test"]


def test_t1_reproduces_pooled_row(results):
    h = by_key(results)["T1:medico_cm"].hexagon
    for got, want in zip(h.values(), (0.9458, 0.9458, 0.9964, 0.9932, 0.9421, 0.9458)):
        assert got == pytest.approx(want, abs=1e-4)


def test_t2_binary_collapse(results):
    r = by_key(results)["T2:medico_cm"]
    assert r.labels == ("polyps", "non-polyp")
    assert r.aggregation == "binary:polyps"
    assert r.confusion == ((358, 65), (16, 8301))
    got = sorted([r.hexagon.rec, r.hexagon.prec])
    assert got == pytest.approx([0.8463, 0.9572], abs=1e-4)
    assert r.hexagon.mcc == pytest.approx(0.8954, abs=1e-3)
    assert r.hexagon.rk == pytest.approx(r.hexagon.mcc, abs=1e-12)


def test_average_curves(results):
    r = by_key(results)["T3:pair_test"]
    assert r.curves["positive"] == "polyps"
    assert 0.5 < r.curves["roc"]["auc"] <= 1.0
    assert r.curves["prc"]["baseline"] == pytest.approx(sum(r.confusion[0]) / sum(map(sum, r.confusion)))


def test_trained_models_beat_chance(results):
    for key in ("T4:pair_test", "T5:feats_test"):
        r = by_key(results)[key]
        assert r.hexagon.acc > 1 / len(r.labels)


def test_same_seed_identical_reports(manifest, results):
    again = run_matrix(manifest, seed=0)
    assert again == results
    assert without_timing(report_json(again, seed=0)) == without_timing(report_json(results, seed=0))


def test_written_files_identical_modulo_timing(manifest, tmp_path):
    for run in ("a", "b"):
        write_report(run_matrix(manifest, seed=3), tmp_path / f"{run}.json", tmp_path / f"{run}.csv", seed=3)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    a, b = ((tmp_path / f"{x}.json").read_text() for x in "ab")
    assert without_timing(a) == without_timing(b)


def test_removal_touches_only_its_entry(manifest, results):
    full = by_key(results)
    for name in ("T1", "T3", "T4"):
        part = by_key(run_matrix(manifest.without(name), seed=0))
        assert part == {k: v for k, v in full.items() if not k.startswith(name + ":")}


def test_order_independent(manifest, results):
    shuffled = replace(manifest, scenarios=tuple(reversed(manifest.scenarios)))
    assert by_key(run_matrix(shuffled, seed=0)) == by_key(results)


def test_parallel_matches_serial(manifest, results):
    assert run_matrix(manifest, seed=0, jobs=3) == results


def test_different_seed_changes_trained_only(manifest, results):
    other = by_key(run_matrix(manifest, seed=1))
    for k, r in by_key(results).items():
        if r.model in ("precomputed", "average"):
            assert replace(other[k], seed=r.seed) == r


def test_scenario_seed():
    assert scenario_seed(0, "T4") == scenario_seed(0, "T4")
    assert scenario_seed(0, "T4") != scenario_seed(0, "T5")
    assert scenario_seed(0, "T4") != scenario_seed(1, "T4")


def test_curve_artifacts(manifest, tmp_path):
    spec = next(s for s in manifest.scenarios if s.name == "T3")
    (r,) = run_scenario(manifest, spec, 0, out_dir=tmp_path)
    for kind in ("roc", "prc"):
        assert (tmp_path / r.curves[kind]["csv"]).read_text().startswith(f"# curve={kind}\n")
        assert (tmp_path / r.curves[kind]["svg"]).stat().st_size > 0


def test_timing_recorded(results):
    assert all(set(r.timing) == {"train_s", "eval_s"} for r in results)
