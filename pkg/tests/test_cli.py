import json
from pathlib import Path

import pytest
from jsonschema import Draft202012Validator
from scipy import stats

from main import EXIT_ERROR, EXIT_INFEASIBLE, EXIT_OK, main
from src.models.scenario_store import load_scenario, render
from src.services.catalog import get_builtin
from src.utils.helpers import derive_seed

SMALL = ["--pop", "10", "--iters", "5", "--lines", "10", "--samples", "20000"]


SCHEMA = Draft202012Validator(json.loads(
    (Path(__file__).resolve().parent.parent / "schemas" / "result.schema.json").read_text(encoding="utf-8")))


def _schema_errors(document):
    return [f"{error.json_path}: {error.message}" for error in SCHEMA.iter_errors(document)]


def _run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def _document(out):
    document = json.loads(out)
    assert set(document) == {"meta", "config", "results", "spread"}
    return document


def _without_runtime(document):
    document = dict(document)
    document["meta"] = {k: v for k, v in document["meta"].items() if k != "runtime"}
    return document


def test_list_prints_sorted_builtin_names(capsys):
    code, captured = _run(capsys, "--list")
    names = captured.out.split()
    assert code == EXIT_OK
    assert names == sorted(names)
    assert {"ouq_g", "ouq_e_range_100_500", "ouq_e_range_0_1000"} <= set(names)


def test_missing_or_unknown_scenario(capsys, tmp_path):
    assert _run(capsys, "--mode", "bounds")[0] == EXIT_ERROR
    assert _run(capsys, "--scenario", str(tmp_path / "nowhere.json"))[0] == EXIT_ERROR


def test_check_mode(capsys, tmp_path):
    code, captured = _run(capsys, "--scenario", "toy_mean_constrained", "--mode", "check")
    assert code == EXIT_OK
    assert _document(captured.out)["results"] == [{"valid": True, "diagnostics": []}]

    doc = render(get_builtin("toy_mean_constrained"))
    doc["problem"]["quantities"][0]["moments"][0].update(lower=1.5, upper=2.0)
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, captured = _run(capsys, "--scenario", str(path), "--mode", "check")
    assert code == EXIT_ERROR
    result = _document(captured.out)["results"][0]
    assert not result["valid"]
    assert any("mean bounds not within range" in line for line in result["diagnostics"])


def test_bounds_without_epistemic_part_coincide(capsys):
    code, captured = _run(capsys, "--scenario", "toy_aleatory_normal", *SMALL)
    assert code == EXIT_OK
    document = _document(captured.out)
    result = document["results"][0]
    assert result["lower"]["value"] == result["upper"]["value"]
    assert result["upper"]["value"] == pytest.approx(stats.norm.cdf(1.0), abs=0.01)
    assert document["config"]["method"] == "crude_mc"
    assert document["config"]["samples"] == 20000


def test_flags_override_scenario_settings(capsys):
    code, captured = _run(capsys, "--scenario", "toy_aleatory_normal", "--method", "line_sampling", *SMALL)
    assert code == EXIT_OK
    assert _document(captured.out)["config"]["method"] == "line_sampling"


def test_repetitions_use_derived_seeds(capsys):
    code, captured = _run(capsys, "--scenario", "toy_mean_constrained", "--seed", "5", "--reps", "2", *SMALL)
    document = _document(captured.out)
    assert code == EXIT_OK
    assert [r["seed"] for r in document["results"]] == [derive_seed(5, 0), derive_seed(5, 1)]
    assert set(document["spread"]) == {"lower", "upper"}
    assert document["spread"]["lower"] >= 0.0


def test_identical_runs_differ_only_in_runtime(capsys, tmp_path):
    first, second = tmp_path / "first.json", tmp_path / "second.json"
    assert main(["--scenario", "toy_mean_constrained", "--seed", "3", "--out", str(first), *SMALL]) == EXIT_OK
    assert main(["--scenario", "toy_mean_constrained", "--seed", "3", "--out", str(second), *SMALL]) == EXIT_OK
    a = json.loads(first.read_text(encoding="utf-8"))
    b = json.loads(second.read_text(encoding="utf-8"))
    assert _without_runtime(a) == _without_runtime(b)
    assert "wall_clock_seconds" in a["meta"]["runtime"]


def test_export_then_load(capsys, tmp_path):
    path = tmp_path / "ouq_g.json"
    assert _run(capsys, "--scenario", "ouq_g", "--export", str(path))[0] == EXIT_OK
    assert load_scenario(path) == get_builtin("ouq_g")
    code, captured = _run(capsys, "--scenario", str(path), "--mode", "check")
    assert code == EXIT_OK


def test_rbdo_on_toy_design(capsys):
    code, captured = _run(capsys, "--scenario", "toy_design_normal", "--mode", "rbdo", *SMALL)
    assert code == EXIT_OK
    result = _document(captured.out)["results"][0]
    assert result["status"] == "optimal"
    assert result["best"]["theta"][0] == pytest.approx(1.0, abs=0.1)


def test_infeasible_design_exits_with_two(capsys, tmp_path):
    doc = render(get_builtin("toy_design_normal"))
    doc["design"]["reliability"]["p_adm"] = 1e-12
    path = tmp_path / "infeasible.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, captured = _run(capsys, "--scenario", str(path), "--mode", "rbdo", *SMALL)
    assert code == EXIT_INFEASIBLE
    result = _document(captured.out)["results"][0]
    assert result["status"] == "infeasible"
    assert result["best"] is None


def test_rbdo_needs_a_design_scenario(capsys):
    assert _run(capsys, "--scenario", "toy_interval", "--mode", "rbdo", *SMALL)[0] == EXIT_ERROR


def test_theta_resolves_a_design_scenario(capsys):
    code, captured = _run(capsys, "--scenario", "toy_design_normal", "--theta", "1.0", *SMALL)
    assert code == EXIT_OK
    result = _document(captured.out)["results"][0]
    assert result["lower"]["value"] == result["upper"]["value"]


@pytest.mark.parametrize("argv", [
    ("--scenario", "toy_mean_constrained", "--mode", "check"),
    ("--scenario", "toy_mean_constrained", "--reps", "2", *SMALL),
    ("--scenario", "toy_design_normal", "--mode", "rbdo", *SMALL),
])
def test_documents_follow_the_result_schema(capsys, argv):
    code, captured = _run(capsys, *argv)
    assert code == EXIT_OK
    assert _schema_errors(_document(captured.out)) == []


def test_infeasible_document_follows_the_result_schema(capsys, tmp_path):
    doc = render(get_builtin("toy_design_normal"))
    doc["design"]["reliability"]["p_adm"] = 1e-12
    path = tmp_path / "infeasible.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    code, captured = _run(capsys, "--scenario", str(path), "--mode", "rbdo", *SMALL)
    assert code == EXIT_INFEASIBLE
    assert _schema_errors(_document(captured.out)) == []


def test_schema_rejects_malformed_documents(capsys):
    code, captured = _run(capsys, "--scenario", "toy_mean_constrained", "--mode", "check")
    document = _document(captured.out)
    assert _schema_errors(document) == []
    document["meta"]["mode"] = "sideways"
    document["extra"] = True
    assert len(_schema_errors(document)) == 2


def test_worker_count_does_not_change_the_result(capsys):
    argv = ("--scenario", "toy_mean_constrained", "--seed", "3", *SMALL)
    _, single = _run(capsys, *argv, "--workers", "1")
    _, many = _run(capsys, *argv, "--workers", "8")
    assert _without_runtime(_document(single.out)) == _without_runtime(_document(many.out))


def test_unwritable_output_directory_fails_before_running(capsys, tmp_path, monkeypatch):
    target = tmp_path / "locked"
    target.mkdir()
    monkeypatch.setattr("main.os.access", lambda path, mode: Path(path) != target.resolve())
    code, captured = _run(capsys, "--scenario", "toy_mean_constrained", "--out", str(target / "result.json"), *SMALL)
    assert code == EXIT_ERROR
    assert captured.out == ""
    assert not (target / "result.json").exists()
