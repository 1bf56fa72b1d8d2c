import json
from pathlib import Path

import pytest

from src.models.scenario_store import (
    KIND_DESIGN, KIND_UQ, Scenario, load_scenario, parse, render, render_json, save_scenario
)
from src.services.catalog import list_builtin, get_builtin
from src.utils.error_handler import ScenarioError

SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


@pytest.mark.parametrize("name", list_builtin())
def test_builtin_scenarios_survive_rendering(name):
    scenario = get_builtin(name)
    assert parse(render(scenario)) == scenario
    assert parse(json.loads(render_json(scenario))) == scenario


def test_save_and_load(tmp_path):
    scenario = get_builtin("ouq_e_range_0_1000")
    path = tmp_path / "ouq_e.json"
    save_scenario(path, scenario)
    assert load_scenario(path) == scenario
    assert path.read_text(encoding="utf-8") == render_json(scenario)


def test_shipped_scenario_files_match_the_catalog():
    assert load_scenario(SCENARIO_DIR / "toy_mean_constrained.json") == get_builtin("toy_mean_constrained")
    assert load_scenario(SCENARIO_DIR / "column_ouq_g.json") == get_builtin("ouq_g")


def test_kind_follows_the_problem():
    assert get_builtin("toy_interval").kind == KIND_UQ
    assert get_builtin("ouq_g").kind == KIND_DESIGN
    benchmark = get_builtin("ouq_g")
    assert benchmark.uq_problem is benchmark.problem.reliability.problem
    assert get_builtin("toy_aleatory_normal").settings_dict["method"] == "crude_mc"


def test_imprecise_parameters_render_as_references():
    doc = render(get_builtin("ouq_g"))
    quantities = {q["name"]: q for q in doc["design"]["reliability"]["problem"]["quantities"]}
    assert quantities["P_e"]["distribution"]["parameters"] == {"loc": {"ref": "a_e"}, "scale": {"ref": "b_e"}}
    assert quantities["y_0"]["distribution"]["parameters"] == {"mean": 400.0, "sd": 32.0}


def test_unknown_kind_is_rejected():
    doc = render(get_builtin("toy_interval"))
    doc["kind"] = "table"
    with pytest.raises(ScenarioError):
        parse(doc)


def test_malformed_documents_are_rejected():
    doc = render(get_builtin("toy_interval"))
    del doc["problem"]["quantities"][0]["range"]
    with pytest.raises(ScenarioError):
        parse(doc)
    doc = render(get_builtin("toy_interval"))
    doc["problem"]["quantities"][0]["range"] = [0.0, "one"]
    with pytest.raises(ScenarioError):
        parse(doc)
    doc = render(get_builtin("toy_interval"))
    doc["settings"] = ["seed", 1]
    with pytest.raises(ScenarioError):
        parse(doc)
    with pytest.raises(ScenarioError):
        parse([])


def test_unreadable_files_are_scenario_errors(tmp_path):
    with pytest.raises(ScenarioError):
        load_scenario(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{\"kind\": ", encoding="utf-8")
    with pytest.raises(ScenarioError) as info:
        load_scenario(broken)
    assert info.value.context["path"] == str(broken)


def test_settings_are_kept_in_order():
    scenario = Scenario("s", get_builtin("toy_interval").problem, (("seed", 3), ("lines", 5)))
    assert parse(render(scenario)).settings == (("seed", 3), ("lines", 5))
