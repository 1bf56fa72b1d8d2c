import numpy as np
import pytest

from src.models.uncertainty import (
    ALEATORY, CENTRAL, DistributionSpec, MomentConstraint, UncertainQuantity, UQProblem,
    dirac_term_count, validate
)
from src.services import column
from src.utils.error_handler import ModelError


def _problem(*quantities, response="threshold", **params):
    params = params or {"quantity": quantities[0].name, "value": 0.0}
    return UQProblem(quantities=tuple(quantities), response=response, response_params=tuple(params.items()))


def test_interval_only_quantity_is_valid():
    problem = _problem(UncertainQuantity("delta_0", 0.0, 6.0), quantity="delta_0", value=3.0)
    assert validate(problem) == []


def test_mean_bounds_outside_range_is_one_diagnostic():
    q = UncertainQuantity("P_e", 300.0, 400.0, moment_constraints=(MomentConstraint(1, 209.4, 279.0),))
    diagnostics = validate(_problem(q))
    assert len(diagnostics) == 1
    assert diagnostics[0].quantity == "P_e"
    assert diagnostics[0].message == "mean bounds not within range"


def test_duplicate_names_are_reported_once():
    diagnostics = validate(_problem(UncertainQuantity("P_e", 0.0, 1.0), UncertainQuantity("P_e", 0.0, 2.0)))
    assert [d.message for d in diagnostics] == ["duplicate quantity name"]


def test_inverted_range_and_moment_bounds():
    q = UncertainQuantity("y", 1.0, 0.0, moment_constraints=(MomentConstraint(1, 0.6, 0.4),))
    rules = {d.rule for d in validate(_problem(q))}
    assert {"range", "moment-bounds"} <= rules


def test_aleatory_quantity_needs_distribution_and_no_moments():
    q = UncertainQuantity("y", 0.0, 1.0, ALEATORY, moment_constraints=(MomentConstraint(1, 0.5, 0.5),))
    rules = {d.rule for d in validate(_problem(q))}
    assert {"aleatory-moments", "aleatory-distribution"} <= rules


def test_distribution_parameter_checks():
    unknown = UncertainQuantity("y", 0.0, 1.0, ALEATORY, distribution=DistributionSpec.of("weibull", k=1.0))
    negative = UncertainQuantity("y", 0.0, 1.0, ALEATORY, distribution=DistributionSpec.of("normal", mean=0.0, sd=-1.0))
    dangling = UncertainQuantity("y", 0.0, 1.0, ALEATORY, distribution=DistributionSpec.of("gumbel", loc="a", scale=1.0))
    assert validate(_problem(unknown))[0].rule == "distribution-family"
    assert validate(_problem(negative))[0].rule == "parameter-range"
    assert validate(_problem(dangling))[0].rule == "parameter-reference"


def test_reference_to_non_positive_scale_range():
    scale = UncertainQuantity("b", -1.0, 2.0)
    load = UncertainQuantity("y", 0.0, 10.0, ALEATORY, distribution=DistributionSpec.of("gumbel", loc=1.0, scale="b"))
    messages = [d.message for d in validate(_problem(load, scale))]
    assert "range of b admits non-positive scale" in messages


def test_unregistered_response():
    diagnostics = validate(UQProblem((UncertainQuantity("y", 0.0, 1.0),), response="no_such_response"))
    assert [d.rule for d in diagnostics] == ["response"]


def test_response_arity_is_checked():
    problem = column.reliability_problem(column.OUQ_G)
    without_load = tuple(q for q in problem.quantities if q.name not in ("P_e", "a_e", "b_e"))
    short = UQProblem(without_load, problem.response, response_params=problem.response_params)
    assert [d.rule for d in validate(short)] == ["response-arity"]


def test_benchmark_scenarios_are_valid():
    for kind in column.SCENARIO_KINDS:
        assert validate(column.reliability_problem(kind)) == []


def test_validate_is_idempotent():
    q = UncertainQuantity("P_e", 300.0, 400.0, moment_constraints=(MomentConstraint(1, 209.4, 279.0),))
    problem = _problem(q)
    assert validate(problem) == validate(problem)


def test_dirac_term_count_examples():
    assert dirac_term_count(UncertainQuantity("delta_0", 0.0, 0.06)) == 1
    assert dirac_term_count(column.reliability_problem(column.OUQ_E_RANGE_100_500).quantity("P_e")) == 4
    assert dirac_term_count(column.reliability_problem(column.OUQ_G).quantity("a_e")) == 2
    with pytest.raises(ModelError, match="aleatory"):
        dirac_term_count(column.reliability_problem(column.OUQ_G).quantity("y_0"))


def test_dirac_term_count_counts_constraints():
    rng = np.random.default_rng(3)
    for _ in range(200):
        n = int(rng.integers(0, 6))
        constraints = tuple(MomentConstraint(k + 1, 0.0, 1.0, CENTRAL if k else "classical") for k in range(n))
        assert dirac_term_count(UncertainQuantity("y", 0.0, 1.0, moment_constraints=constraints)) == 1 + n


def test_distribution_spec_resolves_references():
    spec = DistributionSpec.of("gumbel", loc="a_e", scale="b_e")
    assert spec.references == ("a_e", "b_e")
    resolved = spec.resolve({"a_e": 210_000.0, "b_e": 52_000.0})
    assert resolved.values() == {"loc": 210_000.0, "scale": 52_000.0}
    with pytest.raises(ModelError):
        spec.values()
    with pytest.raises(ModelError):
        spec.resolve({"a_e": 1.0})
