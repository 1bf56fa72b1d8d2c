from dataclasses import replace

import pytest
from scipy import stats

from src.models.design import (
    EXPECTATION_BOUND, INFEASIBLE, INTERVAL_MIDPOINT, MOMENT_MIDPOINT, OPTIMAL, RESPONSE_PARAMETER,
    UNIQUE_INTEGERS, CostModel, Coupling, DesignProblem, DesignVariable, ReliabilityConstraint, validate_design
)
from src.models.uncertainty import MomentConstraint, UncertainQuantity, UQProblem
from src.services.catalog import get_builtin
from src.services.optimizer import BISECTION, OptimizerConfig
from src.services.rbdo import (
    InnerConfigs, decode_candidate, evaluate_design, resolve_coupling, solve, theta_mapping
)
from src.services.sampling import EstimatorConfig
from src.utils.cache import CacheManager, cache_manager
from src.utils.error_handler import CouplingError, DesignEvaluationError, ModelError, ValidationError


def _inner(population=30, iterations=60):
    return InnerConfigs(OptimizerConfig(population=population, max_iterations=iterations, seed=5),
                        EstimatorConfig(n_lines=10, n_samples=20_000, seed=5))


def _bisection(tol=0.05):
    return OptimizerConfig(strategy=BISECTION, tolerance=tol)


def _with_p_adm(problem, p_adm):
    return replace(problem, reliability=replace(problem.reliability, p_adm=p_adm))


def _moment_coupled():
    reliability = UQProblem(
        quantities=(UncertainQuantity("k_trace", 1000.0, 2500.0,
                                      moment_constraints=(MomentConstraint(1, 1500.0, 1900.0),)),),
        response="threshold", response_params=(("quantity", "k_trace"), ("value", 1400.0)))
    return DesignProblem(
        variables=(DesignVariable("theta", lower=1200.0, upper=2200.0,
                                  coupling=Coupling(MOMENT_MIDPOINT, "k_trace", width=200.0)),),
        cost=CostModel(function="squared_norm"),
        reliability=ReliabilityConstraint(reliability, 0.5))


def _interval_coupled():
    reliability = UQProblem(
        quantities=(UncertainQuantity("y", 0.0, 10.0),),
        response="threshold", response_params=(("quantity", "y"), ("value", 1.0)))
    return DesignProblem(
        variables=(DesignVariable("theta", lower=0.0, upper=10.0,
                                  coupling=Coupling(INTERVAL_MIDPOINT, "y", width=4.0)),),
        cost=CostModel(function="squared_norm"),
        reliability=ReliabilityConstraint(reliability, 0.5))


def _unique_integer_problem():
    reliability = get_builtin("toy_design_normal").problem.reliability.problem
    return DesignProblem(
        variables=(DesignVariable("slots", kind=UNIQUE_INTEGERS, choices=(1, 2, 3, 4), count=2,
                                  coupling=Coupling(RESPONSE_PARAMETER, "slot")),),
        cost=CostModel(function="squared_norm"),
        reliability=ReliabilityConstraint(replace(reliability, response_params=(("offset", -20.0),
                                                                                ("coef.y_hat", -1.0))), 1.0))


def test_moment_midpoint_coupling():
    uq = resolve_coupling(_moment_coupled(), (1700.0,))
    constraint = uq.quantity("k_trace").moment_constraints[0]
    assert (constraint.lower, constraint.upper) == (1600.0, 1800.0)


def test_interval_midpoint_coupling_and_escape():
    problem = _interval_coupled()
    assert resolve_coupling(problem, (5.0,)).quantity("y").range == (3.0, 7.0)
    with pytest.raises(CouplingError) as info:
        resolve_coupling(problem, (1.0,))
    assert info.value.variable == "theta"
    assert info.value.quantity == "y"


def test_moment_coupling_outside_range_is_rejected():
    problem = _moment_coupled()
    narrow = replace(problem, variables=(replace(problem.variables[0], upper=2600.0),))
    with pytest.raises(CouplingError):
        resolve_coupling(narrow, (2500.0,))


def test_coupled_interval_must_stay_inside_the_quantity_over_the_whole_box():
    problem = _interval_coupled()
    diagnostics = validate_design(problem)
    assert [(d.quantity, d.rule) for d in diagnostics] == [("theta", "coupling-span")]
    with pytest.raises(ValidationError) as info:
        solve(problem, _bisection(), _inner())
    assert info.value.diagnostics == diagnostics

    narrowed = replace(problem, variables=(replace(problem.variables[0], lower=2.0, upper=8.0),))
    assert validate_design(narrowed) == []


def test_coupled_moment_must_stay_inside_its_feasible_bounds():
    problem = _moment_coupled()
    assert validate_design(problem) == []
    wide = replace(problem, variables=(replace(problem.variables[0], upper=2450.0),))
    assert [d.rule for d in validate_design(wide)] == ["coupling-span"]
    assert validate_design(get_builtin("toy_design_mean_midpoint").problem) == []


def test_uncoupled_problem_is_returned_unchanged():
    problem = get_builtin("toy_design_normal").problem
    uncoupled = replace(problem, variables=(replace(problem.variables[0], coupling=None),))
    assert resolve_coupling(uncoupled, (1.0,)) is uncoupled.reliability.problem


def test_response_parameter_coupling():
    uq = resolve_coupling(get_builtin("toy_design_normal").problem, (1.5,))
    assert uq.params["offset"] == 1.5
    assert resolve_coupling(_unique_integer_problem(), (3.0, 1.0)).params["slot_0"] == 3.0


def test_design_domain_is_checked():
    with pytest.raises(ModelError):
        resolve_coupling(get_builtin("toy_design_normal").problem, (4.0,))
    with pytest.raises(ModelError):
        resolve_coupling(_unique_integer_problem(), (2.0, 2.0))
    with pytest.raises(ModelError):
        theta_mapping(get_builtin("toy_design_normal").problem, (1.0, 2.0))


def test_unique_integers_decode_without_repeats():
    problem = _unique_integer_problem()
    assert decode_candidate(problem, (1.2, 1.7)) == (2.0, 3.0)
    assert decode_candidate(problem, (3.9, 4.0)) == (4.0, 1.0)
    assert theta_mapping(problem, (4.0, 1.0)) == {"slots": (4, 1)}


def test_evaluate_design_reports_cost_and_pof():
    problem = _with_p_adm(get_builtin("toy_design_normal").problem, 0.5)
    evaluation = evaluate_design(problem, (1.0,), _inner())
    assert evaluation.cost_value == 1.0
    assert evaluation.pof_upper == pytest.approx(stats.norm.sf(1.0), rel=1e-4)
    assert evaluation.feasible
    assert set(evaluation.certificates) == {"pof"}


def test_evaluations_are_cached_per_candidate():
    cache = CacheManager(max_size=16)
    problem = get_builtin("toy_design_normal").problem
    first = evaluate_design(problem, (1.0,), _inner(), cache=cache)
    second = evaluate_design(problem, (1.0 + 1e-12,), _inner(), cache=cache)
    assert second is first
    assert cache.get_cache_stats()["design_cache"]["hits"] == 1
    other = evaluate_design(problem, (1.0,), _inner(population=20), cache=cache)
    assert other is not first


def test_inner_errors_name_the_candidate():
    problem = _interval_coupled()
    with pytest.raises(DesignEvaluationError) as info:
        evaluate_design(problem, (1.0,), _inner())
    assert info.value.theta == [1.0]
    assert info.value.context["cause"] == "CouplingError"


def test_expectation_cost_bound():
    problem = get_builtin("toy_design_normal").problem
    problem = replace(problem, cost=CostModel(kind=EXPECTATION_BOUND, function="linear",
                                              params=(("coef.y_hat", 1.0),)))
    evaluation = evaluate_design(problem, (1.5,), _inner())
    assert evaluation.cost_value == pytest.approx(1.5, abs=0.03)
    assert set(evaluation.certificates) == {"cost", "pof"}


def test_bisection_finds_normal_threshold():
    result = solve(get_builtin("toy_design_normal").problem, _bisection(), _inner())
    assert result.status == OPTIMAL
    assert result.best.theta[0] == pytest.approx(1.0, abs=0.06)
    assert result.best.feasible
    assert result.evaluations == len(result.history)
    assert len({e.theta for e in result.history}) == len(result.history)


def test_bisection_with_coupled_mean():
    result = solve(get_builtin("toy_design_mean_midpoint").problem, _bisection(), _inner())
    assert result.status == OPTIMAL
    assert result.best.theta[0] == pytest.approx(6.0, abs=0.1)


def test_non_binding_constraint_gives_unconstrained_optimum():
    result = solve(_with_p_adm(get_builtin("toy_design_normal").problem, 1.0), _bisection(), _inner())
    assert result.best.theta == (0.0,)
    assert result.best.cost_value == 0.0
    assert result.evaluations == 1


def test_infeasible_problem_has_no_best_design():
    problem = _with_p_adm(get_builtin("toy_design_normal").problem, 1e-12)
    result = solve(problem, _bisection(), _inner())
    assert result.status == INFEASIBLE
    assert result.best is None
    search = solve(problem, OptimizerConfig(population=4, max_iterations=2, seed=1), _inner())
    assert search.status == INFEASIBLE


def test_search_agrees_with_bisection():
    result = solve(get_builtin("toy_design_normal").problem,
                   OptimizerConfig(population=8, max_iterations=15, seed=3), _inner())
    assert result.status == OPTIMAL
    assert result.best.theta[0] == pytest.approx(1.0, abs=0.1)
    assert result.evaluations == len(result.history)


def test_search_never_proposes_repeated_integers():
    result = solve(_unique_integer_problem(), OptimizerConfig(population=6, max_iterations=5, seed=4), _inner())
    assert result.status == OPTIMAL
    for evaluation in result.history:
        assert len(set(evaluation.theta)) == len(evaluation.theta)
    assert sorted(result.best.theta) == [1.0, 2.0]


def test_solve_is_deterministic():
    problem = get_builtin("toy_design_normal").problem
    cfg = OptimizerConfig(population=6, max_iterations=4, seed=8)
    first = solve(problem, cfg, _inner())
    cache_manager.clear_all_caches()
    second = solve(problem, cfg, _inner())
    assert [e.theta for e in first.history] == [e.theta for e in second.history]
    assert [e.pof_upper for e in first.history] == [e.pof_upper for e in second.history]


def test_bisection_needs_one_continuous_variable():
    with pytest.raises(ModelError):
        solve(_unique_integer_problem(), _bisection(), _inner())


def test_invalid_design_problem():
    problem = _with_p_adm(get_builtin("toy_design_normal").problem, 0.0)
    with pytest.raises(ValidationError):
        solve(problem, _bisection(), _inner())
