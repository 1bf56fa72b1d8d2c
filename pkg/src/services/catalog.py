"""
Built-in scenarios: the column benchmark variants and small synthetic problems
"""

from typing import Callable, Dict, List

from scipy import stats

from src.models.design import (
    MOMENT_MIDPOINT, RESPONSE_PARAMETER, CostModel, Coupling, DesignProblem, DesignVariable,
    ReliabilityConstraint
)
from src.models.scenario_store import Scenario
from src.models.uncertainty import (
    ALEATORY, DistributionSpec, MomentConstraint, UncertainQuantity, UQProblem
)
from src.services import column
from src.utils.error_handler import ScenarioError

BENCHMARK_SETTINGS = (("outer_strategy", "bisection"),)


def _standard_normal(name: str) -> UncertainQuantity:
    return UncertainQuantity(name, -10.0, 10.0, ALEATORY,
                             distribution=DistributionSpec.of("normal", mean=0.0, sd=1.0))


def toy_interval() -> Scenario:
    problem = UQProblem(
        quantities=(UncertainQuantity("y", 0.0, 1.0),),
        response="threshold", response_params=(("quantity", "y"), ("value", 0.5)),
        name="toy_interval")
    return Scenario("toy_interval", problem)


def toy_mean_constrained() -> Scenario:
    """Failure y <= 0.5 with y in [0, 1] and a precisely known mean of 0.7; upper bound 0.6"""
    problem = UQProblem(
        quantities=(UncertainQuantity("y", 0.0, 1.0, moment_constraints=(MomentConstraint(1, 0.7, 0.7),)),),
        response="threshold", response_params=(("quantity", "y"), ("value", 0.5)),
        name="toy_mean_constrained")
    return Scenario("toy_mean_constrained", problem)


def toy_aleatory_normal() -> Scenario:
    """Failure y_hat <= 1 for a standard normal y_hat; no epistemic part"""
    problem = UQProblem(
        quantities=(_standard_normal("y_hat"),),
        response="linear", response_params=(("offset", -1.0), ("coef.y_hat", 1.0)),
        name="toy_aleatory_normal")
    return Scenario("toy_aleatory_normal", problem, (("method", "crude_mc"), ("samples", 200000)))


def toy_design_normal() -> Scenario:
    """Minimize theta^2 subject to P[theta - y_hat <= 0] <= P(Z >= 1); optimum theta = 1"""
    reliability = UQProblem(
        quantities=(_standard_normal("y_hat"),),
        response="linear", response_params=(("offset", 0.0), ("coef.y_hat", -1.0)),
        name="toy_design_normal")
    problem = DesignProblem(
        variables=(DesignVariable("theta", lower=0.0, upper=3.0,
                                  coupling=Coupling(RESPONSE_PARAMETER, "offset")),),
        cost=CostModel(function="squared_norm"),
        reliability=ReliabilityConstraint(reliability, float(stats.norm.sf(1.0))),
        name="toy_design_normal")
    return Scenario("toy_design_normal", problem, BENCHMARK_SETTINGS)


def toy_design_mean_midpoint() -> Scenario:
    """
    Mean interval of y in [0, 10] centred on theta with width 1; failure y <= 1

    The worst case puts mass on {1, 10}, so the upper PoF is (10.5 - theta) / 9 and
    P_adm = 0.5 gives the optimum theta = 6.
    """
    reliability = UQProblem(
        quantities=(UncertainQuantity("y", 0.0, 10.0, moment_constraints=(MomentConstraint(1, 4.5, 5.5),)),),
        response="threshold", response_params=(("quantity", "y"), ("value", 1.0)),
        name="toy_design_mean_midpoint")
    problem = DesignProblem(
        variables=(DesignVariable("theta", lower=2.0, upper=8.0,
                                  coupling=Coupling(MOMENT_MIDPOINT, "y", width=1.0)),),
        cost=CostModel(function="squared_norm"),
        reliability=ReliabilityConstraint(reliability, 0.5),
        name="toy_design_mean_midpoint")
    return Scenario("toy_design_mean_midpoint", problem, BENCHMARK_SETTINGS)


def _benchmark(kind: str) -> Callable[[], Scenario]:
    def build() -> Scenario:
        return Scenario(kind, column.scenario(kind), BENCHMARK_SETTINGS)
    build.__doc__ = f"Column benchmark {kind}"
    return build


BUILTIN: Dict[str, Callable[[], Scenario]] = {
    column.OUQ_G: _benchmark(column.OUQ_G),
    column.OUQ_E_RANGE_100_500: _benchmark(column.OUQ_E_RANGE_100_500),
    column.OUQ_E_RANGE_0_1000: _benchmark(column.OUQ_E_RANGE_0_1000),
    "toy_interval": toy_interval,
    "toy_mean_constrained": toy_mean_constrained,
    "toy_aleatory_normal": toy_aleatory_normal,
    "toy_design_normal": toy_design_normal,
    "toy_design_mean_midpoint": toy_design_mean_midpoint,
}


def list_builtin() -> List[str]:
    return sorted(BUILTIN)


def get_builtin(name: str) -> Scenario:
    if name not in BUILTIN:
        raise ScenarioError(f"unknown built-in scenario {name!r}", context={"known": list_builtin()})
    return BUILTIN[name]()
