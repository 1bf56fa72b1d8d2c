"""
Sharpest bounds on failure probabilities and expectations over the admissible set
Epistemic quantities are reduced to Dirac mixtures searched in canonical-moment
coordinates; aleatory quantities are integrated per support-point combination
"""

import itertools
import math
from dataclasses import replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

import config
from src.models.dirac import DiracMeasure
from src.models.results import BOUND_SIDES, LOWER, UPPER, BoundResult, JointEstimate
from src.models.uncertainty import EXPECTATION, FAILURE, UQProblem, validate
from src.services.canonical import MomentParameterization
from src.services.optimizer import BISECTION, OptimizerConfig, minimize
from src.services.registry import bind_response
from src.services.sampling import AleatoryBlock, EstimatorConfig, chi_expectation, chi_failure
from src.utils.error_handler import EnumerationCapError, ModelError, OptimizerError, ValidationError
from src.utils.logger import get_logger
from src.utils.performance import track_performance

logger = get_logger("OUQCore")

Measures = Sequence[DiracMeasure]


def _check_measures(problem: UQProblem, measures: Measures) -> None:
    expected = len(problem.epistemic_quantities)
    if len(measures) != expected:
        raise ModelError(f"expected {expected} measures, one per epistemic quantity, got {len(measures)}")


def enumeration_size(measures: Measures) -> int:
    return math.prod(len(m) for m in measures)


def joint_estimate(problem: UQProblem, measures: Measures, block: Optional[AleatoryBlock] = None,
                   cfg: Optional[EstimatorConfig] = None, *, response: Optional[Callable] = None,
                   cap: int = config.ENUMERATION_CAP) -> JointEstimate:
    """
    Weighted sum over the tensor product of support points of the integrated event

    Args:
        problem: UQ problem; its event selects failure probability or expectation
        measures: One Dirac measure per epistemic quantity, in quantity order
        block: Aleatory block of the problem, built from it when omitted
        cfg: Estimator configuration
        response: Pre-bound response function
        cap: Largest admissible number of support-point combinations

    Returns:
        Value, standard error and number of combinations
    """
    _check_measures(problem, measures)
    size = enumeration_size(measures)
    if size > cap:
        raise EnumerationCapError(f"tensor product of {size} support-point combinations exceeds cap {cap}",
                                  size=size, context={"cap": cap})
    cfg = cfg or EstimatorConfig()
    block = block or AleatoryBlock.from_problem(problem)
    response = response or bind_response(problem.response, problem.names, problem.params)
    integrate = chi_expectation if problem.event == EXPECTATION else chi_failure

    # support points recur as the optimizer drives them together
    memo: Dict[Tuple[float, ...], Tuple[float, float, int]] = {}
    value, variance, without_root = 0.0, 0.0, 0
    for combination in itertools.product(*(zip(m.points, m.weights) for m in measures)):
        point = tuple(p for p, _ in combination)
        weight = math.prod(w for _, w in combination)
        if point not in memo:
            estimate = integrate(response, point, block, cfg)
            if problem.event == EXPECTATION:
                memo[point] = (estimate.mean, estimate.std_error, 0)
            else:
                memo[point] = (estimate.p, estimate.std_error, estimate.lines_without_root)
        chi, error, flagged = memo[point]
        value += weight * chi
        variance += (weight * error) ** 2
        without_root += flagged
    return JointEstimate(value=value, std_error=math.sqrt(variance), combinations=size,
                         lines_without_root=without_root)


def joint_probability(problem: UQProblem, measures: Measures, block: Optional[AleatoryBlock] = None,
                      cfg: Optional[EstimatorConfig] = None) -> float:
    """Probability of failure under the product of the given measures and the aleatory block"""
    if problem.event != FAILURE:
        problem = replace(problem, event=FAILURE)
    return joint_estimate(problem, measures, block, cfg).value


def joint_expectation(problem: UQProblem, measures: Measures, block: Optional[AleatoryBlock] = None,
                      cfg: Optional[EstimatorConfig] = None) -> float:
    """Expectation of the response under the product of the given measures and the aleatory block"""
    if problem.event != EXPECTATION:
        problem = replace(problem, event=EXPECTATION)
    return joint_estimate(problem, measures, block, cfg).value


class _BoundObjective:
    """Decodes unit-box points into measures and evaluates the joint event"""

    def __init__(self, problem: UQProblem, which: str, est_cfg: EstimatorConfig, mode: str):
        self.problem = problem
        self.sign = -1.0 if which == UPPER else 1.0
        self.est_cfg = est_cfg
        self.parameterizations = [MomentParameterization(q, mode) for q in problem.epistemic_quantities]
        self.offsets = np.cumsum([0] + [p.dimension for p in self.parameterizations])
        self.block = AleatoryBlock.from_problem(problem)
        self.response = bind_response(problem.response, problem.names, problem.params)

    @property
    def dimension(self) -> int:
        return int(self.offsets[-1])

    def decode(self, x: Sequence[float]) -> Tuple[List[DiracMeasure], float]:
        measures, violation = [], 0.0
        for k, parameterization in enumerate(self.parameterizations):
            decoded = parameterization.decode(x[self.offsets[k]:self.offsets[k + 1]])
            measures.append(decoded.measure)
            violation += decoded.violation
        return measures, violation

    def estimate(self, measures: Measures, seed: int, cfg: Optional[EstimatorConfig] = None) -> JointEstimate:
        cfg = cfg or self.est_cfg
        return joint_estimate(self.problem, measures, self.block, cfg.with_seed(seed), response=self.response)

    def __call__(self, x: np.ndarray, seed: int) -> float:
        measures, violation = self.decode(x)
        if violation > 0.0:
            return config.INFEASIBLE_PENALTY * (1.0 + violation)
        return self.sign * self.estimate(measures, seed).value


@track_performance("sharpest_bound")
def sharpest_bound(problem: UQProblem, which: str, opt_cfg: Optional[OptimizerConfig] = None,
                   est_cfg: Optional[EstimatorConfig] = None, *,
                   mode: str = config.CANONICAL_MODE) -> BoundResult:
    """
    Sharpest lower or upper bound of the problem's event over the admissible set

    Args:
        problem: Validated UQ problem
        which: "lower" or "upper"
        opt_cfg: Optimizer settings; its bounds are replaced by the canonical unit box
        est_cfg: Estimator settings; search evaluations derive their own seeds, the reported
            value re-estimates the certificate on est_cfg.seed with more lines and samples
        mode: "mixed" or "all_canonical" parameterization

    Returns:
        Bound value with the certificate measures that attain it
    """
    if which not in BOUND_SIDES:
        raise ModelError(f"bound side must be one of {BOUND_SIDES}, got {which!r}")
    diagnostics = validate(problem)
    if diagnostics:
        raise ValidationError(f"problem {problem.name!r} is invalid", diagnostics=diagnostics)
    opt_cfg = opt_cfg or OptimizerConfig()
    est_cfg = est_cfg or EstimatorConfig()
    if opt_cfg.strategy == BISECTION:
        raise OptimizerError("bound search needs a box optimizer, not bisection")

    objective = _BoundObjective(problem, which, est_cfg, mode)
    names = [q.name for q in problem.epistemic_quantities]
    logger.info(f"Computing {which} bound of {problem.event} for {problem.name or problem.response} "
                f"over {objective.dimension} canonical coordinates")

    # Reported value: the winning measure re-estimated on the master estimator seed
    certificate_cfg = est_cfg.scaled(config.CERTIFICATE_SAMPLE_FACTOR)

    if objective.dimension == 0:
        estimate = objective.estimate([], est_cfg.seed, certificate_cfg)
        return BoundResult(which=which, value=estimate.value, certificate={},
                           estimator_error=estimate.std_error, evaluation_seed=est_cfg.seed,
                           combinations=estimate.combinations, lines_without_root=estimate.lines_without_root)

    result = minimize(objective, opt_cfg.with_bounds([(0.0, 1.0)] * objective.dimension), seeded=True)
    measures, violation = objective.decode(result.best_x)
    if violation > 0.0:
        raise OptimizerError("no feasible measure found within the optimizer budget",
                             context={"problem": problem.name, "violation": violation})
    estimate = objective.estimate(measures, est_cfg.seed, certificate_cfg)
    logger.debug(f"Search value {objective.sign * result.best_f:.6g}, certificate re-estimate {estimate.value:.6g}")
    if estimate.lines_without_root:
        logger.warning(f"{estimate.lines_without_root} sampling lines without a root at the {which} bound")
    logger.info(f"{which.capitalize()} bound {estimate.value:.6g} (error {estimate.std_error:.2g})")
    return BoundResult(
        which=which,
        value=estimate.value,
        certificate=dict(zip(names, measures)),
        estimator_error=estimate.std_error,
        optimizer_trace=result.trace,
        evaluation_seed=est_cfg.seed,
        combinations=estimate.combinations,
        lines_without_root=estimate.lines_without_root,
    )


def bound_interval(problem: UQProblem, opt_cfg: Optional[OptimizerConfig] = None,
                   est_cfg: Optional[EstimatorConfig] = None, *,
                   mode: str = config.CANONICAL_MODE) -> Tuple[BoundResult, BoundResult]:
    """Lower and upper bound of the same problem"""
    return (sharpest_bound(problem, LOWER, opt_cfg, est_cfg, mode=mode),
            sharpest_bound(problem, UPPER, opt_cfg, est_cfg, mode=mode))
