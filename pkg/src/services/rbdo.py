"""
Double-loop reliability-based design optimization
The outer loop searches design candidates; each candidate rewrites the design-coupled
uncertainty descriptors, bounds its cost and its probability of failure with the
inner solver, and is checked against the admissible probability of failure
"""

import math
import threading
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

import config
from src.models.design import (
    AUTO, CONTINUOUS, EXPECTATION_BOUND, INFEASIBLE, INTEGER, INTERVAL_MIDPOINT, MAXIMIZE,
    OPTIMAL, RESPONSE_PARAMETER, UNIQUE_INTEGERS, DesignEvaluation, DesignProblem, DesignVariable,
    SolveResult, ThetaValue, validate_design
)
from src.models.results import LOWER, UPPER
from src.models.scenario_store import render_design
from src.models.uncertainty import EXPECTATION, UQProblem, validate as validate_uq
from src.services.canonical import MIXED
from src.services.optimizer import BISECTION, OptimizerConfig, minimize, minimize_scalar_monotone
from src.services.ouq import sharpest_bound
from src.services.registry import get_cost
from src.services.sampling import EstimatorConfig
from src.utils.cache import CacheManager, cache_manager
from src.utils.error_handler import (
    CouplingError, DesignEvaluationError, ModelError, OUQError, ValidationError, handle_errors
)
from src.utils.helpers import derive_seed, quantize, stable_hash
from src.utils.logger import get_logger
from src.utils.performance import track_performance, track_sync_operation

logger = get_logger("RBDO")


@dataclass(frozen=True)
class InnerConfigs:
    """Settings of the inner bound computations run for every design candidate"""
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    mode: str = MIXED


def theta_mapping(problem: DesignProblem, theta: Sequence[float]) -> Dict[str, ThetaValue]:
    """Named design values from the flat candidate vector"""
    theta = [float(t) for t in theta]
    if len(theta) != problem.dimension:
        raise ModelError(f"design vector needs {problem.dimension} coordinates, got {len(theta)}")
    values: Dict[str, ThetaValue] = {}
    position = 0
    for v in problem.variables:
        if v.kind == UNIQUE_INTEGERS:
            values[v.name] = tuple(int(round(t)) for t in theta[position:position + v.count])
        elif v.kind == INTEGER:
            values[v.name] = float(round(theta[position]))
        else:
            values[v.name] = theta[position]
        position += v.size
    return values


def _check_domain(problem: DesignProblem, values: Mapping[str, ThetaValue]) -> None:
    for v in problem.variables:
        value = values[v.name]
        if v.kind == CONTINUOUS and not v.lower <= value <= v.upper:
            raise ModelError(f"design variable {v.name} = {value} outside [{v.lower}, {v.upper}]")
        if v.kind == INTEGER and int(value) not in v.choices:
            raise ModelError(f"design variable {v.name} = {value} is not one of {v.choices}")
        if v.kind == UNIQUE_INTEGERS:
            if len(set(value)) != len(value) or any(x not in v.choices for x in value):
                raise ModelError(f"design variable {v.name} = {value} must be distinct members of {v.choices}")


def _apply_coupling(problem: UQProblem, v: DesignVariable, value: ThetaValue) -> UQProblem:
    c = v.coupling
    if c.kind == RESPONSE_PARAMETER:
        if isinstance(value, tuple):
            return problem.with_params(**{f"{c.target}_{i}": float(x) for i, x in enumerate(value)})
        return problem.with_params(**{c.target: float(value)})

    q = problem.quantity(c.target)
    lower, upper = value - 0.5 * c.width, value + 0.5 * c.width
    if c.kind == INTERVAL_MIDPOINT:
        if lower < q.lower or upper > q.upper:
            raise CouplingError(f"coupled range [{lower}, {upper}] escapes the range of {q.name}",
                                variable=v.name, quantity=q.name,
                                context={"physical_range": q.range})
        rewritten = q.with_range(lower, upper)
    else:
        constraints = []
        for m in q.moment_constraints:
            if m.order == c.order and m.kind == c.moment_kind:
                m = replace(m, lower=lower, upper=upper)
            constraints.append(m)
        rewritten = q.with_constraints(constraints)

    updated = problem.replace_quantity(rewritten)
    broken = [d for d in validate_uq(updated) if d.quantity == q.name]
    if broken:
        raise CouplingError(f"coupled descriptor of {q.name} is inconsistent: {broken[0].message}",
                            variable=v.name, quantity=q.name)
    return updated


def resolve_coupling(problem: DesignProblem, theta: Sequence[float]) -> UQProblem:
    """
    Uncertainty model rewritten for one design candidate

    Args:
        problem: Design problem
        theta: Flat design vector within the variable domains

    Returns:
        Reliability problem with coupled descriptors set; the original object when nothing is coupled
    """
    values = theta_mapping(problem, theta)
    _check_domain(problem, values)
    uq = problem.reliability.problem
    for v in problem.variables:
        if v.coupling is not None:
            uq = _apply_coupling(uq, v, values[v.name])
    return uq


def scenario_hash(problem: DesignProblem, cfgs: InnerConfigs) -> str:
    return stable_hash({"design": render_design(problem), "inner": cfgs})


def _cost_side(problem: DesignProblem) -> str:
    if problem.cost.bound != AUTO:
        return problem.cost.bound
    return LOWER if problem.direction == MAXIMIZE else UPPER


def evaluate_design(problem: DesignProblem, theta: Sequence[float], cfgs: Optional[InnerConfigs] = None,
                    *, cache: CacheManager = cache_manager) -> DesignEvaluation:
    """
    Cost and upper probability of failure of one design candidate

    Inner seeds are derived from the master seeds and the quantized candidate, so the
    evaluation of a candidate does not depend on when or where it runs.
    """
    cfgs = cfgs or InnerConfigs()
    theta = tuple(float(t) for t in theta)
    key_hash = scenario_hash(problem, cfgs)
    cached = cache.get_design(theta, key_hash)
    if cached is not None:
        logger.debug(f"Cache hit for design {theta}")
        return cached

    candidate_key = int(stable_hash(quantize(theta, config.DESIGN_QUANTUM))[:15], 16)
    opt_cfg = cfgs.optimizer.with_seed(derive_seed(cfgs.optimizer.seed, candidate_key))
    est_cfg = cfgs.estimator.with_seed(derive_seed(cfgs.estimator.seed, candidate_key))

    try:
        with track_sync_operation("evaluate_design"):
            uq = resolve_coupling(problem, theta)
            values = theta_mapping(problem, theta)
            certificates = {}
            if problem.cost.kind == EXPECTATION_BOUND:
                cost_problem = replace(uq, response=problem.cost.function, event=EXPECTATION)
                cost_problem = cost_problem.with_params(**dict(problem.cost.params))
                cost_bound = sharpest_bound(cost_problem, _cost_side(problem), opt_cfg, est_cfg, mode=cfgs.mode)
                cost_value = cost_bound.value
                certificates["cost"] = cost_bound
            else:
                cost_value = float(get_cost(problem.cost.function).func(values, **dict(problem.cost.params)))
            pof = sharpest_bound(uq, UPPER, opt_cfg, est_cfg, mode=cfgs.mode)
            certificates["pof"] = pof
    except OUQError as e:
        if isinstance(e, DesignEvaluationError):
            raise
        raise DesignEvaluationError(f"design candidate {theta}: {e.message}", theta=theta,
                                    context={**e.context, "cause": type(e).__name__}) from e

    evaluation = DesignEvaluation(
        theta=theta,
        cost_value=cost_value,
        pof_upper=pof.value,
        feasible=pof.value <= problem.reliability.p_adm,
        p_adm=problem.reliability.p_adm,
        pof_error=pof.estimator_error,
        certificates=certificates,
    )
    logger.info(f"Design {theta}: cost {cost_value:.6g}, PoF {pof.value:.3g} "
                f"({'feasible' if evaluation.feasible else 'infeasible'})")
    cache.set_design(theta, key_hash, evaluation)
    return evaluation


def _search_box(problem: DesignProblem) -> List[Tuple[float, float]]:
    box = []
    for v in problem.variables:
        if v.kind == CONTINUOUS:
            box.append((v.lower, v.upper))
        else:
            box.extend([(0.0, float(len(v.choices)))] * v.size)
    return box


def decode_candidate(problem: DesignProblem, x: Sequence[float]) -> Tuple[float, ...]:
    """
    Design vector from a point of the search box

    Integer variables take the choice at the floor index; unique-integer variables move
    a repeated index to the next unused one.
    """
    theta: List[float] = []
    position = 0
    for v in problem.variables:
        if v.kind == CONTINUOUS:
            theta.append(float(x[position]))
        else:
            n = len(v.choices)
            indices = [min(int(math.floor(t)), n - 1) for t in x[position:position + v.size]]
            if v.kind == UNIQUE_INTEGERS:
                used = set()
                for i, index in enumerate(indices):
                    while index in used:
                        index = (index + 1) % n
                    used.add(index)
                    indices[i] = index
            theta.extend(float(v.choices[i]) for i in indices)
        position += v.size
    return tuple(theta)


def _signed_cost(problem: DesignProblem, evaluation: DesignEvaluation) -> float:
    return -evaluation.cost_value if problem.direction == MAXIMIZE else evaluation.cost_value


def _best_feasible(problem: DesignProblem, history: Sequence[DesignEvaluation]) -> Optional[DesignEvaluation]:
    feasible = [e for e in history if e.feasible]
    if not feasible:
        return None
    return min(feasible, key=lambda e: _signed_cost(problem, e))


def _solve_bisection(problem: DesignProblem, outer_cfg: OptimizerConfig, cfgs: InnerConfigs,
                     history: List[DesignEvaluation]) -> Optional[DesignEvaluation]:
    """Smallest feasible value of a single continuous variable; PoF must decrease along it"""
    if len(problem.variables) != 1 or problem.variables[0].kind != CONTINUOUS:
        raise ModelError("bisection needs exactly one continuous design variable")
    v = problem.variables[0]
    p_adm = problem.reliability.p_adm
    seen: Dict[float, DesignEvaluation] = {}

    def evaluate(x: float) -> DesignEvaluation:
        if x not in seen:
            seen[x] = evaluate_design(problem, (x,), cfgs)
            history.append(seen[x])
        return seen[x]

    def pof(x: float) -> float:
        return evaluate(x).pof_upper

    if pof(v.lower) <= p_adm:
        logger.info(f"Lower end {v.lower} of {v.name} is already feasible")
        return seen[v.lower]
    if pof(v.upper) > p_adm:
        return None
    return evaluate(minimize_scalar_monotone(pof, p_adm, (v.lower, v.upper), outer_cfg.tolerance))


def _solve_search(problem: DesignProblem, outer_cfg: OptimizerConfig, cfgs: InnerConfigs,
                  history: List[DesignEvaluation]) -> Optional[DesignEvaluation]:
    results: Dict[Tuple[float, ...], DesignEvaluation] = {}
    lock = threading.Lock()

    def objective(x: np.ndarray) -> float:
        theta = decode_candidate(problem, x)
        evaluation = evaluate_design(problem, theta, cfgs)
        with lock:
            results[quantize(theta, config.DESIGN_QUANTUM)] = evaluation
        value = _signed_cost(problem, evaluation)
        if not evaluation.feasible:
            violation = (evaluation.pof_upper - evaluation.p_adm) / evaluation.p_adm
            value += config.CONSTRAINT_PENALTY * (1.0 + violation)
        return value

    def record(generation: int, points: np.ndarray, values: np.ndarray) -> None:
        for x in points:
            theta = decode_candidate(problem, x)
            history.append(results[quantize(theta, config.DESIGN_QUANTUM)])

    minimize(objective, outer_cfg.with_bounds(_search_box(problem)), callback=record)
    return _best_feasible(problem, history)


@handle_errors
@track_performance("rbdo_solve")
def solve(problem: DesignProblem, outer_cfg: Optional[OptimizerConfig] = None,
          inner_cfgs: Optional[InnerConfigs] = None) -> SolveResult:
    """
    Best feasible design found by the outer strategy

    Returns status "infeasible" with no best design when no evaluated candidate
    meets the admissible probability of failure.
    """
    diagnostics = validate_design(problem)
    if diagnostics:
        raise ValidationError(f"design problem {problem.name!r} is invalid", diagnostics=diagnostics)
    outer_cfg = outer_cfg or OptimizerConfig()
    inner_cfgs = inner_cfgs or InnerConfigs()

    history: List[DesignEvaluation] = []
    logger.info(f"Solving {problem.name or 'design problem'} with {outer_cfg.strategy}")
    if outer_cfg.strategy == BISECTION:
        best = _solve_bisection(problem, outer_cfg, inner_cfgs, history)
    else:
        best = _solve_search(problem, outer_cfg, inner_cfgs, history)

    if best is None or not best.feasible:
        logger.warning(f"No feasible design for {problem.name or 'design problem'} within the budget")
        return SolveResult(status=INFEASIBLE, best=None, history=tuple(history), evaluations=len(history))
    logger.info(f"Best design {best.theta} with cost {best.cost_value:.6g}")
    return SolveResult(status=OPTIMAL, best=best, history=tuple(history), evaluations=len(history))
