"""
Design problem types for double-loop reliability-based design optimization
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple, Union

from src.models.results import BoundResult
from src.models.uncertainty import (
    CLASSICAL, Diagnostic, ParamValue, UncertainQuantity, UQProblem, moment_feasible_bounds, validate as validate_uq
)

CONTINUOUS = "continuous"
INTEGER = "integer"
UNIQUE_INTEGERS = "unique_integers"
VARIABLE_KINDS = (CONTINUOUS, INTEGER, UNIQUE_INTEGERS)

INTERVAL_MIDPOINT = "interval_midpoint"
MOMENT_MIDPOINT = "moment_midpoint"
RESPONSE_PARAMETER = "response_parameter"
COUPLING_KINDS = (INTERVAL_MIDPOINT, MOMENT_MIDPOINT, RESPONSE_PARAMETER)

DETERMINISTIC = "deterministic"
EXPECTATION_BOUND = "expectation"
COST_KINDS = (DETERMINISTIC, EXPECTATION_BOUND)

MINIMIZE = "minimize"
MAXIMIZE = "maximize"
DIRECTIONS = (MINIMIZE, MAXIMIZE)

AUTO = "auto"

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"

ThetaValue = Union[float, Tuple[int, ...]]


@dataclass(frozen=True)
class Coupling:
    """
    Map from a design variable onto an uncertainty descriptor

    interval_midpoint rewrites a quantity range to [theta - width/2, theta + width/2],
    moment_midpoint does the same for the moment constraint (order, moment_kind) of a
    quantity, response_parameter sets a keyword parameter of the responses.
    """
    kind: str
    target: str
    width: float = 0.0
    order: int = 1
    moment_kind: str = CLASSICAL


@dataclass(frozen=True)
class DesignVariable:
    name: str
    kind: str = CONTINUOUS
    lower: float = 0.0
    upper: float = 1.0
    choices: Tuple[int, ...] = ()
    count: int = 1
    coupling: Optional[Coupling] = None

    @property
    def size(self) -> int:
        """Number of search coordinates this variable occupies"""
        return self.count if self.kind == UNIQUE_INTEGERS else 1


@dataclass(frozen=True)
class CostModel:
    """Deterministic cost of theta, or a bound on the expectation of a registered response"""
    kind: str = DETERMINISTIC
    function: str = ""
    bound: str = AUTO
    params: Tuple[Tuple[str, ParamValue], ...] = ()


@dataclass(frozen=True)
class ReliabilityConstraint:
    problem: UQProblem
    p_adm: float


@dataclass(frozen=True)
class DesignProblem:
    variables: Tuple[DesignVariable, ...]
    cost: CostModel
    reliability: ReliabilityConstraint
    direction: str = MINIMIZE
    name: str = ""

    @property
    def dimension(self) -> int:
        return sum(v.size for v in self.variables)

    def variable(self, name: str) -> DesignVariable:
        for v in self.variables:
            if v.name == name:
                return v
        raise KeyError(name)


@dataclass(frozen=True)
class DesignEvaluation:
    theta: Tuple[float, ...]
    cost_value: float
    pof_upper: float
    feasible: bool
    p_adm: float
    pof_error: float = 0.0
    certificates: Dict[str, BoundResult] = field(default_factory=dict)


@dataclass(frozen=True)
class SolveResult:
    status: str
    best: Optional[DesignEvaluation]
    history: Tuple[DesignEvaluation, ...]
    evaluations: int = 0


def _validate_coupled_span(v: DesignVariable, q: UncertainQuantity) -> List[Diagnostic]:
    """Every theta in the variable's box must place the coupled interval inside what the quantity admits"""
    c = v.coupling
    if v.kind != CONTINUOUS or c.width < 0.0:
        return []
    if c.kind == INTERVAL_MIDPOINT:
        admissible, what = q.range, "range"
    else:
        constraint = next((m for m in q.moment_constraints
                           if m.order == c.order and m.kind == c.moment_kind), None)
        if constraint is None:
            return [Diagnostic(v.name, "coupling-target",
                               f"{c.target} has no {c.moment_kind} moment of order {c.order}")]
        admissible, what = moment_feasible_bounds(q, constraint), f"feasible moment bounds of order {c.order}"
    span = (v.lower - c.width / 2.0, v.upper + c.width / 2.0)
    if span[0] < admissible[0] or span[1] > admissible[1]:
        return [Diagnostic(v.name, "coupling-span",
                           f"coupled interval reaches [{span[0]:g}, {span[1]:g}], outside the {what} "
                           f"[{admissible[0]:g}, {admissible[1]:g}] of {q.name}")]
    return []


def validate_design(problem: DesignProblem) -> List[Diagnostic]:
    """Diagnostics of the design problem, including those of its reliability problem"""
    diagnostics = list(validate_uq(problem.reliability.problem))
    if not 0.0 < problem.reliability.p_adm <= 1.0:
        diagnostics.append(Diagnostic("<design>", "p-adm", "admissible PoF must lie in (0, 1]"))
    if problem.direction not in DIRECTIONS:
        diagnostics.append(Diagnostic("<design>", "direction", f"unknown direction {problem.direction!r}"))
    if problem.cost.kind not in COST_KINDS:
        diagnostics.append(Diagnostic("<design>", "cost-kind", f"unknown cost kind {problem.cost.kind!r}"))
    if problem.cost.bound not in (AUTO, "lower", "upper"):
        diagnostics.append(Diagnostic("<design>", "cost-bound", f"unknown cost bound {problem.cost.bound!r}"))
    if not problem.variables:
        diagnostics.append(Diagnostic("<design>", "variables", "at least one design variable is required"))

    names = problem.reliability.problem.names
    seen = set()
    for v in problem.variables:
        if v.name in seen:
            diagnostics.append(Diagnostic(v.name, "unique-name", "duplicate design variable name"))
        seen.add(v.name)
        if v.kind not in VARIABLE_KINDS:
            diagnostics.append(Diagnostic(v.name, "variable-kind", f"unknown variable kind {v.kind!r}"))
            continue
        if v.kind == CONTINUOUS and not v.lower < v.upper:
            diagnostics.append(Diagnostic(v.name, "variable-bounds", "lower bound must be below upper bound"))
        if v.kind in (INTEGER, UNIQUE_INTEGERS) and not v.choices:
            diagnostics.append(Diagnostic(v.name, "variable-choices", "integer variables need choices"))
        if v.kind == UNIQUE_INTEGERS:
            if len(set(v.choices)) != len(v.choices):
                diagnostics.append(Diagnostic(v.name, "variable-choices", "choices must be distinct"))
            if not 1 <= v.count <= len(v.choices):
                diagnostics.append(Diagnostic(v.name, "variable-count",
                                              "count must be between 1 and the number of choices"))
        c = v.coupling
        if c is None:
            continue
        if c.kind not in COUPLING_KINDS:
            diagnostics.append(Diagnostic(v.name, "coupling-kind", f"unknown coupling kind {c.kind!r}"))
        elif c.kind != RESPONSE_PARAMETER:
            if v.kind != CONTINUOUS:
                diagnostics.append(Diagnostic(v.name, "coupling-kind",
                                              "midpoint couplings need a continuous variable"))
            if c.target not in names:
                diagnostics.append(Diagnostic(v.name, "coupling-target",
                                              f"coupled quantity {c.target!r} does not exist"))
            else:
                diagnostics.extend(_validate_coupled_span(v, problem.reliability.problem.quantity(c.target)))
            if c.width < 0.0:
                diagnostics.append(Diagnostic(v.name, "coupling-width", "coupling width must be >= 0"))
    return diagnostics
