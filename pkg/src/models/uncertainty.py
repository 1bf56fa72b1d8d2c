"""
Declarative data model for polymorphic uncertain quantities
Covers intervals, bounded/precise moments, precise PDFs and PDFs with
imprecise parameters, plus the problem container that forms the admissible set
"""

from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple, Union

from src.utils.error_handler import ModelError

EPISTEMIC = "epistemic"
ALEATORY = "aleatory"
CLASSIFICATIONS = (EPISTEMIC, ALEATORY)

CLASSICAL = "classical"
CENTRAL = "central"
MOMENT_KINDS = (CLASSICAL, CENTRAL)

FAILURE = "failure"
EXPECTATION = "expectation"
EVENTS = (FAILURE, EXPECTATION)

# Parameter names per family, in canonical order
FAMILIES: Dict[str, Tuple[str, ...]] = {
    "lognormal": ("mean", "sd"),
    "gumbel": ("loc", "scale"),
    "beta": ("alpha", "beta", "low", "high"),
    "normal": ("mean", "sd"),
    "uniform": ("low", "high"),
}

# Parameters that must be strictly positive
POSITIVE_PARAMETERS: Dict[str, Tuple[str, ...]] = {
    "lognormal": ("mean", "sd"),
    "gumbel": ("scale",),
    "beta": ("alpha", "beta"),
    "normal": ("sd",),
    "uniform": (),
}

ParamValue = Union[float, str]


@dataclass(frozen=True)
class MomentConstraint:
    """Bounds on the classical or central moment of a given order; lower == upper is a precise moment"""
    order: int
    lower: float
    upper: float
    kind: str = CLASSICAL

    @property
    def precise(self) -> bool:
        return self.lower == self.upper

    @property
    def label(self) -> str:
        if self.order == 1 and self.kind == CLASSICAL:
            return "mean"
        return f"{self.kind} moment of order {self.order}"


@dataclass(frozen=True)
class ParameterSpec:
    """A distribution parameter: a fixed number or a reference to an epistemic quantity"""
    name: str
    value: Optional[float] = None
    reference: Optional[str] = None

    @property
    def imprecise(self) -> bool:
        return self.reference is not None


@dataclass(frozen=True)
class DistributionSpec:
    family: str
    parameters: Tuple[ParameterSpec, ...]

    @classmethod
    def of(cls, family: str, **params: ParamValue) -> "DistributionSpec":
        """Build a spec; string values are references to other quantities"""
        specs = []
        for name, value in params.items():
            if isinstance(value, str):
                specs.append(ParameterSpec(name, reference=value))
            else:
                specs.append(ParameterSpec(name, value=float(value)))
        return cls(family, tuple(specs))

    def parameter(self, name: str) -> ParameterSpec:
        for spec in self.parameters:
            if spec.name == name:
                return spec
        raise ModelError(f"distribution {self.family} has no parameter {name!r}")

    @property
    def references(self) -> Tuple[str, ...]:
        return tuple(p.reference for p in self.parameters if p.imprecise)

    @property
    def resolved(self) -> bool:
        return not self.references

    def resolve(self, values: Mapping[str, float]) -> "DistributionSpec":
        """Replace imprecise parameters by the values of the referenced quantities"""
        if self.resolved:
            return self
        specs = []
        for spec in self.parameters:
            if spec.imprecise:
                if spec.reference not in values:
                    raise ModelError(f"no value for parameter reference {spec.reference!r}",
                                     context={"family": self.family, "parameter": spec.name})
                specs.append(ParameterSpec(spec.name, value=float(values[spec.reference])))
            else:
                specs.append(spec)
        return DistributionSpec(self.family, tuple(specs))

    def values(self) -> Dict[str, float]:
        if not self.resolved:
            raise ModelError(f"{self.family} distribution has unresolved parameters {self.references}")
        return {p.name: p.value for p in self.parameters}


@dataclass(frozen=True)
class UncertainQuantity:
    """One uncertain input; for aleatory quantities the range is informational"""
    name: str
    lower: float
    upper: float
    classification: str = EPISTEMIC
    moment_constraints: Tuple[MomentConstraint, ...] = ()
    distribution: Optional[DistributionSpec] = None

    @property
    def range(self) -> Tuple[float, float]:
        return self.lower, self.upper

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @property
    def epistemic(self) -> bool:
        return self.classification == EPISTEMIC

    def with_range(self, lower: float, upper: float) -> "UncertainQuantity":
        return replace(self, lower=float(lower), upper=float(upper))

    def with_constraints(self, constraints) -> "UncertainQuantity":
        return replace(self, moment_constraints=tuple(constraints))


@dataclass(frozen=True)
class UQProblem:
    """Uncertain quantities plus the registered response whose event is bounded"""
    quantities: Tuple[UncertainQuantity, ...]
    response: str
    event: str = FAILURE
    response_params: Tuple[Tuple[str, ParamValue], ...] = ()
    name: str = ""

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(q.name for q in self.quantities)

    @property
    def epistemic_quantities(self) -> Tuple[UncertainQuantity, ...]:
        return tuple(q for q in self.quantities if q.epistemic)

    @property
    def aleatory_quantities(self) -> Tuple[UncertainQuantity, ...]:
        return tuple(q for q in self.quantities if not q.epistemic)

    @property
    def params(self) -> Dict[str, ParamValue]:
        return dict(self.response_params)

    def quantity(self, name: str) -> UncertainQuantity:
        for q in self.quantities:
            if q.name == name:
                return q
        raise ModelError(f"unknown quantity {name!r}", context={"problem": self.name})

    def index(self, name: str) -> int:
        return self.names.index(name)

    def replace_quantity(self, quantity: UncertainQuantity) -> "UQProblem":
        quantities = tuple(quantity if q.name == quantity.name else q for q in self.quantities)
        return replace(self, quantities=quantities)

    def with_params(self, **params: ParamValue) -> "UQProblem":
        merged = dict(self.response_params)
        merged.update(params)
        return replace(self, response_params=tuple(merged.items()))


@dataclass(frozen=True)
class Diagnostic:
    quantity: str
    rule: str
    message: str

    def __str__(self) -> str:
        return f"{self.quantity}: {self.message} [{self.rule}]"


def dirac_term_count(q: UncertainQuantity) -> int:
    """Support points of the extreme measure: one for the range plus one per moment constraint"""
    if not q.epistemic:
        raise ModelError("term count undefined for aleatory quantity", context={"quantity": q.name})
    return 1 + len(q.moment_constraints)


def moment_feasible_bounds(q: UncertainQuantity, constraint: MomentConstraint) -> Tuple[float, float]:
    """Necessary bounds on a moment of any measure supported on the quantity's range"""
    a, b = q.range
    k = constraint.order
    if constraint.kind == CLASSICAL:
        candidates = [a ** k, b ** k]
        if a < 0.0 < b:
            candidates.append(0.0)
        return min(candidates), max(candidates)
    spread = (b - a) ** k
    if k == 1:
        return 0.0, 0.0
    if k % 2 == 0:
        return 0.0, spread
    return -spread, spread


def _validate_constraints(q: UncertainQuantity) -> List[Diagnostic]:
    diagnostics = []
    if q.moment_constraints and not q.epistemic:
        diagnostics.append(Diagnostic(q.name, "aleatory-moments",
                                      "moment constraints are only allowed on epistemic quantities"))
    for c in q.moment_constraints:
        if c.order < 1:
            diagnostics.append(Diagnostic(q.name, "moment-order", f"moment order must be >= 1, got {c.order}"))
            continue
        if c.kind not in MOMENT_KINDS:
            diagnostics.append(Diagnostic(q.name, "moment-kind", f"unknown moment kind {c.kind!r}"))
            continue
        if c.lower > c.upper:
            diagnostics.append(Diagnostic(q.name, "moment-bounds", f"{c.label} lower bound exceeds upper bound"))
            continue
        if q.lower >= q.upper:
            continue
        low, high = moment_feasible_bounds(q, c)
        if c.lower < low or c.upper > high:
            if c.order == 1 and c.kind == CLASSICAL:
                message = "mean bounds not within range"
            else:
                message = f"{c.label} bounds not within range"
            diagnostics.append(Diagnostic(q.name, "moment-range", message))
    return diagnostics


def _validate_distribution(q: UncertainQuantity, by_name: Mapping[str, UncertainQuantity]) -> List[Diagnostic]:
    dist = q.distribution
    if dist is None:
        if not q.epistemic:
            return [Diagnostic(q.name, "aleatory-distribution", "aleatory quantity requires a distribution")]
        return []

    if dist.family not in FAMILIES:
        return [Diagnostic(q.name, "distribution-family", f"unknown distribution family {dist.family!r}")]

    diagnostics = []
    expected = set(FAMILIES[dist.family])
    given = [p.name for p in dist.parameters]
    if len(given) != len(set(given)) or set(given) != expected:
        diagnostics.append(Diagnostic(
            q.name, "distribution-parameters",
            f"{dist.family} expects parameters {sorted(expected)}, got {given}"))
        return diagnostics

    positive = POSITIVE_PARAMETERS[dist.family]
    for p in dist.parameters:
        if p.imprecise:
            target = by_name.get(p.reference)
            if target is None:
                diagnostics.append(Diagnostic(q.name, "parameter-reference",
                                              f"parameter {p.name} references unknown quantity {p.reference!r}"))
                continue
            if not target.epistemic:
                diagnostics.append(Diagnostic(q.name, "parameter-reference",
                                              f"parameter {p.name} must reference an epistemic quantity"))
            if p.name in positive and target.lower <= 0.0:
                diagnostics.append(Diagnostic(q.name, "parameter-range",
                                              f"range of {p.reference} admits non-positive {p.name}"))
        elif p.value is None:
            diagnostics.append(Diagnostic(q.name, "parameter-value", f"parameter {p.name} has no value"))
        elif p.name in positive and p.value <= 0.0:
            diagnostics.append(Diagnostic(q.name, "parameter-range", f"{dist.family} {p.name} must be > 0"))

    if dist.family in ("beta", "uniform"):
        low, high = dist.parameter("low"), dist.parameter("high")
        if not low.imprecise and not high.imprecise and low.value is not None and high.value is not None:
            if low.value >= high.value:
                diagnostics.append(Diagnostic(q.name, "parameter-range", f"{dist.family} low must be below high"))
    return diagnostics


def _reference_cycles(problem: UQProblem) -> List[Diagnostic]:
    graph = {
        q.name: [r for r in (q.distribution.references if q.distribution else ())]
        for q in problem.quantities
    }
    diagnostics = []
    state: Dict[str, int] = {}

    def visit(name: str, trail: Tuple[str, ...]) -> None:
        state[name] = 1
        for nxt in graph.get(name, ()):
            if state.get(nxt) == 1:
                cycle = " -> ".join(trail + (nxt,))
                diagnostics.append(Diagnostic(name, "parameter-cycle", f"cyclic parameter reference {cycle}"))
            elif state.get(nxt) is None and nxt in graph:
                visit(nxt, trail + (nxt,))
        state[name] = 2

    for name in graph:
        if state.get(name) is None:
            visit(name, (name,))
    return diagnostics


def validate(problem: UQProblem) -> List[Diagnostic]:
    """Return every invariant violation of the problem; an empty list means valid"""
    from src.services.registry import lookup_response

    diagnostics: List[Diagnostic] = []
    if not problem.quantities:
        diagnostics.append(Diagnostic("<problem>", "quantities", "at least one quantity is required"))

    seen = set()
    for q in problem.quantities:
        if q.name in seen:
            diagnostics.append(Diagnostic(q.name, "unique-name", "duplicate quantity name"))
        seen.add(q.name)

    by_name = {q.name: q for q in problem.quantities}
    for q in problem.quantities:
        if q.classification not in CLASSIFICATIONS:
            diagnostics.append(Diagnostic(q.name, "classification",
                                          f"unknown classification {q.classification!r}"))
        if not q.lower < q.upper:
            diagnostics.append(Diagnostic(q.name, "range", "range lower bound must be below upper bound"))
        diagnostics.extend(_validate_constraints(q))
        diagnostics.extend(_validate_distribution(q, by_name))
    diagnostics.extend(_reference_cycles(problem))

    if problem.event not in EVENTS:
        diagnostics.append(Diagnostic("<problem>", "event", f"unknown event {problem.event!r}"))

    registered = lookup_response(problem.response)
    if registered is None:
        diagnostics.append(Diagnostic("<problem>", "response", f"response {problem.response!r} is not registered"))
    elif registered.inputs is not None:
        missing = [name for name in registered.inputs if name not in by_name]
        if missing:
            diagnostics.append(Diagnostic("<problem>", "response-arity",
                                          f"response {problem.response!r} needs quantities {missing}"))
    return diagnostics
