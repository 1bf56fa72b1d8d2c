"""
Scenario document persistence for the OUQ-RBDO toolkit
A scenario file is one JSON document holding either a UQ problem or a design problem
"""

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Tuple, Union

from src.models.design import (
    CostModel, Coupling, DesignProblem, DesignVariable, ReliabilityConstraint
)
from src.models.uncertainty import (
    DistributionSpec, MomentConstraint, ParameterSpec, UncertainQuantity, UQProblem
)
from src.utils.error_handler import ScenarioError, log_function_call
from src.utils.logger import get_logger

logger = get_logger("ScenarioStore")

KIND_UQ = "uq"
KIND_DESIGN = "design"

Problem = Union[UQProblem, DesignProblem]


@dataclass(frozen=True)
class Scenario:
    """A named problem plus run settings that override environment defaults"""
    name: str
    problem: Problem
    settings: Tuple[Tuple[str, Any], ...] = ()

    @property
    def kind(self) -> str:
        return KIND_DESIGN if isinstance(self.problem, DesignProblem) else KIND_UQ

    @property
    def settings_dict(self) -> Dict[str, Any]:
        return dict(self.settings)

    @property
    def uq_problem(self) -> UQProblem:
        """The problem whose bounds `bounds` mode reports"""
        if isinstance(self.problem, DesignProblem):
            return self.problem.reliability.problem
        return self.problem


# Rendering

def _render_params(params) -> Dict[str, Any]:
    return {name: value for name, value in params}


def _render_distribution(dist: DistributionSpec) -> Dict[str, Any]:
    parameters = {}
    for p in dist.parameters:
        parameters[p.name] = {"ref": p.reference} if p.imprecise else p.value
    return {"family": dist.family, "parameters": parameters}


def _render_quantity(q: UncertainQuantity) -> Dict[str, Any]:
    doc: Dict[str, Any] = {
        "name": q.name,
        "range": [q.lower, q.upper],
        "classification": q.classification,
    }
    if q.moment_constraints:
        doc["moments"] = [
            {"order": c.order, "kind": c.kind, "lower": c.lower, "upper": c.upper}
            for c in q.moment_constraints
        ]
    if q.distribution is not None:
        doc["distribution"] = _render_distribution(q.distribution)
    return doc


def render_uq(problem: UQProblem) -> Dict[str, Any]:
    return {
        "name": problem.name,
        "response": problem.response,
        "event": problem.event,
        "response_params": _render_params(problem.response_params),
        "quantities": [_render_quantity(q) for q in problem.quantities],
    }


def _render_variable(v: DesignVariable) -> Dict[str, Any]:
    doc: Dict[str, Any] = {"name": v.name, "kind": v.kind, "bounds": [v.lower, v.upper]}
    if v.choices:
        doc["choices"] = list(v.choices)
        doc["count"] = v.count
    if v.coupling is not None:
        c = v.coupling
        doc["coupling"] = {
            "kind": c.kind, "target": c.target, "width": c.width,
            "order": c.order, "moment_kind": c.moment_kind,
        }
    return doc


def render_design(problem: DesignProblem) -> Dict[str, Any]:
    return {
        "name": problem.name,
        "direction": problem.direction,
        "variables": [_render_variable(v) for v in problem.variables],
        "cost": {
            "kind": problem.cost.kind,
            "function": problem.cost.function,
            "bound": problem.cost.bound,
            "params": _render_params(problem.cost.params),
        },
        "reliability": {
            "p_adm": problem.reliability.p_adm,
            "problem": render_uq(problem.reliability.problem),
        },
    }


def render(scenario: Scenario) -> Dict[str, Any]:
    """Scenario as a JSON-ready document"""
    doc: Dict[str, Any] = {"name": scenario.name, "kind": scenario.kind}
    if scenario.settings:
        doc["settings"] = scenario.settings_dict
    if isinstance(scenario.problem, DesignProblem):
        doc["design"] = render_design(scenario.problem)
    else:
        doc["problem"] = render_uq(scenario.problem)
    return doc


def render_json(scenario: Scenario) -> str:
    return json.dumps(render(scenario), indent=2) + "\n"


# Parsing

def _require(doc: Dict[str, Any], key: str, where: str) -> Any:
    if not isinstance(doc, dict) or key not in doc:
        raise ScenarioError(f"missing key {key!r} in {where}", context={"where": where})
    return doc[key]


def _parse_params(doc: Any, where: str) -> Tuple[Tuple[str, Any], ...]:
    if doc is None:
        return ()
    if not isinstance(doc, dict):
        raise ScenarioError(f"{where} must be an object")
    params = []
    for name, value in doc.items():
        if isinstance(value, bool) or not isinstance(value, (int, float, str)):
            raise ScenarioError(f"parameter {name!r} in {where} must be a number or a string")
        params.append((name, value if isinstance(value, str) else float(value)))
    return tuple(params)


def _parse_pair(value: Any, where: str) -> Tuple[float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ScenarioError(f"{where} must be a [lower, upper] pair")
    try:
        return float(value[0]), float(value[1])
    except (TypeError, ValueError):
        raise ScenarioError(f"{where} must contain numbers")


def _parse_distribution(doc: Dict[str, Any], where: str) -> DistributionSpec:
    family = _require(doc, "family", where)
    raw = _require(doc, "parameters", where)
    if not isinstance(raw, dict):
        raise ScenarioError(f"parameters of {where} must be an object")
    specs = []
    for name, value in raw.items():
        if isinstance(value, dict):
            specs.append(ParameterSpec(name, reference=str(_require(value, "ref", f"{where}.{name}"))))
        elif isinstance(value, (int, float)) and not isinstance(value, bool):
            specs.append(ParameterSpec(name, value=float(value)))
        else:
            raise ScenarioError(f"parameter {name!r} of {where} must be a number or {{\"ref\": name}}")
    return DistributionSpec(str(family), tuple(specs))


def _parse_quantity(doc: Dict[str, Any], index: int) -> UncertainQuantity:
    where = f"quantity #{index}"
    name = str(_require(doc, "name", where))
    where = f"quantity {name!r}"
    lower, upper = _parse_pair(_require(doc, "range", where), f"range of {where}")
    constraints = []
    for m in doc.get("moments", []) or []:
        try:
            constraints.append(MomentConstraint(
                order=int(_require(m, "order", where)),
                lower=float(_require(m, "lower", where)),
                upper=float(_require(m, "upper", where)),
                kind=str(m.get("kind", "classical")),
            ))
        except (TypeError, ValueError):
            raise ScenarioError(f"malformed moment constraint in {where}")
    distribution = None
    if doc.get("distribution") is not None:
        distribution = _parse_distribution(doc["distribution"], f"distribution of {where}")
    return UncertainQuantity(
        name=name,
        lower=lower,
        upper=upper,
        classification=str(doc.get("classification", "epistemic")),
        moment_constraints=tuple(constraints),
        distribution=distribution,
    )


def parse_uq(doc: Dict[str, Any]) -> UQProblem:
    quantities = _require(doc, "quantities", "problem")
    if not isinstance(quantities, list):
        raise ScenarioError("quantities must be a list")
    return UQProblem(
        quantities=tuple(_parse_quantity(q, i) for i, q in enumerate(quantities)),
        response=str(_require(doc, "response", "problem")),
        event=str(doc.get("event", "failure")),
        response_params=_parse_params(doc.get("response_params"), "response_params"),
        name=str(doc.get("name", "")),
    )


def _parse_variable(doc: Dict[str, Any], index: int) -> DesignVariable:
    where = f"design variable #{index}"
    name = str(_require(doc, "name", where))
    lower, upper = _parse_pair(doc.get("bounds", [0.0, 1.0]), f"bounds of {name}")
    coupling = None
    if doc.get("coupling") is not None:
        c = doc["coupling"]
        coupling = Coupling(
            kind=str(_require(c, "kind", f"coupling of {name}")),
            target=str(_require(c, "target", f"coupling of {name}")),
            width=float(c.get("width", 0.0)),
            order=int(c.get("order", 1)),
            moment_kind=str(c.get("moment_kind", "classical")),
        )
    return DesignVariable(
        name=name,
        kind=str(doc.get("kind", "continuous")),
        lower=lower,
        upper=upper,
        choices=tuple(int(x) for x in doc.get("choices", [])),
        count=int(doc.get("count", 1)),
        coupling=coupling,
    )


def parse_design(doc: Dict[str, Any]) -> DesignProblem:
    variables = _require(doc, "variables", "design")
    cost = _require(doc, "cost", "design")
    reliability = _require(doc, "reliability", "design")
    return DesignProblem(
        variables=tuple(_parse_variable(v, i) for i, v in enumerate(variables)),
        cost=CostModel(
            kind=str(cost.get("kind", "deterministic")),
            function=str(cost.get("function", "")),
            bound=str(cost.get("bound", "auto")),
            params=_parse_params(cost.get("params"), "cost params"),
        ),
        reliability=ReliabilityConstraint(
            problem=parse_uq(_require(reliability, "problem", "reliability")),
            p_adm=float(_require(reliability, "p_adm", "reliability")),
        ),
        direction=str(doc.get("direction", "minimize")),
        name=str(doc.get("name", "")),
    )


def parse(doc: Dict[str, Any]) -> Scenario:
    """Scenario from a parsed JSON document"""
    if not isinstance(doc, dict):
        raise ScenarioError("scenario document must be an object")
    kind = doc.get("kind")
    try:
        if kind == KIND_DESIGN:
            problem: Problem = parse_design(_require(doc, "design", "scenario"))
        elif kind == KIND_UQ:
            problem = parse_uq(_require(doc, "problem", "scenario"))
        else:
            raise ScenarioError(f"scenario kind must be {KIND_UQ!r} or {KIND_DESIGN!r}, got {kind!r}")
    except (AttributeError, TypeError, ValueError) as e:
        raise ScenarioError(f"malformed scenario document: {e}")
    settings = doc.get("settings") or {}
    if not isinstance(settings, dict):
        raise ScenarioError("settings must be an object")
    return Scenario(name=str(doc.get("name", "")), problem=problem, settings=tuple(settings.items()))


@log_function_call
def load_scenario(path: Union[str, Path]) -> Scenario:
    """Read and parse a scenario file"""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"cannot read scenario file {path}: {e}", context={"path": str(path)})
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioError(f"invalid JSON in {path}: {e}", context={"path": str(path)})
    scenario = parse(doc)
    logger.debug(f"Loaded {scenario.kind} scenario {scenario.name!r} from {path}")
    return scenario


def save_scenario(path: Union[str, Path], scenario: Scenario) -> None:
    """Write a scenario file"""
    path = Path(path)
    path.write_text(render_json(scenario), encoding="utf-8")
    logger.info(f"Saved scenario {scenario.name!r} to {path}")
