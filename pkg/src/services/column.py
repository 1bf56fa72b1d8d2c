"""
Buckling column benchmark
I-section column under permanent and environmental compression, with an initial
deflection amplified towards the Euler load. Units inside this module: N, mm, MPa.
"""

import math
from dataclasses import dataclass
from typing import Mapping, NamedTuple, Optional

import numpy as np

import config
from src.models.design import (
    RESPONSE_PARAMETER, CostModel, Coupling, DesignProblem, DesignVariable, ReliabilityConstraint
)
from src.models.uncertainty import (
    ALEATORY, CENTRAL, CLASSICAL, DistributionSpec, MomentConstraint, UncertainQuantity, UQProblem
)
from src.services.registry import register_cost, register_response
from src.utils.error_handler import ModelError

FLANGE_THICKNESS = 15.0  # t_b, mm
WEB_THICKNESS = 10.0  # t_h, mm
COLUMN_LENGTH = 7500.0  # mm
EFFECTIVE_LENGTH_FACTOR = 1.0  # pinned-pinned
KN = 1000.0
M = 1000.0

P_ADM = 1.3e-6
WIDTH_BOUNDS = (200.0, 450.0)
REFERENCE_WIDTH = 324.6

OUQ_G = "ouq_g"
OUQ_E_RANGE_100_500 = "ouq_e_range_100_500"
OUQ_E_RANGE_0_1000 = "ouq_e_range_0_1000"
SCENARIO_KINDS = (OUQ_G, OUQ_E_RANGE_100_500, OUQ_E_RANGE_0_1000)

LIMIT_STATE_INPUTS = ("P_p", "P_e", "delta_0", "y_0", "E")


@dataclass(frozen=True)
class SectionGeometry:
    b: float
    h: Optional[float] = None
    t_b: float = FLANGE_THICKNESS
    t_h: float = WEB_THICKNESS
    length: float = COLUMN_LENGTH

    def __post_init__(self):
        if self.h is None:
            object.__setattr__(self, "h", self.b)
        if not self.b > 0.0:
            raise ModelError(f"flange width must be > 0, got {self.b}")
        if self.h != self.b:
            raise ModelError("section height is tied to the flange width", context={"b": self.b, "h": self.h})


@dataclass(frozen=True)
class ColumnState:
    """Loads in N, initial deflection in mm, yield strength and modulus in MPa"""
    P_p: float
    P_e: float
    delta_0: float
    y_0: float
    E: float

    @classmethod
    def from_engineering_units(cls, P_p_kn: float, P_e_kn: float, delta_0_m: float,
                               y_0: float, E: float) -> "ColumnState":
        return cls(P_p_kn * KN, P_e_kn * KN, delta_0_m * M, y_0, E)


class SectionProperties(NamedTuple):
    area: float
    modulus: float
    inertia: float


def section_properties(geom: SectionGeometry) -> SectionProperties:
    b, h, t_b, t_h = geom.b, geom.h, geom.t_b, geom.t_h
    return SectionProperties(
        area=2.0 * b * t_b + h * t_h,
        modulus=h * t_h ** 3 / (6.0 * b) + b ** 2 * t_b / 3.0,
        inertia=h * t_h ** 3 / 12.0 + b ** 3 * t_b / 6.0,
    )


def euler_load(geom: SectionGeometry, E):
    """Critical buckling load pi^2 E I / (K L)^2"""
    inertia = section_properties(geom).inertia
    return math.pi ** 2 * np.asarray(E, dtype=float) * inertia / (EFFECTIVE_LENGTH_FACTOR * geom.length) ** 2


def limit_state_values(geom: SectionGeometry, P_p, P_e, delta_0, y_0, E) -> np.ndarray:
    """Vectorized limit state; loads at or beyond the Euler load give BUCKLING_FAILURE_VALUE"""
    props = section_properties(geom)
    load = np.asarray(P_p, dtype=float) + np.asarray(P_e, dtype=float)
    critical = euler_load(geom, E)
    y_0 = np.asarray(y_0, dtype=float)
    below = load < critical
    margin = np.where(below, critical - load, 1.0)
    amplification = critical / margin
    utilization = load / (y_0 * props.area) + load * np.asarray(delta_0, dtype=float) / (y_0 * props.modulus) * amplification
    return np.where(below, 1.0 - utilization, config.BUCKLING_FAILURE_VALUE)


def limit_state(geom: SectionGeometry, state: ColumnState) -> float:
    """Negative values mean failure"""
    return float(limit_state_values(geom, state.P_p, state.P_e, state.delta_0, state.y_0, state.E))


@register_response("column_limit_state", inputs=LIMIT_STATE_INPUTS)
def column_limit_state(inputs: Mapping[str, np.ndarray], b: float = REFERENCE_WIDTH, **params) -> np.ndarray:
    geom = SectionGeometry(float(b))
    return limit_state_values(geom, *(inputs[name] for name in LIMIT_STATE_INPUTS))


@register_cost("column_area")
def column_area(theta: Mapping[str, float], **params) -> float:
    return section_properties(SectionGeometry(float(theta["b"]))).area


def _common_quantities():
    return {
        "P_p": UncertainQuantity("P_p", 100_000.0, 200_000.0),
        "delta_0": UncertainQuantity("delta_0", 0.0, 60.0),
        "y_0": UncertainQuantity("y_0", 250.0, 550.0, ALEATORY,
                                 distribution=DistributionSpec.of("lognormal", mean=400.0, sd=32.0)),
        "E": UncertainQuantity("E", 170_000.0, 250_000.0, ALEATORY,
                               distribution=DistributionSpec.of("lognormal", mean=210_000.0, sd=8_400.0)),
    }


def _gumbel_quantities():
    load = UncertainQuantity("P_e", 0.0, 2_000_000.0, ALEATORY,
                             distribution=DistributionSpec.of("gumbel", loc="a_e", scale="b_e"))
    location = UncertainQuantity(
        "a_e", 188_000.0, 236_000.0,
        moment_constraints=(MomentConstraint(1, 201_400.0, 222_600.0),))
    scale = UncertainQuantity(
        "b_e", 37_000.0, 74_000.0,
        moment_constraints=(MomentConstraint(1, 49_685.0, 54_915.0),))
    return load, (location, scale)


def _moment_load(lower_kn: float, upper_kn: float) -> UncertainQuantity:
    # mean 209.4-279 kN, variance 2251.91-9007.66 kN^2, third central moment 121775-974204 kN^3
    return UncertainQuantity(
        "P_e", lower_kn * KN, upper_kn * KN,
        moment_constraints=(
            MomentConstraint(1, 209_400.0, 279_000.0, CLASSICAL),
            MomentConstraint(2, 2.25191e9, 9.00766e9, CENTRAL),
            MomentConstraint(3, 1.21775e14, 9.74204e14, CENTRAL),
        ))


def reliability_problem(kind: str, b: float = REFERENCE_WIDTH) -> UQProblem:
    """Limit-state problem of a scenario at a fixed flange width"""
    common = _common_quantities()
    if kind == OUQ_G:
        load, extra = _gumbel_quantities()
    elif kind == OUQ_E_RANGE_100_500:
        load, extra = _moment_load(100.0, 500.0), ()
    elif kind == OUQ_E_RANGE_0_1000:
        load, extra = _moment_load(0.0, 1000.0), ()
    else:
        raise ModelError(f"unknown column scenario {kind!r}", context={"known": SCENARIO_KINDS})
    quantities = (common["P_p"], load, common["delta_0"], common["y_0"], common["E"]) + tuple(extra)
    return UQProblem(quantities=quantities, response="column_limit_state",
                     response_params=(("b", float(b)),), name=kind)


def scenario(kind: str) -> DesignProblem:
    """Area minimization of the column under the reliability constraint of a scenario"""
    width = DesignVariable("b", lower=WIDTH_BOUNDS[0], upper=WIDTH_BOUNDS[1],
                           coupling=Coupling(RESPONSE_PARAMETER, "b"))
    return DesignProblem(
        variables=(width,),
        cost=CostModel(function="column_area"),
        reliability=ReliabilityConstraint(reliability_problem(kind), P_ADM),
        name=kind,
    )
