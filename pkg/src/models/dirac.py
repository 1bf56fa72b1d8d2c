"""
Convex combinations of Dirac masses and their moment arithmetic
"""

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

import config
from src.models.uncertainty import CENTRAL, MomentConstraint, UncertainQuantity
from src.utils.error_handler import ModelError


@dataclass(frozen=True)
class DiracMeasure:
    """Weighted support points of a reduced epistemic measure; coincident points are allowed"""
    points: Tuple[float, ...]
    weights: Tuple[float, ...]

    def __post_init__(self):
        points = tuple(float(p) for p in self.points)
        weights = [float(w) for w in self.weights]
        if not points or len(points) != len(weights):
            raise ModelError("measure needs as many weights as points and at least one point",
                             context={"points": len(points), "weights": len(weights)})
        if not all(math.isfinite(p) for p in points):
            raise ModelError("support points must be finite", context={"points": points})

        # eigenvector noise can leave weights a hair outside [0, 1]
        for i, w in enumerate(weights):
            if -config.WEIGHT_TOLERANCE <= w < 0.0:
                weights[i] = 0.0
            elif 1.0 < w <= 1.0 + config.WEIGHT_TOLERANCE:
                weights[i] = 1.0
        if any(not 0.0 <= w <= 1.0 for w in weights):
            raise ModelError("weights must lie in [0, 1]", context={"weights": tuple(weights)})

        total = math.fsum(weights)
        if abs(total - 1.0) > config.WEIGHT_RENORMALIZE:
            raise ModelError(f"weights sum to {total}, expected 1", context={"weights": tuple(weights)})
        if abs(total - 1.0) > config.WEIGHT_TOLERANCE:
            weights = [w / total for w in weights]

        object.__setattr__(self, "points", points)
        object.__setattr__(self, "weights", tuple(weights))

    @classmethod
    def point_mass(cls, point: float) -> "DiracMeasure":
        return cls((point,), (1.0,))

    def __len__(self) -> int:
        return len(self.points)


def _check_order(b: int) -> None:
    if b < 1:
        raise ModelError("order must be >= 1", context={"order": b})


def classical_moment(m: DiracMeasure, b: int) -> float:
    """Sum of w_k * y_k**b"""
    _check_order(b)
    return math.fsum(w * p ** b for p, w in zip(m.points, m.weights))


def central_moment(m: DiracMeasure, b: int) -> float:
    """Sum of w_k * (y_k - mean)**b"""
    _check_order(b)
    mean = classical_moment(m, 1)
    return math.fsum(w * (p - mean) ** b for p, w in zip(m.points, m.weights))


def central_from_raw(raw: Sequence[float], order: int) -> float:
    """
    Central moment of the given order from raw moments c_1..c_order

    Args:
        raw: Raw moments starting at order 1
        order: Central moment order

    Returns:
        Central moment value
    """
    mean = raw[0]
    moments = [1.0] + list(raw[:order])
    return math.fsum(math.comb(order, i) * moments[i] * (-mean) ** (order - i) for i in range(order + 1))


def constraint_value(m: DiracMeasure, constraint: MomentConstraint) -> float:
    if constraint.kind == CENTRAL:
        return central_moment(m, constraint.order)
    return classical_moment(m, constraint.order)


def constraint_violation(value: float, constraint: MomentConstraint) -> float:
    """Distance of a moment value from its constraint interval, scaled by the bound magnitude"""
    gap = max(constraint.lower - value, value - constraint.upper, 0.0)
    return gap / max(1.0, abs(constraint.lower), abs(constraint.upper))


def satisfies(m: DiracMeasure, q: UncertainQuantity, tol: float = config.CERTIFICATE_TOLERANCE) -> bool:
    """
    Check range and moment constraints of a quantity

    Tolerances are relative: a constraint interval is inflated by tol * max(1, |bound|)
    on each side, and the range by tol * max(1, range width).
    """
    slack = tol * max(1.0, q.width)
    points = np.asarray(m.points)
    if np.any(points < q.lower - slack) or np.any(points > q.upper + slack):
        return False
    for c in q.moment_constraints:
        value = constraint_value(m, c)
        if value < c.lower - tol * max(1.0, abs(c.lower)) or value > c.upper + tol * max(1.0, abs(c.upper)):
            return False
    return True
