"""
Canonical moments on a bounded interval
Bijection between moment sequences and canonical coordinates in (0, 1), recovery
of the matching Dirac measure, and the per-quantity box parameterization used by
the bound solver
"""

import math
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

import config
from src.models.dirac import DiracMeasure, central_from_raw, constraint_value, constraint_violation
from src.models.uncertainty import CENTRAL, MomentConstraint, UncertainQuantity, dirac_term_count
from src.utils.error_handler import DegenerateMomentError, ModelError
from src.utils.logger import get_logger

logger = get_logger("Canonical")

MIXED = "mixed"
ALL_CANONICAL = "all_canonical"

Interval = Tuple[float, float]


@dataclass(frozen=True)
class CanonicalVector:
    """Decoded search coordinates of one quantity"""
    interval: Interval
    free_classical: Tuple[float, ...]  # moments of the orders carrying interval constraints
    canonical_tail: Tuple[float, ...]  # canonical coordinates of the remaining orders
    canonical: Tuple[float, ...]  # full canonical sequence p_1..p_(2n-1)


@dataclass(frozen=True)
class DecodedMeasure:
    measure: DiracMeasure
    vector: CanonicalVector
    violation: float


def _interval(interval: Sequence[float]) -> Interval:
    a, b = float(interval[0]), float(interval[1])
    if not a < b:
        raise ModelError("interval lower bound must be below upper bound", context={"interval": (a, b)})
    return a, b


def _to_unit(interval: Interval, moments: Sequence[float]) -> List[float]:
    """Raw moments of Y on [a, b] to raw moments of X = (Y - a) / (b - a) on [0, 1]"""
    a, b = interval
    width = b - a
    raw = [1.0] + [float(m) for m in moments]
    unit = []
    for k in range(1, len(raw)):
        total = math.fsum(math.comb(k, i) * raw[i] * (-a) ** (k - i) for i in range(k + 1))
        unit.append(total / width ** k)
    return unit


def _from_unit(interval: Interval, unit: Sequence[float]) -> List[float]:
    """Inverse of _to_unit: raw moments of Y = a + (b - a) X"""
    a, b = interval
    width = b - a
    raw = [1.0] + [float(c) for c in unit]
    return [
        math.fsum(math.comb(k, i) * width ** i * raw[i] * a ** (k - i) for i in range(k + 1))
        for k in range(1, len(raw))
    ]


def _recurrence(p: Sequence[float], depth: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Monic three-term recurrence coefficients from canonical moments

    Args:
        p: Canonical coordinates p_1, p_2, ... (padded with 0.5 where missing)
        depth: Number of diagonal coefficients wanted

    Returns:
        (alpha_0..alpha_(depth-1), beta_1..beta_(depth-1))
    """
    needed = 2 * depth
    padded = list(p[:needed]) + [0.5] * max(0, needed - len(p))
    zeta = np.zeros(needed + 1)
    zeta[1] = padded[0]
    for k in range(2, needed + 1):
        zeta[k] = (1.0 - padded[k - 2]) * padded[k - 1]
    alpha = np.array([zeta[2 * i] + zeta[2 * i + 1] for i in range(depth)])
    beta = np.array([zeta[2 * i - 1] * zeta[2 * i] for i in range(1, depth)])
    return alpha, beta


def _unit_moments(p: Sequence[float], n: int) -> List[float]:
    """Raw moments c_1..c_n on [0, 1] of the sequence with canonical coordinates p"""
    depth = n // 2 + 1
    alpha, beta = _recurrence(p, depth)
    jacobi = np.diag(alpha) + np.diag(np.ones(depth - 1), 1) + np.diag(beta, -1)
    row = np.zeros(depth)
    row[0] = 1.0
    moments = []
    for _ in range(n):
        row = row @ jacobi
        moments.append(float(row[0]))
    return moments


def _moment_extremes(prefix: Sequence[float], order: int) -> Tuple[float, float]:
    """Smallest and largest unit moment of the given order given the lower canonical coordinates"""
    low = _unit_moments(list(prefix) + [0.0], order)[-1]
    high = _unit_moments(list(prefix) + [1.0], order)[-1]
    return low, high


def canonical_to_moments(interval: Sequence[float], canonical: Sequence[float]) -> List[float]:
    """
    Raw moment sequence on an interval from canonical coordinates

    Args:
        interval: Support [a, b]
        canonical: Coordinates p_1..p_n in [0, 1]

    Returns:
        Raw moments c_1..c_n on [a, b]
    """
    interval = _interval(interval)
    for order, value in enumerate(canonical, start=1):
        if not 0.0 <= value <= 1.0:
            raise ModelError(f"canonical coordinate of order {order} outside [0, 1]",
                             context={"order": order, "value": value})
    if not len(canonical):
        return []
    return _from_unit(interval, _unit_moments(canonical, len(canonical)))


def moments_to_canonical(interval: Sequence[float], moments: Sequence[float]) -> List[float]:
    """
    Canonical coordinates of a moment sequence strictly inside the moment space

    Args:
        interval: Support [a, b]
        moments: Raw moments c_1..c_n on [a, b]

    Returns:
        Canonical coordinates p_1..p_n, each in (0, 1)

    Raises:
        DegenerateMomentError: the sequence lies on or outside the moment-space boundary
    """
    interval = _interval(interval)
    unit = _to_unit(interval, moments)
    canonical: List[float] = []
    for order, value in enumerate(unit, start=1):
        low, high = _moment_extremes(canonical, order)
        span = high - low
        if not span > 0.0:
            raise DegenerateMomentError("degenerate moment sequence", order=order,
                                        context={"moments": list(moments)})
        p = (value - low) / span
        if not 0.0 < p < 1.0:
            raise DegenerateMomentError("degenerate moment sequence", order=order,
                                        context={"moments": list(moments), "canonical": p})
        canonical.append(p)
    return canonical


def canonical_to_dirac(interval: Sequence[float], canonical: Sequence[float], n_points: int) -> DiracMeasure:
    """
    Dirac measure with n_points support points matching the first 2*n_points - 1 moments

    Coordinates are clamped into [CANONICAL_CLAMP, 1 - CANONICAL_CLAMP]; nodes are the
    eigenvalues of the symmetric Jacobi matrix and weights the squared first components
    of its normalized eigenvectors.
    """
    interval = _interval(interval)
    if n_points < 1:
        raise ModelError("a measure needs at least one support point", context={"n_points": n_points})
    needed = 2 * n_points - 1
    if len(canonical) < needed:
        raise ModelError(f"{n_points} support points need {needed} canonical coordinates",
                         context={"given": len(canonical)})

    clamp = config.CANONICAL_CLAMP
    p = np.clip(np.asarray(canonical[:needed], dtype=float), clamp, 1.0 - clamp)
    alpha, beta = _recurrence(p, n_points)
    a, b = interval
    try:
        jacobi = np.diag(alpha)
        if n_points > 1:
            off = np.sqrt(beta)
            jacobi = jacobi + np.diag(off, 1) + np.diag(off, -1)
        nodes, vectors = np.linalg.eigh(jacobi)
        weights = vectors[0, :] ** 2
    except np.linalg.LinAlgError as e:
        logger.warning(f"Jacobi eigenproblem failed ({e}); collapsing to the mean")
        mean = _unit_moments(p, 1)[0]
        return DiracMeasure.point_mass(a + (b - a) * mean)

    nodes = np.clip(nodes, 0.0, 1.0)
    weights = np.clip(weights, 0.0, None)
    weights = weights / weights.sum()
    return DiracMeasure(tuple(a + (b - a) * nodes), tuple(weights))


def _unit_constraint_value(interval: Interval, unit: Sequence[float], constraint: MomentConstraint) -> float:
    raw = _from_unit(interval, unit)
    if constraint.kind == CENTRAL:
        return central_from_raw(raw, constraint.order)
    return raw[constraint.order - 1]


class MomentParameterization:
    """
    Box parameterization of the admissible Dirac measures of one epistemic quantity

    A point u of [0, 1]^(2n-1) decodes to a canonical sequence. In mixed mode the
    orders carrying moment constraints are restricted to the constraint box: moment j
    is affine in p_j, so the admissible p_j form an interval and u_j is spread over it.
    In all_canonical mode p_j = u_j and constraints are only checked after decoding.
    Constraints of orders above 2n-1 are always checked after decoding.
    """

    def __init__(self, quantity: UncertainQuantity, mode: str = config.CANONICAL_MODE):
        if mode not in (MIXED, ALL_CANONICAL):
            raise ModelError(f"unknown canonical mode {mode!r}")
        self.quantity = quantity
        self.mode = mode
        self.n_points = dirac_term_count(quantity)
        self.dimension = 2 * self.n_points - 1
        self.interval = _interval(quantity.range)

        self.embedded: Dict[int, List[MomentConstraint]] = {}
        self.checked: List[MomentConstraint] = []
        for c in quantity.moment_constraints:
            if mode == MIXED and c.order <= self.dimension:
                self.embedded.setdefault(c.order, []).append(c)
            else:
                self.checked.append(c)

    def _admissible(self, prefix: List[float], order: int) -> Tuple[float, float, float]:
        """Admissible p-interval for an embedded order plus the violation if it is empty"""
        low_unit = _unit_moments(prefix + [0.0], order)
        high_unit = _unit_moments(prefix + [1.0], order)
        p_low, p_high, violation = 0.0, 1.0, 0.0
        for c in self.embedded[order]:
            f_low = _unit_constraint_value(self.interval, low_unit, c)
            f_high = _unit_constraint_value(self.interval, high_unit, c)
            span = f_high - f_low
            if span <= 1e-14 * max(1.0, abs(f_low), abs(f_high)):
                violation += constraint_violation(f_low, c)
                continue
            p_low = max(p_low, (c.lower - f_low) / span)
            p_high = min(p_high, (c.upper - f_low) / span)
        if p_low > p_high:
            violation += p_low - p_high
        return p_low, p_high, violation

    def decode(self, u: Sequence[float]) -> DecodedMeasure:
        """Decode a point of the unit box into a measure and its constraint violation"""
        if len(u) != self.dimension:
            raise ModelError(f"expected {self.dimension} coordinates for {self.quantity.name}, got {len(u)}")
        clamp = config.CANONICAL_CLAMP
        canonical: List[float] = []
        free_classical: List[float] = []
        tail: List[float] = []
        violation = 0.0
        for order in range(1, self.dimension + 1):
            x = float(u[order - 1])
            if order not in self.embedded:
                p = min(max(x, clamp), 1.0 - clamp)
                canonical.append(p)
                tail.append(p)
                continue
            p_low, p_high, gap = self._admissible(canonical, order)
            if gap > 0.0:
                violation += gap
                p = 0.5 * (p_low + p_high)
            else:
                p = p_low + x * (p_high - p_low)
            canonical.append(min(max(p, clamp), 1.0 - clamp))
            free_classical.append(_from_unit(self.interval, _unit_moments(canonical, order))[order - 1])

        measure = canonical_to_dirac(self.interval, canonical, self.n_points)
        for c in self.checked:
            violation += constraint_violation(constraint_value(measure, c), c)

        vector = CanonicalVector(self.interval, tuple(free_classical), tuple(tail), tuple(canonical))
        return DecodedMeasure(measure, vector, violation)
