"""
Result types shared by the bound solver, the design driver and the CLI
"""

from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from src.models.dirac import DiracMeasure

LOWER = "lower"
UPPER = "upper"
BOUND_SIDES = (LOWER, UPPER)


@dataclass(frozen=True)
class GenerationRecord:
    """One optimizer generation as it appears in a trace"""
    generation: int
    best_f: float
    population: int
    evaluations: int
    strategy_probabilities: Tuple[float, ...] = ()
    memory_f: Tuple[float, float] = (0.5, 0.5)
    memory_cr: Tuple[float, float] = (0.5, 0.5)


@dataclass(frozen=True)
class BoundResult:
    """Sharpest bound with the extremal measures that attain it"""
    which: str
    value: float
    certificate: Dict[str, DiracMeasure]
    estimator_error: float
    optimizer_trace: Tuple[GenerationRecord, ...] = ()
    evaluation_seed: Optional[int] = None
    combinations: int = 1
    lines_without_root: int = 0


@dataclass(frozen=True)
class ProbabilityEstimate:
    p: float
    std_error: float
    lines_without_root: int = 0
    direction_refreshed: bool = False
    n_evaluations: int = 0


@dataclass(frozen=True)
class ExpectationEstimate:
    mean: float
    std_error: float
    n_evaluations: int = 0


@dataclass(frozen=True)
class JointEstimate:
    """Tensor-product sum over epistemic support points"""
    value: float
    std_error: float
    combinations: int
    lines_without_root: int = 0
