"""
Data models for the OUQ-RBDO toolkit
"""

from .uncertainty import (
    MomentConstraint,
    ParameterSpec,
    DistributionSpec,
    UncertainQuantity,
    UQProblem,
    Diagnostic,
    validate,
    dirac_term_count
)

from .dirac import (
    DiracMeasure,
    classical_moment,
    central_moment,
    satisfies
)

from .results import BoundResult, GenerationRecord, ProbabilityEstimate, ExpectationEstimate

from .design import (
    Coupling,
    DesignVariable,
    CostModel,
    ReliabilityConstraint,
    DesignProblem,
    DesignEvaluation,
    SolveResult,
    validate_design
)

from .scenario_store import Scenario, parse, render, load_scenario, save_scenario

__all__ = [
    'MomentConstraint',
    'ParameterSpec',
    'DistributionSpec',
    'UncertainQuantity',
    'UQProblem',
    'Diagnostic',
    'validate',
    'dirac_term_count',
    'DiracMeasure',
    'classical_moment',
    'central_moment',
    'satisfies',
    'BoundResult',
    'GenerationRecord',
    'ProbabilityEstimate',
    'ExpectationEstimate',
    'Coupling',
    'DesignVariable',
    'CostModel',
    'ReliabilityConstraint',
    'DesignProblem',
    'DesignEvaluation',
    'SolveResult',
    'validate_design',
    'Scenario',
    'parse',
    'render',
    'load_scenario',
    'save_scenario'
]
