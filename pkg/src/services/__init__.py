"""
Services for the OUQ-RBDO toolkit
"""

from .registry import (
    register_response,
    register_cost,
    get_response,
    get_cost,
    response_names,
    bind_response
)
from .canonical import (
    canonical_to_moments,
    moments_to_canonical,
    canonical_to_dirac,
    MomentParameterization
)
from .sampling import (
    EstimatorConfig,
    AleatoryBlock,
    to_standard_normal,
    from_standard_normal,
    chi_failure,
    chi_expectation
)
from .optimizer import OptimizerConfig, OptimizationResult, minimize, minimize_scalar_monotone
from .ouq import joint_probability, joint_expectation, sharpest_bound, bound_interval
from . import column
from .rbdo import InnerConfigs, resolve_coupling, evaluate_design, solve
from .catalog import list_builtin, get_builtin

__all__ = [
    'register_response',
    'register_cost',
    'get_response',
    'get_cost',
    'response_names',
    'bind_response',
    'canonical_to_moments',
    'moments_to_canonical',
    'canonical_to_dirac',
    'MomentParameterization',
    'EstimatorConfig',
    'AleatoryBlock',
    'to_standard_normal',
    'from_standard_normal',
    'chi_failure',
    'chi_expectation',
    'OptimizerConfig',
    'OptimizationResult',
    'minimize',
    'minimize_scalar_monotone',
    'joint_probability',
    'joint_expectation',
    'sharpest_bound',
    'bound_interval',
    'column',
    'InnerConfigs',
    'resolve_coupling',
    'evaluate_design',
    'solve',
    'list_builtin',
    'get_builtin'
]
