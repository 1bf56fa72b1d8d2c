"""
Utility functions for the OUQ-RBDO toolkit
"""

from .helpers import derive_seed, stable_hash, to_jsonable, quantize

from .logger import setup_logger, get_logger
from .error_handler import (
    handle_errors,
    log_function_call,
    OUQError,
    ValidationError,
    ScenarioError,
    ModelError,
    DegenerateMomentError,
    EstimatorError,
    EnumerationCapError,
    OptimizerError,
    CouplingError,
    DesignEvaluationError
)

from .cache import cache_manager, CacheManager, LRUCache
from .performance import performance_tracker, track_performance, track_sync_operation, get_memory_usage

__all__ = [
    'derive_seed',
    'stable_hash',
    'to_jsonable',
    'quantize',
    'setup_logger',
    'get_logger',
    'handle_errors',
    'log_function_call',
    'OUQError',
    'ValidationError',
    'ScenarioError',
    'ModelError',
    'DegenerateMomentError',
    'EstimatorError',
    'EnumerationCapError',
    'OptimizerError',
    'CouplingError',
    'DesignEvaluationError',
    'cache_manager',
    'CacheManager',
    'LRUCache',
    'performance_tracker',
    'track_performance',
    'track_sync_operation',
    'get_memory_usage'
]
