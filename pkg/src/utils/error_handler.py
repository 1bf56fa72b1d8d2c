"""
Error hierarchy and error-handling decorators for the OUQ-RBDO toolkit
Every error carries a context dictionary that ends up in the logs
"""

import traceback
from functools import wraps
from typing import Any, Callable, Dict, Optional, Sequence

from .logger import get_logger

logger = get_logger("ErrorHandler")


class OUQError(Exception):
    """Base exception class for toolkit errors"""
    def __init__(self, message: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.context = context or {}


class ValidationError(OUQError):
    """A problem description violates its invariants"""
    def __init__(self, message: str, diagnostics: Sequence[Any] = (), context: Optional[Dict[str, Any]] = None):
        super().__init__(message, context)
        self.diagnostics = list(diagnostics)


class ScenarioError(OUQError):
    """Scenario document could not be parsed"""
    pass


class ModelError(OUQError):
    """Invalid arguments to a model-level operation"""
    pass


class DegenerateMomentError(OUQError):
    """Moment sequence lies on or outside the moment-space boundary"""
    def __init__(self, message: str, order: int, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, context)
        self.order = order


class EstimatorError(OUQError):
    """Probability or expectation integration failed"""
    def __init__(self, message: str, sample: Any = None, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, context)
        self.sample = sample


class EnumerationCapError(OUQError):
    """Tensor product of support points is larger than the configured cap"""
    def __init__(self, message: str, size: int, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, context)
        self.size = size


class OptimizerError(OUQError):
    """Invalid optimizer configuration or unusable search"""
    pass


class CouplingError(OUQError):
    """A design-coupled uncertainty descriptor escapes its physical range"""
    def __init__(self, message: str, variable: str, quantity: str, context: Optional[Dict[str, Any]] = None):
        super().__init__(message, context)
        self.variable = variable
        self.quantity = quantity


class DesignEvaluationError(OUQError):
    """Inner solver error raised while evaluating a design candidate"""
    def __init__(self, message: str, theta: Sequence[float], context: Optional[Dict[str, Any]] = None):
        super().__init__(message, context)
        self.theta = list(theta)


def handle_errors(func: Callable) -> Callable:
    """
    Decorator that logs toolkit errors with their context and re-raises

    Args:
        func: Function to wrap with error handling

    Returns:
        Wrapped function
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except OUQError as e:
            logger.error(
                f"Error in {func.__name__}: {e.message}",
                extra={"function": func.__name__, "context": e.context}
            )
            raise
        except Exception as e:
            logger.error(
                f"Unexpected error in {func.__name__}: {e}",
                extra={"function": func.__name__, "traceback": traceback.format_exc()}
            )
            raise

    return wrapper


def log_function_call(func: Callable) -> Callable:
    """
    Decorator to trace function calls at DEBUG level

    Args:
        func: Function to wrap with logging

    Returns:
        Wrapped function with logging
    """
    @wraps(func)
    def wrapper(*args, **kwargs):
        logger.debug(f"Calling {func.__name__}")
        try:
            result = func(*args, **kwargs)
            logger.debug(f"{func.__name__} completed successfully")
            return result
        except Exception as e:
            logger.debug(f"{func.__name__} failed with error: {e}")
            raise

    return wrapper
