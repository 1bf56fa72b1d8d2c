"""
Registry of named response and cost functions
Responses are vectorized: they receive a mapping from quantity name to a column
of values and return one value per row
"""

from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from src.utils.error_handler import ModelError
from src.utils.logger import get_logger

logger = get_logger("Registry")

COEFFICIENT_PREFIX = "coef."


@dataclass(frozen=True)
class RegisteredFunction:
    name: str
    func: Callable
    inputs: Optional[Tuple[str, ...]] = None  # None accepts any quantity names


_RESPONSES: Dict[str, RegisteredFunction] = {}
_COSTS: Dict[str, RegisteredFunction] = {}


def register_response(name: str, inputs: Optional[Tuple[str, ...]] = None) -> Callable:
    """Decorator registering a response under a name, optionally declaring its input names"""
    def decorator(func: Callable) -> Callable:
        if name in _RESPONSES:
            logger.warning(f"Response {name!r} re-registered")
        _RESPONSES[name] = RegisteredFunction(name, func, tuple(inputs) if inputs is not None else None)
        return func
    return decorator


def register_cost(name: str) -> Callable:
    """Decorator registering a deterministic cost function of the design variables"""
    def decorator(func: Callable) -> Callable:
        _COSTS[name] = RegisteredFunction(name, func)
        return func
    return decorator


def lookup_response(name: str) -> Optional[RegisteredFunction]:
    return _RESPONSES.get(name)


def get_response(name: str) -> RegisteredFunction:
    registered = _RESPONSES.get(name)
    if registered is None:
        raise ModelError(f"response {name!r} is not registered", context={"known": sorted(_RESPONSES)})
    return registered


def get_cost(name: str) -> RegisteredFunction:
    registered = _COSTS.get(name)
    if registered is None:
        raise ModelError(f"cost function {name!r} is not registered", context={"known": sorted(_COSTS)})
    return registered


def response_names() -> Tuple[str, ...]:
    return tuple(sorted(_RESPONSES))


def bind_response(name: str, names: Tuple[str, ...], params: Mapping) -> Callable[[np.ndarray], np.ndarray]:
    """
    Bind a registered response to a quantity order and keyword parameters

    Args:
        name: Registered response name
        names: Quantity names in column order of z
        params: Keyword parameters passed to the response

    Returns:
        Function mapping z of shape (N, len(names)) to N response values
    """
    registered = get_response(name)
    params = dict(params)

    def bound(z: np.ndarray) -> np.ndarray:
        z = np.atleast_2d(np.asarray(z, dtype=float))
        columns = {n: z[:, i] for i, n in enumerate(names)}
        values = np.asarray(registered.func(columns, **params), dtype=float)
        return np.broadcast_to(values, (z.shape[0],)).copy()

    return bound


# Built-in responses

@register_response("linear")
def linear(inputs: Mapping[str, np.ndarray], offset: float = 0.0, **params) -> np.ndarray:
    """offset + sum of coef.<name> * <name>; unlisted quantities have coefficient 0"""
    rows = len(next(iter(inputs.values()))) if inputs else 1
    total = np.full(rows, float(offset))
    for key, value in params.items():
        if key.startswith(COEFFICIENT_PREFIX):
            total = total + float(value) * inputs[key[len(COEFFICIENT_PREFIX):]]
    return total


@register_response("threshold")
def threshold(inputs: Mapping[str, np.ndarray], quantity: str = "", value: float = 0.0, **params) -> np.ndarray:
    """quantity - value; failure when the quantity drops to the threshold"""
    if quantity not in inputs:
        raise ModelError(f"threshold response needs an existing quantity, got {quantity!r}")
    return inputs[quantity] - float(value)


@register_response("linear_gaussian")
def linear_gaussian(inputs: Mapping[str, np.ndarray], beta: float = 3.0, **params) -> np.ndarray:
    """beta - sum(u_i) / sqrt(d) over all inputs, reliability index beta for standard normals"""
    columns = [inputs[name] for name in sorted(inputs)]
    return float(beta) - np.sum(columns, axis=0) / np.sqrt(len(columns))


# Built-in costs

@register_cost("squared_norm")
def squared_norm(theta: Mapping[str, float], **params) -> float:
    return float(sum(float(np.sum(np.square(v))) for v in theta.values()))
