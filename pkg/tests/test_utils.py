import math
from dataclasses import dataclass

import numpy as np
import pytest

from src.utils.cache import CacheManager, LRUCache
from src.utils.error_handler import CouplingError, DegenerateMomentError, OUQError, ValidationError
from src.utils.helpers import derive_seed, quantize, stable_hash, to_jsonable


def test_derive_seed_is_deterministic_and_key_sensitive():
    assert derive_seed(42, 1, 2) == derive_seed(42, 1, 2)
    assert derive_seed(42, 1, 2) != derive_seed(42, 2, 1)
    assert derive_seed(42, 0) != derive_seed(43, 0)
    assert 0 <= derive_seed(2 ** 64 - 1, 7) < 2 ** 64


def test_stable_hash_ignores_key_order():
    assert stable_hash({"a": 1, "b": (2.0, 3)}) == stable_hash({"b": [2.0, 3], "a": 1})
    assert stable_hash({"a": 1}) != stable_hash({"a": 2})


def test_quantize_rounds_to_multiples():
    assert quantize([0.30000000000000004, 1.0], 1e-9) == quantize([0.3, 1.0], 1e-9)
    assert quantize([1.26], 0.5) == (1.5,)


@dataclass(frozen=True)
class _Point:
    x: float
    tags: tuple


def test_to_jsonable_converts_numpy_and_special_floats():
    doc = to_jsonable({"p": _Point(np.float64(1.5), (np.int64(2), True)),
                       "arr": np.array([1.0, 2.0]), "nan": math.nan, "inf": -math.inf})
    assert doc == {"p": {"x": 1.5, "tags": [2, True]}, "arr": [1.0, 2.0], "nan": "nan", "inf": "-inf"}
    assert isinstance(doc["p"]["tags"][0], int)


def test_lru_cache_evicts_least_recently_used():
    cache = LRUCache(max_size=2)
    cache.set("a", 1)
    cache.set("b", 2)
    assert cache.get("a") == 1
    cache.set("c", 3)
    assert cache.get("b") is None
    assert cache.get("a") == 1
    assert cache.get("c") == 3
    assert cache.hits == 3
    assert cache.misses == 1


def test_lru_cache_overwrites_and_clears():
    cache = LRUCache(max_size=2)
    cache.set("a", 1)
    cache.set("a", 2)
    assert cache.size() == 1
    assert cache.get("a") == 2
    cache.clear()
    assert cache.size() == 0
    assert (cache.hits, cache.misses) == (0, 0)
    assert cache.get("a") is None


def test_design_cache_quantizes_theta():
    manager = CacheManager(max_size=8)
    manager.set_design((0.1 + 0.2,), "h", "evaluation")
    assert manager.get_design((0.3,), "h") == "evaluation"
    assert manager.get_design((0.3,), "other") is None
    stats = manager.get_cache_stats()["design_cache"]
    assert stats["size"] == 1
    assert stats["hits"] == 1


def test_errors_carry_context():
    e = CouplingError("escapes", variable="theta", quantity="y", context={"range": (0, 1)})
    assert isinstance(e, OUQError)
    assert e.variable == "theta" and e.quantity == "y"
    assert e.context["range"] == (0, 1)
    assert DegenerateMomentError("boundary", order=3).order == 3
    assert ValidationError("bad", diagnostics=["d"]).diagnostics == ["d"]
