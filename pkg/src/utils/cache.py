"""
In-memory caching for the OUQ-RBDO toolkit
Thread-safe LRU cache used to avoid re-running inner bound computations
for design candidates that the outer loop revisits
"""

import threading
from collections import OrderedDict
from typing import Any, Dict, Hashable, Optional, Tuple

import config

from .helpers import quantize


class LRUCache:
    """Thread-safe cache with least-recently-used eviction; entries live until evicted or cleared"""

    def __init__(self, max_size: int = 1000):
        self.max_size = max_size
        self.cache = OrderedDict()
        self.hits = 0
        self.misses = 0
        self.lock = threading.RLock()

    def get(self, key: Hashable) -> Optional[Any]:
        """Get value from cache"""
        with self.lock:
            if key in self.cache:
                self.cache.move_to_end(key)
                self.hits += 1
                return self.cache[key]
            self.misses += 1
            return None

    def set(self, key: Hashable, value: Any) -> None:
        """Set value in cache; identical keys are last-write-wins"""
        with self.lock:
            self.cache.pop(key, None)
            if len(self.cache) >= self.max_size:
                self.cache.popitem(last=False)
            self.cache[key] = value

    def clear(self) -> None:
        """Clear all cache entries and counters"""
        with self.lock:
            self.cache.clear()
            self.hits = 0
            self.misses = 0

    def size(self) -> int:
        """Get current cache size"""
        with self.lock:
            return len(self.cache)


DesignKey = Tuple[Tuple[float, ...], str]


class CacheManager:
    """Centralized cache management"""

    def __init__(self, max_size: int = config.CACHE_SIZE):
        self.design_cache = LRUCache(max_size=max_size)

    @staticmethod
    def design_key(theta, scenario_hash: str, quantum: float = config.DESIGN_QUANTUM) -> DesignKey:
        """Key a design candidate by its quantized coordinates and scenario"""
        return quantize(theta, quantum), scenario_hash

    def get_design(self, theta, scenario_hash: str) -> Optional[Any]:
        return self.design_cache.get(self.design_key(theta, scenario_hash))

    def set_design(self, theta, scenario_hash: str, evaluation: Any) -> None:
        self.design_cache.set(self.design_key(theta, scenario_hash), evaluation)

    def get_cache_stats(self) -> Dict[str, Any]:
        """Get cache statistics"""
        return {
            "design_cache": {
                "size": self.design_cache.size(),
                "max_size": self.design_cache.max_size,
                "hits": self.design_cache.hits,
                "misses": self.design_cache.misses
            }
        }

    def clear_all_caches(self) -> None:
        self.design_cache.clear()


# Global cache manager instance
cache_manager = CacheManager()
