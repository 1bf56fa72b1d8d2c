"""
Performance tracking for the OUQ-RBDO toolkit
Per-operation timings plus process memory readings via psutil
"""

import functools
import threading
import time
from collections import defaultdict
from contextlib import contextmanager
from typing import Any, Callable, Dict

import psutil

from .logger import get_logger

logger = get_logger("Performance")


class PerformanceTracker:
    """Collects call durations per operation and the peak resident memory"""

    def __init__(self):
        self.start_time = time.time()
        self.function_metrics = defaultdict(list)
        self.peak_rss_mb = 0.0
        self.lock = threading.Lock()

    def record_function(self, function_name: str, duration: float, success: bool = True):
        """Record one call of an operation"""
        rss_mb = psutil.Process().memory_info().rss / 1024 / 1024
        with self.lock:
            self.function_metrics[function_name].append({"duration": duration, "success": success})
            # Keep only last 1000 calls per operation
            if len(self.function_metrics[function_name]) > 1000:
                self.function_metrics[function_name] = self.function_metrics[function_name][-1000:]
            self.peak_rss_mb = max(self.peak_rss_mb, rss_mb)

    def get_performance_summary(self) -> Dict[str, Any]:
        """Summarize recorded operations"""
        with self.lock:
            function_summary = {}
            for func_name, metrics in self.function_metrics.items():
                durations = [m["duration"] for m in metrics]
                successes = [m["success"] for m in metrics]
                function_summary[func_name] = {
                    "total_calls": len(metrics),
                    "success_rate": sum(successes) / len(successes) * 100,
                    "avg_duration": sum(durations) / len(durations),
                    "max_duration": max(durations),
                }
            return {
                "uptime_seconds": time.time() - self.start_time,
                "function_metrics": function_summary,
                "peak_rss_mb": self.peak_rss_mb,
            }

    def reset(self) -> None:
        with self.lock:
            self.start_time = time.time()
            self.function_metrics.clear()
            self.peak_rss_mb = 0.0


# Global performance tracker
performance_tracker = PerformanceTracker()


def track_performance(operation: str = "") -> Callable:
    """Decorator to time every call of a function"""
    def decorator(func: Callable) -> Callable:
        name = operation or func.__name__

        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            start_time = time.perf_counter()
            success = True
            try:
                return func(*args, **kwargs)
            except Exception:
                success = False
                raise
            finally:
                performance_tracker.record_function(name, time.perf_counter() - start_time, success)

        return wrapper

    return decorator


@contextmanager
def track_sync_operation(operation_name: str):
    """Context manager for timing a block"""
    start_time = time.perf_counter()
    success = True
    try:
        yield
    except Exception:
        success = False
        raise
    finally:
        performance_tracker.record_function(operation_name, time.perf_counter() - start_time, success)


def get_memory_usage() -> Dict[str, float]:
    """Get process and system memory information"""
    process = psutil.Process()
    memory_info = process.memory_info()
    return {
        "rss_mb": memory_info.rss / 1024 / 1024,
        "vms_mb": memory_info.vms / 1024 / 1024,
        "percent": process.memory_percent(),
        "available_system_mb": psutil.virtual_memory().available / 1024 / 1024,
    }
