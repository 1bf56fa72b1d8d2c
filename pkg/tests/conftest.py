import pytest

from src.services.optimizer import OptimizerConfig
from src.services.sampling import EstimatorConfig
from src.utils.cache import cache_manager


@pytest.fixture(autouse=True)
def clear_design_cache():
    cache_manager.clear_all_caches()
    yield
    cache_manager.clear_all_caches()


@pytest.fixture
def quick_optimizer():
    return OptimizerConfig(population=30, max_iterations=60, seed=7)


@pytest.fixture
def quick_estimator():
    return EstimatorConfig(method="line_sampling", n_lines=20, n_samples=20000, seed=11)
