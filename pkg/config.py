import os

from dotenv import load_dotenv

load_dotenv()

# Logging Configuration
LOG_LEVEL = os.getenv("OUQ_LOG_LEVEL", "INFO")
LOG_FILE = os.getenv("OUQ_LOG_FILE", "")

# Run Configuration
SEED = int(os.getenv("OUQ_SEED", "20231017"))
REPETITIONS = int(os.getenv("OUQ_REPETITIONS", "1"))
WORKERS = int(os.getenv("OUQ_WORKERS", str(min(8, os.cpu_count() or 1))))

# Optimizer Configuration (population 50, 100 generations)
POPULATION = int(os.getenv("OUQ_POPULATION", "50"))
ITERATIONS = int(os.getenv("OUQ_ITERATIONS", "100"))
MIN_POPULATION = 4
MEMORY_SIZE = 6  # success-history slots per strategy
ARCHIVE_RATE = 1.0
PBEST_RATE = 0.11
STRATEGY_PRIOR = 2  # pseudo-count n0 for strategy competition
GRADIENT_STEP = 1e-6
BISECTION_TOLERANCE = float(os.getenv("OUQ_BISECTION_TOL", "0.05"))

# Estimator Configuration (50 lines)
ESTIMATOR_METHOD = os.getenv("OUQ_METHOD", "line_sampling")
LINES = int(os.getenv("OUQ_LINES", "50"))
SAMPLES = int(os.getenv("OUQ_SAMPLES", "10000"))
ROOT_TOLERANCE = 1e-6
LINE_SCAN_STEP = 0.5
LINE_SCAN_LIMIT = 10.0
DIRECTION_CHECK_LINES = 5
DIRECTION_SPREAD_LIMIT = 0.2
SAMPLE_CHUNK = 100000
# Certificates are re-estimated on a fresh seed with this many times the lines/samples
CERTIFICATE_SAMPLE_FACTOR = int(os.getenv("OUQ_CERTIFICATE_FACTOR", "4"))

# OUQ Configuration
ENUMERATION_CAP = int(os.getenv("OUQ_ENUMERATION_CAP", "100000"))
CANONICAL_MODE = os.getenv("OUQ_CANONICAL_MODE", "mixed")
CANONICAL_CLAMP = 1e-9
WEIGHT_TOLERANCE = 1e-12
WEIGHT_RENORMALIZE = 1e-9
CERTIFICATE_TOLERANCE = 1e-6
INFEASIBLE_PENALTY = 1e10

# RBDO Configuration
DESIGN_QUANTUM = 1e-9
CACHE_SIZE = int(os.getenv("OUQ_CACHE_SIZE", "4096"))
CONSTRAINT_PENALTY = 1e6

# Column benchmark sentinel for loads at or beyond the Euler load
BUCKLING_FAILURE_VALUE = -1e12

CANONICAL_MODES = ("mixed", "all_canonical")
ESTIMATOR_METHODS = ("crude_mc", "line_sampling")


def validate_environment() -> list:
    """Validate the effective settings, returning a list of problems"""
    problems = []

    if POPULATION < 4:
        problems.append(f"OUQ_POPULATION must be >= 4, got {POPULATION}")
    if ITERATIONS < 1:
        problems.append(f"OUQ_ITERATIONS must be >= 1, got {ITERATIONS}")
    if LINES < 1 or SAMPLES < 1:
        problems.append("OUQ_LINES and OUQ_SAMPLES must be >= 1")
    if CERTIFICATE_SAMPLE_FACTOR < 1:
        problems.append(f"OUQ_CERTIFICATE_FACTOR must be >= 1, got {CERTIFICATE_SAMPLE_FACTOR}")
    if WORKERS < 1:
        problems.append(f"OUQ_WORKERS must be >= 1, got {WORKERS}")
    if ENUMERATION_CAP < 1:
        problems.append(f"OUQ_ENUMERATION_CAP must be >= 1, got {ENUMERATION_CAP}")
    if CANONICAL_MODE not in CANONICAL_MODES:
        problems.append(f"OUQ_CANONICAL_MODE must be one of {CANONICAL_MODES}, got {CANONICAL_MODE!r}")
    if ESTIMATOR_METHOD not in ESTIMATOR_METHODS:
        problems.append(f"OUQ_METHOD must be one of {ESTIMATOR_METHODS}, got {ESTIMATOR_METHOD!r}")

    return problems
