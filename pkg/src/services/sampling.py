"""
Probability integration over the aleatory quantities
Crude Monte Carlo and line sampling in standard normal space, with isoprobabilistic
transforms for the supported distribution families
"""

import math
from dataclasses import dataclass, replace
from typing import Callable, Mapping, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

import config
from src.models.results import ExpectationEstimate, ProbabilityEstimate
from src.models.uncertainty import DistributionSpec, UQProblem
from src.utils.error_handler import EstimatorError, ModelError
from src.utils.logger import get_logger

logger = get_logger("Sampling")

CRUDE_MC = "crude_mc"
LINE_SAMPLING = "line_sampling"

Response = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class EstimatorConfig:
    method: str = config.ESTIMATOR_METHOD
    n_samples: int = config.SAMPLES
    n_lines: int = config.LINES
    seed: int = config.SEED
    root_tolerance: float = config.ROOT_TOLERANCE

    def __post_init__(self):
        if self.method not in (CRUDE_MC, LINE_SAMPLING):
            raise ModelError(f"unknown estimator method {self.method!r}")
        if self.n_samples < 1 or self.n_lines < 1:
            raise ModelError("sample and line counts must be >= 1",
                             context={"n_samples": self.n_samples, "n_lines": self.n_lines})
        if not self.root_tolerance > 0.0:
            raise ModelError("root tolerance must be > 0")

    def with_seed(self, seed: int) -> "EstimatorConfig":
        return replace(self, seed=int(seed))

    def scaled(self, factor: int) -> "EstimatorConfig":
        """Same estimator with `factor` times the lines and samples"""
        return replace(self, n_samples=self.n_samples * int(factor), n_lines=self.n_lines * int(factor))


def lognormal_parameters(mean: float, sd: float) -> Tuple[float, float]:
    """Parameters (mu, sigma) of the underlying normal for a lognormal of given mean and sd"""
    sigma2 = math.log1p((sd / mean) ** 2)
    return math.log(mean) - 0.5 * sigma2, math.sqrt(sigma2)


def frozen_distribution(spec: DistributionSpec):
    """scipy.stats frozen distribution for a resolved spec"""
    v = spec.values()
    family = spec.family
    try:
        if family == "lognormal":
            mu, sigma = lognormal_parameters(v["mean"], v["sd"])
            return stats.lognorm(s=sigma, scale=math.exp(mu))
        if family == "gumbel":
            return stats.gumbel_r(loc=v["loc"], scale=v["scale"])
        if family == "beta":
            return stats.beta(v["alpha"], v["beta"], loc=v["low"], scale=v["high"] - v["low"])
        if family == "normal":
            return stats.norm(loc=v["mean"], scale=v["sd"])
        if family == "uniform":
            return stats.uniform(loc=v["low"], scale=v["high"] - v["low"])
    except (KeyError, ValueError) as e:
        raise ModelError(f"invalid {family} parameters: {e}", context={"parameters": v})
    raise ModelError(f"unknown distribution family {family!r}")


@dataclass(frozen=True)
class AleatoryBlock:
    """
    Aleatory part of the input vector z with its standard-normal transforms

    distributions may still hold imprecise parameters; resolve() substitutes the
    current epistemic values and returns a block ready for evaluation.
    """
    distributions: Tuple[DistributionSpec, ...]
    aleatory_indices: Tuple[int, ...]
    epistemic_indices: Tuple[int, ...]
    epistemic_names: Tuple[str, ...] = ()

    def __post_init__(self):
        frozen = ()
        if all(d.resolved for d in self.distributions):
            frozen = tuple(frozen_distribution(d) for d in self.distributions)
        object.__setattr__(self, "_frozen", frozen)

    @classmethod
    def from_problem(cls, problem: UQProblem) -> "AleatoryBlock":
        aleatory = tuple(i for i, q in enumerate(problem.quantities) if not q.epistemic)
        epistemic = tuple(i for i, q in enumerate(problem.quantities) if q.epistemic)
        return cls(
            distributions=tuple(problem.quantities[i].distribution for i in aleatory),
            aleatory_indices=aleatory,
            epistemic_indices=epistemic,
            epistemic_names=tuple(problem.quantities[i].name for i in epistemic),
        )

    @classmethod
    def standard_normal(cls, dimension: int) -> "AleatoryBlock":
        """Block of independent standard normals with no epistemic part"""
        spec = DistributionSpec.of("normal", mean=0.0, sd=1.0)
        return cls((spec,) * dimension, tuple(range(dimension)), ())

    @property
    def dimension(self) -> int:
        return len(self.aleatory_indices)

    @property
    def resolved(self) -> bool:
        return len(self._frozen) == len(self.distributions)

    def resolve(self, epistemic_values: Sequence[float]) -> "AleatoryBlock":
        if self.resolved:
            return self
        values = dict(zip(self.epistemic_names, (float(v) for v in epistemic_values)))
        return replace(self, distributions=tuple(d.resolve(values) for d in self.distributions))

    def frozen(self):
        if not self.resolved:
            raise ModelError("aleatory block has unresolved imprecise parameters")
        return self._frozen

    def assemble(self, epistemic_values: Sequence[float], aleatory_values: np.ndarray) -> np.ndarray:
        """Full input rows z from fixed epistemic values and sampled aleatory values"""
        aleatory_values = np.atleast_2d(np.asarray(aleatory_values, dtype=float))
        rows = aleatory_values.shape[0]
        z = np.empty((rows, len(self.aleatory_indices) + len(self.epistemic_indices)))
        if self.epistemic_indices:
            z[:, list(self.epistemic_indices)] = np.asarray(epistemic_values, dtype=float)
        if self.aleatory_indices:
            z[:, list(self.aleatory_indices)] = aleatory_values
        return z


def to_standard_normal(block: AleatoryBlock, physical) -> np.ndarray:
    """
    Map physical aleatory values to standard normal space coordinate by coordinate

    Args:
        block: Resolved aleatory block
        physical: Array of shape (d,) or (N, d)

    Returns:
        Array of the same shape in standard normal space
    """
    x = np.asarray(physical, dtype=float)
    flat = np.atleast_2d(x)
    u = np.empty_like(flat)
    for j, dist in enumerate(block.frozen()):
        column = flat[:, j]
        low, high = dist.support()
        if np.any(column < low) or np.any(column > high) or np.any(~np.isfinite(column)):
            raise EstimatorError("value outside distribution support", sample=column.tolist(),
                                 context={"coordinate": j, "support": (float(low), float(high))})
        cdf = dist.cdf(column)
        # upper tail through sf keeps precision beyond the median
        u[:, j] = np.where(cdf < 0.5, stats.norm.ppf(cdf), stats.norm.isf(dist.sf(column)))
    return u.reshape(x.shape)


def from_standard_normal(block: AleatoryBlock, u) -> np.ndarray:
    """Inverse of to_standard_normal"""
    u = np.asarray(u, dtype=float)
    flat = np.atleast_2d(u)
    x = np.empty_like(flat)
    for j, dist in enumerate(block.frozen()):
        column = flat[:, j]
        x[:, j] = np.where(column < 0.0, dist.ppf(stats.norm.cdf(column)), dist.isf(stats.norm.sf(column)))
    return x.reshape(u.shape)


def _evaluate(g: Response, epistemic_values, block: AleatoryBlock, u: np.ndarray) -> np.ndarray:
    z = block.assemble(epistemic_values, from_standard_normal(block, u))
    values = np.asarray(g(z), dtype=float)
    bad = np.isnan(values)
    if bad.any():
        raise EstimatorError("response returned NaN", sample=z[np.argmax(bad)].tolist())
    return values


def _chunks(total: int):
    start = 0
    while start < total:
        size = min(config.SAMPLE_CHUNK, total - start)
        yield size
        start += size


def _crude_monte_carlo(g: Response, epistemic_values, block: AleatoryBlock, cfg: EstimatorConfig) -> ProbabilityEstimate:
    n = cfg.n_samples
    streams = np.random.SeedSequence(cfg.seed).spawn(math.ceil(n / config.SAMPLE_CHUNK))
    failures = 0
    for stream, size in zip(streams, _chunks(n)):
        u = np.random.default_rng(stream).standard_normal((size, block.dimension))
        failures += int(np.count_nonzero(_evaluate(g, epistemic_values, block, u) <= 0.0))
    p = failures / n
    return ProbabilityEstimate(p=p, std_error=math.sqrt(p * (1.0 - p) / n), n_evaluations=n)


def _important_direction(g: Response, epistemic_values, block: AleatoryBlock) -> np.ndarray:
    """Unit vector along the negative gradient of g at the standard-normal origin"""
    d = block.dimension
    step = 1e-3
    probes = np.vstack([np.eye(d) * step, -np.eye(d) * step])
    values = _evaluate(g, epistemic_values, block, probes)
    gradient = (values[:d] - values[d:]) / (2.0 * step)
    norm = np.linalg.norm(gradient)
    if not np.isfinite(norm) or norm == 0.0:
        direction = np.zeros(d)
        direction[0] = 1.0
        return direction
    return -gradient / norm


def _scan_lines(g: Response, epistemic_values, block: AleatoryBlock, direction: np.ndarray,
                samples: np.ndarray, tolerance: float):
    """
    Per-line failure probabilities along the direction

    Returns:
        (probabilities, roots, evaluations, lines_without_root, perpendicular components)
    """
    n, d = samples.shape
    perp = samples - np.outer(samples @ direction, direction)
    grid = np.arange(-config.LINE_SCAN_LIMIT, config.LINE_SCAN_LIMIT + 0.5 * config.LINE_SCAN_STEP,
                     config.LINE_SCAN_STEP)
    m = len(grid)
    points = perp[:, None, :] + grid[None, :, None] * direction[None, None, :]
    failing = _evaluate(g, epistemic_values, block, points.reshape(-1, d)).reshape(n, m) <= 0.0
    evaluations = n * m

    probabilities = np.zeros(n)
    roots = np.full(n, np.nan)
    all_fail = failing.all(axis=1)
    no_fail = ~failing.any(axis=1)
    probabilities[all_fail] = 1.0
    mixed = np.flatnonzero(~(all_fail | no_fail))
    upper = failing[:, -1]

    if mixed.size:
        rows = failing[mixed]
        up = upper[mixed]
        # bracket next to the failure end of the line
        last_safe = m - 1 - np.argmax(~rows[:, ::-1], axis=1)
        last_fail = m - 1 - np.argmax(rows[:, ::-1], axis=1)
        k = np.where(up, last_safe, last_fail)
        low = grid[k]
        high = grid[np.minimum(k + 1, m - 1)]
        low_fails = ~up
        base = perp[mixed]
        while np.max(high - low) > tolerance:
            mid = 0.5 * (low + high)
            mid_fails = _evaluate(g, epistemic_values, block, base + mid[:, None] * direction[None, :]) <= 0.0
            evaluations += mid.size
            same = mid_fails == low_fails
            low = np.where(same, mid, low)
            high = np.where(same, high, mid)
        root = 0.5 * (low + high)
        roots[mixed] = root
        probabilities[mixed] = np.where(up, stats.norm.sf(root), stats.norm.cdf(root))

    without_root = int(np.count_nonzero(all_fail | no_fail))
    return probabilities, roots, evaluations, without_root, perp


def _line_sampling(g: Response, epistemic_values, block: AleatoryBlock, cfg: EstimatorConfig) -> ProbabilityEstimate:
    direction = _important_direction(g, epistemic_values, block)
    evaluations = 2 * block.dimension
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.n_lines)
    samples = np.vstack([np.random.default_rng(s).standard_normal(block.dimension) for s in streams])

    probabilities, roots, count, without_root, perp = _scan_lines(
        g, epistemic_values, block, direction, samples, cfg.root_tolerance)
    evaluations += count

    refreshed = False
    head = roots[:config.DIRECTION_CHECK_LINES]
    head_ok = np.isfinite(head)
    if np.count_nonzero(head_ok) >= 2:
        betas = head[head_ok]
        spread = (betas.max() - betas.min()) / max(abs(float(np.mean(betas))), 1e-12)
        if spread > config.DIRECTION_SPREAD_LIMIT:
            design_points = perp[:config.DIRECTION_CHECK_LINES][head_ok] + betas[:, None] * direction[None, :]
            candidate = design_points.mean(axis=0)
            norm = np.linalg.norm(candidate)
            if norm > 0.0:
                refreshed = True
                direction = candidate / norm
                logger.debug(f"Refreshed line direction (beta spread {spread:.1%})")
                probabilities, roots, count, without_root, _ = _scan_lines(
                    g, epistemic_values, block, direction, samples, cfg.root_tolerance)
                evaluations += count

    if without_root:
        logger.debug(f"{without_root} of {cfg.n_lines} lines without a sign change")
    n = len(probabilities)
    std_error = float(np.std(probabilities, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return ProbabilityEstimate(
        p=float(np.mean(probabilities)),
        std_error=std_error,
        lines_without_root=without_root,
        direction_refreshed=refreshed,
        n_evaluations=evaluations,
    )


def chi_failure(g: Response, epistemic_values: Sequence[float], block: AleatoryBlock,
                cfg: Optional[EstimatorConfig] = None) -> ProbabilityEstimate:
    """
    Probability of g <= 0 over the aleatory quantities at fixed epistemic values

    Lines without a sign change within the scan limit contribute 1 if the whole line
    fails and 0 otherwise, and are counted in lines_without_root.
    """
    cfg = cfg or EstimatorConfig()
    block = block.resolve(epistemic_values)
    if block.dimension == 0:
        value = _evaluate(g, epistemic_values, block, np.empty((1, 0)))[0]
        return ProbabilityEstimate(p=float(value <= 0.0), std_error=0.0, n_evaluations=1)
    if cfg.method == CRUDE_MC:
        return _crude_monte_carlo(g, epistemic_values, block, cfg)
    return _line_sampling(g, epistemic_values, block, cfg)


def chi_expectation(M: Response, epistemic_values: Sequence[float], block: AleatoryBlock,
                    cfg: Optional[EstimatorConfig] = None) -> ExpectationEstimate:
    """Monte Carlo mean of M over the aleatory quantities at fixed epistemic values"""
    cfg = cfg or EstimatorConfig()
    block = block.resolve(epistemic_values)

    def values_of(u: np.ndarray) -> np.ndarray:
        z = block.assemble(epistemic_values, from_standard_normal(block, u))
        values = np.asarray(M(z), dtype=float)
        bad = ~np.isfinite(values)
        if bad.any():
            raise EstimatorError("model response is not finite", sample=z[np.argmax(bad)].tolist(),
                                 context={"value": float(values[np.argmax(bad)])})
        return values

    if block.dimension == 0:
        return ExpectationEstimate(mean=float(values_of(np.empty((1, 0)))[0]), std_error=0.0, n_evaluations=1)

    n = cfg.n_samples
    streams = np.random.SeedSequence(cfg.seed).spawn(math.ceil(n / config.SAMPLE_CHUNK))
    count, mean, m2 = 0, 0.0, 0.0
    for stream, size in zip(streams, _chunks(n)):
        values = values_of(np.random.default_rng(stream).standard_normal((size, block.dimension)))
        chunk_mean = float(np.mean(values))
        chunk_m2 = float(np.sum((values - chunk_mean) ** 2))
        total = count + size
        delta = chunk_mean - mean
        mean += delta * size / total
        m2 += chunk_m2 + delta ** 2 * count * size / total
        count = total
    std_error = math.sqrt(m2 / (count - 1) / count) if count > 1 else 0.0
    return ExpectationEstimate(mean=mean, std_error=std_error, n_evaluations=count)
