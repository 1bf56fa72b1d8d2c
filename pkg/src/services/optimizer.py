"""
Box-constrained global optimizer for the inner bound searches and the outer design loop
Self-adaptive differential evolution with competing strategies, success-history
parameter memories and linear population reduction; plus a projected finite-difference
descent and a bisection for monotone scalar problems
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

import config
from src.models.results import GenerationRecord
from src.utils.error_handler import OptimizerError
from src.utils.helpers import derive_seed
from src.utils.logger import get_logger

logger = get_logger("Optimizer")

SELF_ADAPTIVE_DE = "self_adaptive_de"
GRADIENT_DESCENT = "gradient_descent"
BISECTION = "bisection"
STRATEGIES = (SELF_ADAPTIVE_DE, GRADIENT_DESCENT, BISECTION)

RAND_1_BIN = "rand/1/bin"
BEST_1_BIN = "best/1/bin"
PBEST_1_BIN = "current-to-pbest/1/bin"
RAND_1_EXP = "rand/1/exp"
MUTATIONS = (RAND_1_BIN, BEST_1_BIN, PBEST_1_BIN, RAND_1_EXP)

PARAMETER_SPREAD = 0.1
PROBABILITY_FLOOR = 0.05

Callback = Callable[[int, np.ndarray, np.ndarray], None]


@dataclass(frozen=True)
class OptimizerConfig:
    population: int = config.POPULATION
    max_iterations: int = config.ITERATIONS
    seed: int = config.SEED
    bounds: Tuple[Tuple[float, float], ...] = ()
    strategy: str = SELF_ADAPTIVE_DE
    workers: int = 1
    tolerance: float = config.BISECTION_TOLERANCE

    def __post_init__(self):
        if self.population < 4:
            raise OptimizerError(f"population must be >= 4, got {self.population}")
        if self.max_iterations < 1:
            raise OptimizerError(f"max_iterations must be >= 1, got {self.max_iterations}")
        if self.strategy not in STRATEGIES:
            raise OptimizerError(f"unknown strategy {self.strategy!r}")
        if self.workers < 1:
            raise OptimizerError(f"workers must be >= 1, got {self.workers}")
        for low, high in self.bounds:
            if not (math.isfinite(low) and math.isfinite(high) and low < high):
                raise OptimizerError(f"invalid bound [{low}, {high}]", context={"bounds": self.bounds})

    def with_bounds(self, bounds: Sequence[Tuple[float, float]]) -> "OptimizerConfig":
        return replace(self, bounds=tuple((float(lo), float(hi)) for lo, hi in bounds))

    def with_seed(self, seed: int) -> "OptimizerConfig":
        return replace(self, seed=int(seed))


@dataclass(frozen=True)
class OptimizationResult:
    best_x: Tuple[float, ...]
    best_f: float
    best_seed: Optional[int]
    trace: Tuple[GenerationRecord, ...]
    evaluations: int


class _Evaluator:
    """Evaluates batches in member order and tracks the best point seen"""

    def __init__(self, objective: Callable, cfg: OptimizerConfig, seeded: bool,
                 callback: Optional[Callback], executor: Optional[ThreadPoolExecutor]):
        self.objective = objective
        self.cfg = cfg
        self.seeded = seeded
        self.callback = callback
        self.executor = executor
        self.evaluations = 0
        self.best_f = math.inf
        self.best_x: Optional[np.ndarray] = None
        self.best_seed: Optional[int] = None

    def _one(self, x: np.ndarray, seed: Optional[int]) -> float:
        value = self.objective(x, seed) if self.seeded else self.objective(x)
        value = float(value)
        return value if math.isfinite(value) else math.inf

    def __call__(self, points: np.ndarray, generation: int) -> np.ndarray:
        seeds: List[Optional[int]] = [
            derive_seed(self.cfg.seed, generation, i) if self.seeded else None for i in range(len(points))
        ]
        rows = [np.array(p) for p in points]
        if self.executor is not None and len(rows) > 1:
            values = np.array(list(self.executor.map(self._one, rows, seeds)))
        else:
            values = np.array([self._one(x, s) for x, s in zip(rows, seeds)])
        self.evaluations += len(rows)

        for x, value, seed in zip(rows, values, seeds):
            if value < self.best_f or self.best_x is None:
                self.best_f, self.best_x, self.best_seed = float(value), x.copy(), seed
        if self.callback is not None:
            self.callback(generation, np.array(rows), values.copy())
        return values


def _reflect(trials: np.ndarray, low: np.ndarray, high: np.ndarray) -> np.ndarray:
    trials = np.where(trials < low, 2.0 * low - trials, trials)
    trials = np.where(trials > high, 2.0 * high - trials, trials)
    return np.clip(trials, low, high)


def _sample_f(rng: np.random.Generator, centers: np.ndarray) -> np.ndarray:
    """Cauchy draws around the memory, regenerated while non-positive and truncated at 1"""
    f = centers + PARAMETER_SPREAD * rng.standard_cauchy(len(centers))
    bad = f <= 0.0
    while bad.any():
        f[bad] = centers[bad] + PARAMETER_SPREAD * rng.standard_cauchy(int(bad.sum()))
        bad = f <= 0.0
    return np.minimum(f, 1.0)


def _pick(rng: np.random.Generator, n: int, count: int, exclude: Sequence[int]) -> np.ndarray:
    candidates = np.setdiff1d(np.arange(n), np.asarray(exclude))
    return rng.choice(candidates, size=count, replace=False)


def _trial(i: int, mutation: str, f: float, cr: float, pop: np.ndarray, archive: np.ndarray,
           pbest: np.ndarray, best: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n, dim = pop.shape
    x = pop[i]
    if mutation == BEST_1_BIN:
        r1, r2 = _pick(rng, n, 2, [i])
        mutant = best + f * (pop[r1] - pop[r2])
    elif mutation == PBEST_1_BIN:
        chosen = pop[rng.choice(pbest)]
        r1 = _pick(rng, n, 1, [i])[0]
        union = np.vstack([pop, archive]) if len(archive) else pop
        r2 = _pick(rng, len(union), 1, [i, r1])[0]
        mutant = x + f * (chosen - x) + f * (pop[r1] - union[r2])
    else:
        r1, r2, r3 = _pick(rng, n, 3, [i])
        mutant = pop[r1] + f * (pop[r2] - pop[r3])

    trial = x.copy()
    if mutation == RAND_1_EXP:
        start = int(rng.integers(dim))
        length = 1
        while length < dim and rng.random() < cr:
            length += 1
        idx = (start + np.arange(length)) % dim
        trial[idx] = mutant[idx]
    else:
        mask = rng.random(dim) < cr
        mask[rng.integers(dim)] = True
        trial[mask] = mutant[mask]
    return trial


def _improvement_weights(delta: np.ndarray) -> np.ndarray:
    infinite = ~np.isfinite(delta)
    if infinite.any():
        return infinite / infinite.sum()
    return delta / delta.sum()


def _self_adaptive_de(evaluate: _Evaluator, cfg: OptimizerConfig, rng: np.random.Generator) -> List[GenerationRecord]:
    low = np.array([b[0] for b in cfg.bounds])
    high = np.array([b[1] for b in cfg.bounds])
    dim = len(low)
    n_init = cfg.population
    n_min = min(config.MIN_POPULATION, n_init)
    k_count = len(MUTATIONS)
    h = config.MEMORY_SIZE

    pop = low + rng.random((n_init, dim)) * (high - low)
    fit = evaluate(pop, 0)
    memory_f = np.full((k_count, h), 0.5)
    memory_cr = np.full((k_count, h), 0.5)
    slot = np.zeros(k_count, dtype=int)
    successes = np.zeros(k_count)
    archive = np.empty((0, dim))

    def probabilities() -> np.ndarray:
        weights = successes + config.STRATEGY_PRIOR
        return weights / weights.sum()

    def record(generation: int) -> GenerationRecord:
        return GenerationRecord(
            generation=generation,
            best_f=evaluate.best_f,
            population=len(pop),
            evaluations=evaluate.evaluations,
            strategy_probabilities=tuple(float(q) for q in probabilities()),
            memory_f=(float(memory_f.min()), float(memory_f.max())),
            memory_cr=(float(memory_cr.min()), float(memory_cr.max())),
        )

    trace = [record(0)]
    for generation in range(1, cfg.max_iterations + 1):
        n = len(pop)
        q = probabilities()
        strategies = rng.choice(k_count, size=n, p=q)
        slots = rng.integers(h, size=n)
        f = _sample_f(rng, memory_f[strategies, slots])
        cr = np.clip(rng.normal(memory_cr[strategies, slots], PARAMETER_SPREAD), 0.0, 1.0)

        order = np.argsort(fit, kind="stable")
        pbest = order[:max(2, int(round(config.PBEST_RATE * n)))]
        best = pop[order[0]]
        trials = np.array([
            _trial(i, MUTATIONS[strategies[i]], f[i], cr[i], pop, archive, pbest, best, rng)
            for i in range(n)
        ])
        trials = _reflect(trials, low, high)
        trial_fit = evaluate(trials, generation)

        improved = trial_fit < fit
        for k in range(k_count):
            mask = improved & (strategies == k)
            if not mask.any():
                continue
            weights = _improvement_weights(fit[mask] - trial_fit[mask])
            memory_f[k, slot[k]] = np.sum(weights * f[mask] ** 2) / np.sum(weights * f[mask])
            memory_cr[k, slot[k]] = np.sum(weights * cr[mask])
            slot[k] = (slot[k] + 1) % h
            successes[k] += mask.sum()
        if probabilities().min() < PROBABILITY_FLOOR:
            successes[:] = 0.0

        if improved.any():
            archive = np.vstack([archive, pop[improved]])
        replace_mask = trial_fit <= fit
        pop[replace_mask] = trials[replace_mask]
        fit[replace_mask] = trial_fit[replace_mask]

        target = int(round(n_init + (n_min - n_init) * generation / cfg.max_iterations))
        if target < len(pop):
            keep = np.argsort(fit, kind="stable")[:target]
            pop, fit = pop[keep], fit[keep]
        cap = int(round(config.ARCHIVE_RATE * len(pop)))
        if len(archive) > cap:
            archive = archive[rng.choice(len(archive), size=cap, replace=False)]

        trace.append(record(generation))
        logger.debug(f"Generation {generation}: best {evaluate.best_f:.6g}, population {len(pop)}")
    return trace


def _gradient_descent(evaluate: _Evaluator, cfg: OptimizerConfig, rng: np.random.Generator) -> List[GenerationRecord]:
    """Projected descent in box-normalized coordinates with forward differences and step adaptation"""
    low = np.array([b[0] for b in cfg.bounds])
    high = np.array([b[1] for b in cfg.bounds])
    width = high - low
    dim = len(low)

    s = np.full(dim, 0.5)
    current = evaluate((low + s * width)[None, :], 0)[0]
    step = 0.25
    batch = 1
    trace = [GenerationRecord(0, evaluate.best_f, 1, evaluate.evaluations)]
    for iteration in range(1, cfg.max_iterations + 1):
        h = np.where(s + config.GRADIENT_STEP <= 1.0, config.GRADIENT_STEP, -config.GRADIENT_STEP)
        probes = s[None, :] + np.diag(h)
        values = evaluate(low + probes * width, batch)
        batch += 1
        gradient = (values - current) / h
        norm = np.linalg.norm(gradient)
        if not np.isfinite(norm) or norm == 0.0 or step < 1e-10:
            break
        candidate = np.clip(s - step * gradient / norm, 0.0, 1.0)
        value = evaluate((low + candidate * width)[None, :], batch)[0]
        batch += 1
        if value < current:
            s, current = candidate, value
            step = min(2.0 * step, 0.5)
        else:
            step *= 0.5
        trace.append(GenerationRecord(iteration, evaluate.best_f, 1, evaluate.evaluations))
    return trace


def minimize(objective: Callable, cfg: OptimizerConfig, *, seeded: bool = False,
             callback: Optional[Callback] = None) -> OptimizationResult:
    """
    Minimize an objective over the configured box

    Args:
        objective: f(x) or, when seeded, f(x, seed); non-finite values count as +inf
        cfg: Optimizer configuration with bounds
        seeded: Pass each evaluation a seed derived from (cfg.seed, generation, member)
        callback: Called after every batch with (generation, points, values) in member order

    Returns:
        Best point, its value re-evaluated with its seed, and the per-generation trace
    """
    if not cfg.bounds:
        raise OptimizerError("optimizer needs at least one bounded coordinate")
    if cfg.strategy == BISECTION:
        raise OptimizerError("bisection runs through minimize_scalar_monotone")

    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    executor = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        evaluate = _Evaluator(objective, cfg, seeded, callback, executor)
        if cfg.strategy == GRADIENT_DESCENT:
            trace = _gradient_descent(evaluate, cfg, rng)
        else:
            trace = _self_adaptive_de(evaluate, cfg, rng)
    finally:
        if executor is not None:
            executor.shutdown(wait=True)

    best_x = evaluate.best_x
    best_f = evaluate._one(best_x, evaluate.best_seed)
    return OptimizationResult(
        best_x=tuple(float(v) for v in best_x),
        best_f=best_f,
        best_seed=evaluate.best_seed,
        trace=tuple(trace),
        evaluations=evaluate.evaluations + 1,
    )


def minimize_scalar_monotone(threshold_fn: Callable[[float], float], target: float,
                             bracket: Tuple[float, float], tol: float = config.BISECTION_TOLERANCE) -> float:
    """
    Smallest x with threshold_fn(x) <= target for a decreasing function, within tol

    The returned point is always on the feasible side of the boundary.
    """
    low, high = float(bracket[0]), float(bracket[1])
    if not low < high or not tol > 0.0:
        raise OptimizerError("bisection needs low < high and tol > 0", context={"bracket": bracket, "tol": tol})
    f_low, f_high = threshold_fn(low), threshold_fn(high)
    if not (f_low > target >= f_high):
        raise OptimizerError("bracket does not straddle target",
                             context={"bracket": (low, high), "values": (f_low, f_high), "target": target})
    while high - low > tol:
        mid = 0.5 * (low + high)
        value = threshold_fn(mid)
        logger.info(f"Bisection at {mid:.6g}: {value:.6g} (target {target:.6g})")
        if value <= target:
            high = mid
        else:
            low = mid
    return high
