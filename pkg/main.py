"""
Command-line entry point of the OUQ-RBDO toolkit

    python main.py --list
    python main.py --scenario toy_mean_constrained --mode bounds
    python main.py --scenario ouq_g --mode rbdo --reps 4 --out result.json
    python main.py --scenario scenarios/toy_mean_constrained.json --mode check
    python main.py --scenario ouq_e_range_100_500 --export scenarios/ouq_e.json

Settings are resolved as built-in default < environment (.env) < scenario `settings`
block < command-line flags. The result document is JSON with top-level keys
meta, config, results and spread; only meta.runtime changes between identical runs.
Exit codes: 0 success, 1 error or invalid input, 2 infeasible design problem.
"""

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import config
from src.models import DesignProblem, Scenario, load_scenario, save_scenario, validate, validate_design
from src.models.design import INFEASIBLE
from src.services import catalog
from src.services.canonical import MIXED
from src.services.optimizer import BISECTION, OptimizerConfig, SELF_ADAPTIVE_DE, STRATEGIES
from src.services.ouq import bound_interval
from src.services.rbdo import InnerConfigs, resolve_coupling, solve
from src.services.sampling import EstimatorConfig
from src.utils import OUQError, ValidationError, derive_seed, get_logger, to_jsonable
from src.utils.performance import get_memory_usage, performance_tracker

logger = get_logger("CLI")

BOUNDS = "bounds"
RBDO = "rbdo"
CHECK = "check"
MODES = (BOUNDS, RBDO, CHECK)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2

# Keys accepted in a scenario `settings` block and echoed in the result config
SETTING_KEYS = (
    "seed", "repetitions", "method", "samples", "lines", "population", "iterations",
    "outer_strategy", "outer_population", "outer_iterations", "canonical_mode", "workers",
)


@dataclass(frozen=True)
class RunManifest:
    """Everything a run depends on; two equal manifests produce the same result document"""
    scenario: Scenario
    mode: str = BOUNDS
    seed: int = config.SEED
    repetitions: int = config.REPETITIONS
    estimator: EstimatorConfig = field(default_factory=EstimatorConfig)
    optimizer: OptimizerConfig = field(default_factory=OptimizerConfig)
    outer: OptimizerConfig = field(default_factory=lambda: OptimizerConfig(strategy=BISECTION))
    canonical_mode: str = MIXED
    theta: Optional[Tuple[float, ...]] = None
    output: Optional[str] = None
    workers: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise OUQError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.repetitions < 1:
            raise OUQError(f"repetitions must be >= 1, got {self.repetitions}")
        if self.canonical_mode not in config.CANONICAL_MODES:
            raise OUQError(f"canonical mode must be one of {config.CANONICAL_MODES}")
        if self.output:
            parent = Path(self.output).resolve().parent
            if not parent.is_dir():
                raise OUQError(f"output directory {parent} does not exist", context={"output": self.output})
            if not os.access(parent, os.W_OK):
                raise OUQError(f"output directory {parent} is not writable", context={"output": self.output})

    def echo(self) -> Dict[str, Any]:
        """Effective configuration written into the result document"""
        return {
            "scenario": self.scenario.name,
            "mode": self.mode,
            "seed": self.seed,
            "repetitions": self.repetitions,
            "method": self.estimator.method,
            "samples": self.estimator.n_samples,
            "lines": self.estimator.n_lines,
            "population": self.optimizer.population,
            "iterations": self.optimizer.max_iterations,
            "outer_strategy": self.outer.strategy,
            "outer_population": self.outer.population,
            "outer_iterations": self.outer.max_iterations,
            "canonical_mode": self.canonical_mode,
            "enumeration_cap": config.ENUMERATION_CAP,
            "theta": list(self.theta) if self.theta is not None else None,
        }


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ouqrbdo",
        description="Sharpest bounds under polymorphic uncertainty and reliability-based design optimization",
    )
    parser.add_argument("--scenario", help="built-in scenario name or path to a scenario file")
    parser.add_argument("--mode", choices=MODES, default=BOUNDS)
    parser.add_argument("--seed", type=int, help="master seed (unsigned 64-bit)")
    parser.add_argument("--reps", type=int, help="number of repetitions with derived seeds")
    parser.add_argument("--samples", type=int, help="crude Monte Carlo sample count")
    parser.add_argument("--lines", type=int, help="line sampling line count")
    parser.add_argument("--pop", type=int, help="optimizer population size")
    parser.add_argument("--iters", type=int, help="optimizer generation budget")
    parser.add_argument("--method", choices=("crude_mc", "line_sampling"), help="failure probability estimator")
    parser.add_argument("--outer", choices=STRATEGIES, help="outer design search strategy")
    parser.add_argument("--workers", type=int, help="evaluation threads")
    parser.add_argument("--theta", help="comma-separated design vector for bounds mode on a design scenario")
    parser.add_argument("--out", help="result file path; stdout when omitted")
    parser.add_argument("--list", action="store_true", help="list built-in scenarios and exit")
    parser.add_argument("--export", metavar="PATH", help="write the scenario file of --scenario and exit")
    parser.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    return parser


def list_builtin() -> List[str]:
    """Sorted names of the built-in scenarios"""
    return catalog.list_builtin()


def resolve_scenario(name_or_path: str) -> Scenario:
    if name_or_path in catalog.BUILTIN:
        return catalog.get_builtin(name_or_path)
    return load_scenario(name_or_path)


def _parse_theta(text: Optional[str]) -> Optional[Tuple[float, ...]]:
    if not text:
        return None
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError:
        raise OUQError(f"--theta must be comma-separated numbers, got {text!r}")


def effective_settings(scenario: Scenario, args: argparse.Namespace) -> Dict[str, Any]:
    """Defaults and environment, then scenario settings, then flags"""
    settings: Dict[str, Any] = {
        "seed": config.SEED,
        "repetitions": config.REPETITIONS,
        "method": config.ESTIMATOR_METHOD,
        "samples": config.SAMPLES,
        "lines": config.LINES,
        "population": config.POPULATION,
        "iterations": config.ITERATIONS,
        "outer_strategy": SELF_ADAPTIVE_DE,
        "outer_population": None,
        "outer_iterations": None,
        "canonical_mode": config.CANONICAL_MODE,
        "workers": config.WORKERS,
    }
    unknown = sorted(set(scenario.settings_dict) - set(SETTING_KEYS))
    if unknown:
        raise OUQError(f"unknown scenario settings {unknown}", context={"known": SETTING_KEYS})
    settings.update(scenario.settings_dict)

    flags = {
        "seed": args.seed, "repetitions": args.reps, "method": args.method, "samples": args.samples,
        "lines": args.lines, "population": args.pop, "iterations": args.iters,
        "outer_strategy": args.outer, "workers": args.workers,
    }
    settings.update({key: value for key, value in flags.items() if value is not None})
    if settings["outer_population"] is None:
        settings["outer_population"] = settings["population"]
    if settings["outer_iterations"] is None:
        settings["outer_iterations"] = settings["iterations"]
    return settings


INTEGER_SETTINGS = (
    "seed", "repetitions", "samples", "lines", "population", "iterations",
    "outer_population", "outer_iterations", "workers",
)


def build_manifest(scenario: Scenario, args: argparse.Namespace) -> RunManifest:
    s = effective_settings(scenario, args)
    try:
        n = {key: int(s[key]) for key in INTEGER_SETTINGS}
    except (TypeError, ValueError):
        raise OUQError("numeric settings must be integers", context={key: s[key] for key in INTEGER_SETTINGS})
    outer_parallel = s["outer_strategy"] != BISECTION
    workers = n["workers"]

    # Threads go to one loop only
    inner = OptimizerConfig(population=n["population"], max_iterations=n["iterations"], seed=n["seed"],
                            workers=1 if args.mode == RBDO and outer_parallel else workers)
    outer = OptimizerConfig(population=n["outer_population"], max_iterations=n["outer_iterations"],
                            seed=n["seed"], strategy=s["outer_strategy"], workers=workers if outer_parallel else 1)
    estimator = EstimatorConfig(method=s["method"], n_samples=n["samples"], n_lines=n["lines"], seed=n["seed"])
    return RunManifest(
        scenario=scenario, mode=args.mode, seed=n["seed"], repetitions=n["repetitions"],
        estimator=estimator, optimizer=inner, outer=outer, canonical_mode=s["canonical_mode"],
        theta=_parse_theta(args.theta), output=args.out, workers=workers,
    )


def _summary(evaluation) -> Dict[str, Any]:
    return {
        "theta": evaluation.theta,
        "cost_value": evaluation.cost_value,
        "pof_upper": evaluation.pof_upper,
        "feasible": evaluation.feasible,
    }


def _run_bounds(manifest: RunManifest, seed: int) -> Dict[str, Any]:
    scenario = manifest.scenario
    problem = scenario.uq_problem
    if manifest.theta is not None:
        if not isinstance(scenario.problem, DesignProblem):
            raise OUQError("--theta needs a design scenario")
        problem = resolve_coupling(scenario.problem, manifest.theta)
    lower, upper = bound_interval(problem, manifest.optimizer.with_seed(seed), manifest.estimator.with_seed(seed),
                                  mode=manifest.canonical_mode)
    return {"seed": seed, "event": problem.event, "lower": lower, "upper": upper}


def _run_rbdo(manifest: RunManifest, seed: int) -> Dict[str, Any]:
    problem = manifest.scenario.problem
    if not isinstance(problem, DesignProblem):
        raise OUQError("rbdo mode needs a design scenario")
    inner = InnerConfigs(manifest.optimizer.with_seed(seed), manifest.estimator.with_seed(seed),
                         manifest.canonical_mode)
    result = solve(problem, manifest.outer.with_seed(seed), inner)
    return {
        "seed": seed,
        "status": result.status,
        "best": result.best,
        "evaluations": result.evaluations,
        "history": [_summary(e) for e in result.history],
    }


def _check(manifest: RunManifest) -> List[str]:
    problem = manifest.scenario.problem
    diagnostics = validate_design(problem) if isinstance(problem, DesignProblem) else validate(problem)
    return [str(d) for d in diagnostics]


def _range(values: Sequence[float]) -> float:
    return max(values) - min(values) if values else 0.0


def spread(mode: str, results: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    """Largest difference across repetitions of the reported quantities"""
    if mode == BOUNDS:
        return {
            "lower": _range([r["lower"].value for r in results]),
            "upper": _range([r["upper"].value for r in results]),
        }
    if mode == RBDO:
        best = [r["best"] for r in results if r["best"] is not None]
        if not best:
            return {}
        return {
            "theta": [_range([b.theta[i] for b in best]) for i in range(len(best[0].theta))],
            "cost_value": _range([b.cost_value for b in best]),
        }
    return {}


def render_result(manifest: RunManifest, results: Sequence[Dict[str, Any]], runtime: Dict[str, Any]) -> str:
    document = {
        "meta": {"scenario": manifest.scenario.name, "mode": manifest.mode, "runtime": runtime},
        "config": manifest.echo(),
        "results": list(results),
        "spread": spread(manifest.mode, results),
    }
    return json.dumps(to_jsonable(document), sort_keys=True, indent=2) + "\n"


def run(manifest: RunManifest) -> int:
    """
    Execute a manifest and write the result document

    Returns:
        Exit code: 0 success, 1 invalid input, 2 infeasible design problem
    """
    started = time.perf_counter()
    timestamp = datetime.now(timezone.utc).isoformat()
    exit_code = EXIT_OK

    if manifest.mode == CHECK:
        diagnostics = _check(manifest)
        for line in diagnostics:
            print(line, file=sys.stderr)
        results: List[Dict[str, Any]] = [{"valid": not diagnostics, "diagnostics": diagnostics}]
        exit_code = EXIT_ERROR if diagnostics else EXIT_OK
    else:
        results = []
        for rep in range(manifest.repetitions):
            seed = derive_seed(manifest.seed, rep)
            logger.info(f"Repetition {rep + 1}/{manifest.repetitions} of {manifest.scenario.name} (seed {seed})")
            if manifest.mode == BOUNDS:
                results.append(_run_bounds(manifest, seed))
            else:
                results.append(_run_rbdo(manifest, seed))
        if manifest.mode == RBDO and any(r["status"] == INFEASIBLE for r in results):
            exit_code = EXIT_INFEASIBLE

    runtime = {
        "timestamp": timestamp,
        "wall_clock_seconds": time.perf_counter() - started,
        "workers": manifest.workers,
        "peak_rss_mb": max(performance_tracker.peak_rss_mb, get_memory_usage()["rss_mb"]),
    }
    text = render_result(manifest, results, runtime)
    if manifest.output:
        Path(manifest.output).write_text(text, encoding="utf-8")
        logger.info(f"Result written to {manifest.output}")
    else:
        sys.stdout.write(text)
    return exit_code


def _report(e: OUQError) -> None:
    logger.error(f"{type(e).__name__}: {e.message}")
    if e.context:
        logger.error(f"Context: {e.context}")
    if isinstance(e, ValidationError):
        for diagnostic in e.diagnostics:
            print(str(diagnostic), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.log_level:
        logging.getLogger("ouqrbdo").setLevel(args.log_level)

    if args.list:
        for name in list_builtin():
            print(name)
        return EXIT_OK
    if not args.scenario:
        logger.error("--scenario is required unless --list is given")
        return EXIT_ERROR

    problems = config.validate_environment()
    if problems:
        for problem in problems:
            logger.error(problem)
        return EXIT_ERROR

    try:
        scenario = resolve_scenario(args.scenario)
        if args.export:
            save_scenario(args.export, scenario)
            return EXIT_OK
        manifest = build_manifest(scenario, args)
        return run(manifest)
    except OUQError as e:
        _report(e)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
