"""Seeded execution of replicas, parameter sweeps and controller comparisons."""

from __future__ import annotations

import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from ..control import ControllerKind, run_controlled_ga
from ..errors import ConfigurationError
from ..ga import GenerationRecord, compare_fitness, fitness_tolerance
from ..landscape import LandscapeKind
from .config import FIXED, ExperimentConfig

RNG_ALGORITHM = "PCG64"
SWEEP_AXES = ("p_m", "population_size", "sigma", "n")
_AXIS_ALIASES = {"m": "population_size"}


def replica_rng(master_seed: int, replica: int) -> np.random.Generator:
    """Independent stream for one replica, derived from (master seed, replica index)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(replica,))))


@dataclass(frozen=True)
class RunSummary:
    replica: int
    hit: bool
    first_hit_generation: int
    final_best_fitness: float
    total_evaluations: int
    final_p_m: float
    final_population_size: int
    terminated: str


class ReplicaResult(NamedTuple):
    replica: int
    records: list[GenerationRecord]
    summary: RunSummary


def summarize(replica: int, records: list[GenerationRecord], terminated: str, budget: int,
              target: float, rel_tol: float) -> RunSummary:
    """Collapse a record stream; evaluations count every member once per generation."""
    first_hit = next(
        (r.generation for r in records if compare_fitness(r.best_fitness, target, rel_tol) >= 0), None
    )
    last = records[-1]
    return RunSummary(
        replica=replica,
        hit=first_hit is not None,
        first_hit_generation=budget if first_hit is None else first_hit,
        final_best_fitness=last.best_fitness,
        total_evaluations=sum(r.population_size for r in records),
        final_p_m=last.p_m,
        final_population_size=last.population_size,
        terminated=terminated,
    )


def run_replica(config: ExperimentConfig, replica: int) -> ReplicaResult:
    landscape = config.landscape.build()
    run = run_controlled_ga(
        config.controller.build(),
        landscape,
        config.ga.build(),
        config.size_policy,
        config.budget,
        replica_rng(config.seed, replica),
        population_size=config.population_size,
        safety_factor=config.landscape.safety_factor,
        stop_on_optimum=config.stop_on_optimum,
        seed_master=config.seed_master,
    )
    summary = summarize(replica, run.records, run.terminated, config.budget,
                        landscape.max_fitness, fitness_tolerance(landscape))
    return ReplicaResult(replica, run.records, summary)


def _run_one(args):
    return run_replica(*args)


def run(config: ExperimentConfig, workers: int = 1, replicas: list[int] | None = None) -> list[ReplicaResult]:
    """Run every replica (or the listed ones), returned in replica-index order.

    Each replica owns its RNG stream, so results do not depend on
    ``workers`` or on the order replicas are executed.
    """
    if workers < 1:
        raise ConfigurationError(f"workers must be >= 1, got {workers}", "workers")
    indices = list(range(config.replicas)) if replicas is None else list(replicas)
    jobs = [(config, r) for r in indices]
    if workers == 1 or len(jobs) <= 1:
        results = [_run_one(job) for job in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    return sorted(results, key=lambda res: res.replica)


@dataclass(frozen=True)
class AggregateRow:
    label: str
    replicas: int
    hit_rate: float
    median_first_hit: float
    mean_evaluations: float
    mean_final_best: float


def aggregate(label: str, summaries: list[RunSummary]) -> AggregateRow:
    return AggregateRow(
        label=label,
        replicas=len(summaries),
        hit_rate=sum(s.hit for s in summaries) / len(summaries),
        median_first_hit=float(statistics.median(s.first_hit_generation for s in summaries)),
        mean_evaluations=statistics.fmean(s.total_evaluations for s in summaries),
        mean_final_best=statistics.fmean(s.final_best_fitness for s in summaries),
    )


def _with_axis(config: ExperimentConfig, axis: str, value) -> ExperimentConfig:
    if axis == "p_m":
        return replace(config, controller=replace(config.controller, p_m=float(value)))
    if axis == "population_size":
        return replace(config, population_size=int(value))
    if axis == "sigma":
        return replace(config, landscape=replace(config.landscape, sigma=float(value)))
    return replace(config, landscape=replace(config.landscape, n=int(value)))


def check_axis(config: ExperimentConfig, axis: str) -> str:
    axis = _AXIS_ALIASES.get(axis, axis)
    if axis not in SWEEP_AXES:
        raise ConfigurationError(f"unknown sweep axis {axis!r} (choose from {', '.join(SWEEP_AXES)})", "axis")
    if axis == "p_m" and config.controller.kind != FIXED:
        raise ConfigurationError("sweeping p_m requires the fixed controller", "axis")
    if axis == "population_size" and config.controller.kind == ControllerKind.ELITIST_WITH_SIZE.value:
        raise ConfigurationError("the size controller sets its own population size", "axis")
    if axis == "sigma" and config.landscape.kind != LandscapeKind.SHARP_PEAK.value:
        raise ConfigurationError("sigma is only defined for the sharp_peak landscape", "axis")
    if axis == "n" and config.landscape.kind == LandscapeKind.CUSTOM.value:
        raise ConfigurationError("custom landscapes have a fixed n", "axis")
    return axis


def sweep(config: ExperimentConfig, axis: str, values, workers: int = 1) -> list[AggregateRow]:
    """One aggregated row per axis value, each over ``config.replicas`` replicas."""
    values = list(values)
    if not values:
        raise ConfigurationError("sweep needs at least one value", "values")
    axis = check_axis(config, axis)
    rows = []
    for value in values:
        cfg = _with_axis(config, axis, value)
        rows.append(aggregate(f"{axis}={value!r}", [res.summary for res in run(cfg, workers)]))
    return rows


def compare(configs: list[ExperimentConfig], workers: int = 1) -> list[AggregateRow]:
    """Aggregate each config over identical seeds; landscapes, budgets and replica counts must agree."""
    if not configs:
        raise ConfigurationError("nothing to compare", "configs")
    ref = configs[0]
    for i, cfg in enumerate(configs[1:], start=1):
        if cfg.landscape != ref.landscape:
            raise ConfigurationError(f"config {i} uses a different landscape", "landscape")
        if cfg.budget != ref.budget:
            raise ConfigurationError(f"config {i} uses a different budget", "budget")
        if cfg.replicas != ref.replicas:
            raise ConfigurationError(f"config {i} uses a different replica count", "replicas")
    return [aggregate(cfg.controller.label, [res.summary for res in run(cfg, workers)]) for cfg in configs]
