"""Critical control of the mutation probability and population size.

The mutation probability is steered by bisection inside a bracket
``[alpha, beta]``. If the best fitness stays constant from one generation to
the next, mutation is judged too weak and raised (``alpha = p_m``). If it
drops, mutation is judged too strong and lowered (``beta = p_m``). A strict
improvement restarts the bracket. Three controllers are provided:

``BASIC``
    bracket control only.
``ELITIST``
    additionally puts the lost best individual back whenever the best
    fitness drops.
``ELITIST_WITH_SIZE``
    also starts from two individuals, collapses back to two copies of the
    new best on every improvement, and grows the population once the
    bracket has converged without progress.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError
from .ga import (
    GAParams,
    GenerationRecord,
    Individual,
    Population,
    best_individual,
    compare_fitness,
    fitness_tolerance,
    generation_step,
    init_population,
    make_record,
)
from .landscape import DEFAULT_SAFETY_FACTOR, FitnessLandscape, LandscapeKind, fitness_ratio_bound, master_genotype


@dataclass(frozen=True)
class DichotomyState:
    """Bisection bracket ``[alpha, beta]`` around the critical mutation rate.

    The bracket ends are stored as fractions ``lo``/``hi`` of ``beta_init``.
    Starting from 0 and 1 they stay dyadic, so every halving is exact in
    binary floating point: after ``k`` updates the width is exactly
    ``beta_init * 2**-k``.
    """

    beta_init: float
    lo: float = 0.0
    hi: float = 1.0

    @classmethod
    def from_bracket(cls, alpha: float, beta: float, beta_init: float) -> "DichotomyState":
        if not 0 <= alpha <= beta <= beta_init or not beta_init > 0:
            raise ConfigurationError(f"need 0 <= alpha <= beta <= beta_init, got {alpha}, {beta}, {beta_init}")
        return cls(beta_init, alpha / beta_init, beta / beta_init)

    @property
    def alpha(self) -> float:
        return self.beta_init * self.lo

    @property
    def beta(self) -> float:
        return self.beta_init * self.hi

    @property
    def p_m(self) -> float:
        return self.beta_init * ((self.lo + self.hi) / 2)

    @property
    def width(self) -> float:
        return self.beta_init * (self.hi - self.lo)


def dichotomy_init(c: float, n: int) -> DichotomyState:
    """Fresh bracket ``[0, ln(c)/n]`` with ``p_m`` at its midpoint."""
    if not c > 1:
        raise ConfigurationError(f"fitness ratio bound must be > 1, got {c}")
    if n < 1:
        raise ConfigurationError(f"genotype length must be >= 1, got {n}")
    return DichotomyState(beta_init=math.log(c) / n)


def dichotomy_increase(s: DichotomyState) -> DichotomyState:
    """Raise mutation: the lower end moves up to the current ``p_m``."""
    return replace(s, lo=(s.lo + s.hi) / 2)


def dichotomy_decrease(s: DichotomyState) -> DichotomyState:
    """Lower mutation: the upper end moves down to the current ``p_m``."""
    return replace(s, hi=(s.lo + s.hi) / 2)


class ControllerKind(str, enum.Enum):
    BASIC = "basic"
    ELITIST = "elitist"
    ELITIST_WITH_SIZE = "elitist_with_size"


@dataclass(frozen=True)
class FixedMutation:
    """Uncontrolled baseline: constant mutation probability, constant size."""

    p_m: float

    def __post_init__(self):
        if not 0.0 <= self.p_m <= 1.0:
            raise ConfigurationError(f"mutation probability must be in [0, 1], got {self.p_m}", "controller.p_m")


class ControlAction(str, enum.Enum):
    INCREASE_MUTATION = "IncreaseMutation"
    DECREASE_MUTATION = "DecreaseMutation"
    REINIT_MUTATION = "ReinitMutation"
    REINTRODUCE_ELITE = "ReintroduceElite"
    GROW_POPULATION = "GrowPopulation"
    RESET_POPULATION_TO_TWO = "ResetPopulationToTwo"


def format_actions(actions) -> str:
    return "+".join(a.value for a in actions)


def parse_actions(text: str) -> list[ControlAction]:
    return [ControlAction(tok) for tok in text.split("+")] if text else []


@dataclass(frozen=True)
class SizePolicy:
    """Growth rule for the size controller.

    ``convergence_threshold`` of None means ``beta_init / 64``.
    """

    growth_factor: float = 2.0
    max_size: int = 4096
    convergence_threshold: float | None = None

    def __post_init__(self):
        if not self.growth_factor > 1:
            raise ConfigurationError(
                f"growth factor must be > 1, got {self.growth_factor}", "size_policy.growth_factor"
            )
        if self.max_size < 2:
            raise ConfigurationError(f"max size must be >= 2, got {self.max_size}", "size_policy.max_size")
        if self.convergence_threshold is not None and not self.convergence_threshold > 0:
            raise ConfigurationError(
                f"convergence threshold must be > 0, got {self.convergence_threshold}",
                "size_policy.convergence_threshold",
            )

    def threshold(self, s: DichotomyState) -> float:
        if self.convergence_threshold is None:
            return s.beta_init / 64
        return self.convergence_threshold

    def grown_size(self, m: int) -> int:
        return min(self.max_size, max(m + 1, int(m * self.growth_factor)))


def has_converged(s: DichotomyState, policy: SizePolicy) -> bool:
    return s.width < policy.threshold(s)


class ControlOutcome(NamedTuple):
    state: DichotomyState
    population: Population
    actions: list[ControlAction]
    best: Individual


def _reintroduce(pop: Population, elite: Individual) -> Population:
    worst = int(np.argmin(pop.fitness))
    genomes = pop.genomes.copy()
    fitness = pop.fitness.copy()
    genomes[worst] = elite.genotype
    fitness[worst] = elite.fitness
    return Population(genomes, fitness)


def _grow(pop: Population, policy: SizePolicy, rng: np.random.Generator, landscape: FitnessLandscape) -> Population:
    extra = policy.grown_size(pop.size) - pop.size
    if extra <= 0:
        return pop
    fresh = rng.integers(0, 2, size=(extra, pop.n), dtype=np.uint8)
    return Population(
        np.concatenate([pop.genomes, fresh]),
        np.concatenate([pop.fitness, landscape.evaluate_many(fresh)]),
    )


def controller_step(
    kind: ControllerKind,
    prev_best: Individual,
    new_best: Individual,
    state: DichotomyState,
    pop: Population,
    policy: SizePolicy,
    *,
    c: float,
    n: int,
    landscape: FitnessLandscape | None = None,
    rng: np.random.Generator | None = None,
    rel_tol: float = 0.0,
) -> ControlOutcome:
    """Apply one controller decision after a generation.

    ``prev_best`` is the best individual before the generation, ``new_best``
    the best one found after it. The returned ``best`` is the individual the
    next generation should compare against; elitist kinds return
    ``prev_best`` when the best fitness dropped.

    ``landscape`` and ``rng`` are only used when the size controller grows
    the population.
    """
    try:
        kind = ControllerKind(kind)
    except ValueError:
        raise ConfigurationError(f"unknown controller kind {kind!r}", "controller.kind") from None

    order = compare_fitness(new_best.fitness, prev_best.fitness, rel_tol)
    elitist = kind is not ControllerKind.BASIC

    if kind is ControllerKind.ELITIST_WITH_SIZE:
        if order > 0:
            two = Population(np.repeat(new_best.genotype[None, :], 2, axis=0), np.full(2, new_best.fitness))
            return ControlOutcome(
                dichotomy_init(c, n),
                two,
                [ControlAction.REINIT_MUTATION, ControlAction.RESET_POPULATION_TO_TWO],
                new_best,
            )
        if has_converged(state, policy):
            if landscape is None or rng is None:
                raise ConfigurationError("growing the population needs a landscape and an rng")
            grown = _grow(pop, policy, rng, landscape)
            actions = [ControlAction.GROW_POPULATION, ControlAction.REINIT_MUTATION]
            best = new_best
            if order < 0:
                # keep the elite: the growth branch would otherwise drop it for good
                grown = _reintroduce(grown, prev_best)
                actions.append(ControlAction.REINTRODUCE_ELITE)
                best = prev_best
            return ControlOutcome(dichotomy_init(c, n), grown, actions, best)

    if order == 0:
        return ControlOutcome(dichotomy_increase(state), pop, [ControlAction.INCREASE_MUTATION], new_best)
    if order < 0:
        if elitist:
            return ControlOutcome(
                dichotomy_decrease(state),
                _reintroduce(pop, prev_best),
                [ControlAction.DECREASE_MUTATION, ControlAction.REINTRODUCE_ELITE],
                prev_best,
            )
        return ControlOutcome(dichotomy_decrease(state), pop, [ControlAction.DECREASE_MUTATION], new_best)
    return ControlOutcome(dichotomy_init(c, n), pop, [ControlAction.REINIT_MUTATION], new_best)


class ControlledRun(NamedTuple):
    records: list[GenerationRecord]
    terminated: str  # "optimum" or "budget"


def _is_optimal(best: Individual, landscape: FitnessLandscape, rel_tol: float) -> bool:
    return compare_fitness(best.fitness, landscape.max_fitness, rel_tol) >= 0


def run_controlled_ga(
    kind: ControllerKind | FixedMutation,
    landscape: FitnessLandscape,
    params: GAParams,
    policy: SizePolicy,
    budget: int,
    rng: np.random.Generator,
    *,
    population_size: int = 64,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
    stop_on_optimum: bool = True,
    seed_master: int = 0,
) -> ControlledRun:
    """Run the controlled GA for at most ``budget`` generations.

    Generation 0 is the initial population; each later record follows one
    generation step and the controller decision that came after it. With
    ``stop_on_optimum`` the run ends at the first generation whose best
    individual reaches the landscape maximum. ``seed_master`` overwrites
    that many initial members with the master genotype.
    """
    if budget < 1:
        raise ConfigurationError(f"budget must be >= 1, got {budget}", "budget")
    n = landscape.n
    rel_tol = fitness_tolerance(landscape)
    fixed = isinstance(kind, FixedMutation)
    if not fixed:
        kind = ControllerKind(kind)

    m0 = 2 if kind is ControllerKind.ELITIST_WITH_SIZE else population_size
    pop = init_population(m0, n, rng, landscape)
    if seed_master:
        if not 0 < seed_master <= m0:
            raise ConfigurationError(f"seed_master must be in 0..{m0}, got {seed_master}", "seed_master")
        if landscape.kind is LandscapeKind.CUSTOM:
            master_genotype(landscape)  # raises UnsupportedQueryError
        genomes = pop.genomes.copy()
        genomes[:seed_master] = master_genotype(landscape)
        pop = Population.from_genomes(genomes, landscape)

    best = best_individual(pop)
    if fixed:
        c = None
        state = None
        step_params = replace(params, p_m=kind.p_m)
        records = [make_record(0, pop, best, kind.p_m)]
    else:
        c = fitness_ratio_bound(landscape, safety_factor)
        state = dichotomy_init(c, n)
        records = [make_record(0, pop, best, state.p_m, state.alpha, state.beta)]

    if stop_on_optimum and _is_optimal(best, landscape, rel_tol):
        return ControlledRun(records, "optimum")

    for t in range(1, budget + 1):
        prev = best
        if fixed:
            pop, rec = generation_step(pop, step_params, landscape, rng, t)
            best = best_individual(pop)
            records.append(rec)
        else:
            pop, _ = generation_step(pop, replace(params, p_m=state.p_m), landscape, rng, t)
            outcome = controller_step(
                kind,
                prev,
                best_individual(pop),
                state,
                pop,
                policy,
                c=c,
                n=n,
                landscape=landscape,
                rng=rng,
                rel_tol=rel_tol,
            )
            state, pop, best = outcome.state, outcome.population, outcome.best
            records.append(
                make_record(t, pop, best, state.p_m, state.alpha, state.beta, format_actions(outcome.actions))
            )
        if stop_on_optimum and _is_optimal(best, landscape, rel_tol):
            return ControlledRun(records, "optimum")
    return ControlledRun(records, "budget")
