"""One generation of a generational GA over bitstrings.

Operators run in the order selection, mutation, crossover. That is the
order of the controlled loop this package reproduces, and it differs from
the usual crossover-then-mutation found in most GA texts.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigurationError
from .landscape import FitnessLandscape, genotype_to_str

DEFAULT_FITNESS_RTOL = 1e-9


class Selection(str, enum.Enum):
    FITNESS_PROPORTIONAL = "fitness_proportional"
    TOURNAMENT = "tournament"


class CrossoverKind(str, enum.Enum):
    ONE_POINT = "one_point"
    UNIFORM = "uniform"


@dataclass(frozen=True)
class GAParams:
    p_m: float = 0.0
    crossover_rate: float = 0.7
    selection: Selection = Selection.FITNESS_PROPORTIONAL
    tournament_size: int = 2
    crossover: CrossoverKind = CrossoverKind.ONE_POINT

    def __post_init__(self):
        if not 0.0 <= self.p_m <= 1.0:
            raise ConfigurationError(f"mutation probability must be in [0, 1], got {self.p_m}", "ga.p_m")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigurationError(
                f"crossover rate must be in [0, 1], got {self.crossover_rate}", "ga.crossover_rate"
            )
        if self.tournament_size < 2:
            raise ConfigurationError(
                f"tournament size must be >= 2, got {self.tournament_size}", "ga.tournament_size"
            )
        object.__setattr__(self, "selection", Selection(self.selection))
        object.__setattr__(self, "crossover", CrossoverKind(self.crossover))


class Individual(NamedTuple):
    genotype: np.ndarray
    fitness: float


@dataclass(frozen=True, eq=False)
class Population:
    """Genotypes as rows of ``genomes`` with their cached fitness values."""

    genomes: np.ndarray
    fitness: np.ndarray

    def __post_init__(self):
        if self.genomes.ndim != 2:
            raise ConfigurationError(f"genomes must be a 2-d array, got shape {self.genomes.shape}")
        if self.genomes.shape[0] < 2:
            raise ConfigurationError(f"population size must be >= 2, got {self.genomes.shape[0]}")
        if self.fitness.shape != (self.genomes.shape[0],):
            raise ConfigurationError("fitness cache does not match population size")

    @classmethod
    def from_genomes(cls, genomes: np.ndarray, landscape: FitnessLandscape) -> "Population":
        genomes = np.ascontiguousarray(genomes, dtype=np.uint8)
        return cls(genomes, landscape.evaluate_many(genomes))

    @property
    def size(self) -> int:
        return self.genomes.shape[0]

    @property
    def n(self) -> int:
        return self.genomes.shape[1]

    def __len__(self) -> int:
        return self.size


class GenerationRecord(NamedTuple):
    """Per-generation observables; ``alpha``/``beta`` are None without a dichotomy controller."""

    generation: int
    best_fitness: float
    mean_fitness: float
    p_m: float
    alpha: float | None
    beta: float | None
    population_size: int
    diversity: float
    action: str
    best_genotype: str


def fitness_tolerance(landscape: FitnessLandscape) -> float:
    """Relative tolerance for fitness comparisons; zero means exact equality."""
    return 0.0 if landscape.integer_valued else DEFAULT_FITNESS_RTOL


def compare_fitness(a: float, b: float, rel_tol: float = 0.0) -> int:
    """Return -1, 0 or 1 as ``a`` is below, equal to, or above ``b``."""
    if a == b or (rel_tol > 0 and math.isclose(a, b, rel_tol=rel_tol, abs_tol=0.0)):
        return 0
    return 1 if a > b else -1


def init_population(m: int, n: int, rng: np.random.Generator, landscape: FitnessLandscape) -> Population:
    """``m`` genotypes drawn uniformly and independently from {0,1}^n."""
    if m < 2:
        raise ConfigurationError(f"population size must be >= 2, got {m}", "population_size")
    if n < 1:
        raise ConfigurationError(f"genotype length must be >= 1, got {n}", "landscape.n")
    if n != landscape.n:
        raise ConfigurationError(f"genotype length {n} does not match landscape n={landscape.n}")
    genomes = rng.integers(0, 2, size=(m, n), dtype=np.uint8)
    return Population.from_genomes(genomes, landscape)


def _selected_indices(fitness: np.ndarray, params: GAParams, rng: np.random.Generator) -> np.ndarray:
    m = fitness.shape[0]
    if params.selection is Selection.FITNESS_PROPORTIONAL:
        return rng.choice(m, size=m, p=fitness / fitness.sum())
    # the size controller can shrink the population below the configured k
    k = min(params.tournament_size, m)
    picks = np.stack([rng.choice(m, size=k, replace=False) for _ in range(m)])
    winners = np.argmax(fitness[picks], axis=1)
    return picks[np.arange(m), winners]


def select(pop: Population, params: GAParams, rng: np.random.Generator) -> Population:
    """Resample ``m`` members, fitness-proportionally or by k-tournament.

    Tournament contestants are ``k`` distinct members, so ``k = m`` always
    returns the population best.
    """
    idx = _selected_indices(pop.fitness, params, rng)
    return Population(pop.genomes[idx], pop.fitness[idx])


def _flip(genomes: np.ndarray, p_m: float, rng: np.random.Generator) -> np.ndarray:
    flips = rng.random(genomes.shape) < p_m
    return genomes ^ flips.astype(np.uint8)


def mutate(pop: Population, p_m: float, rng: np.random.Generator, landscape: FitnessLandscape) -> Population:
    """Flip every bit independently with probability ``p_m``."""
    if not 0.0 <= p_m <= 1.0:
        raise ConfigurationError(f"mutation probability must be in [0, 1], got {p_m}")
    return Population.from_genomes(_flip(pop.genomes, p_m, rng), landscape)


def one_point(a: np.ndarray, b: np.ndarray, cut: int) -> tuple[np.ndarray, np.ndarray]:
    """Swap the suffixes of ``a`` and ``b`` starting at position ``cut``."""
    return np.concatenate([a[:cut], b[cut:]]), np.concatenate([b[:cut], a[cut:]])


def _recombine(genomes: np.ndarray, params: GAParams, rng: np.random.Generator) -> np.ndarray:
    m, n = genomes.shape
    pairs = m // 2
    do = rng.random(pairs) < params.crossover_rate
    if params.crossover is CrossoverKind.ONE_POINT:
        if n < 2:
            return genomes.copy()
        cuts = rng.integers(1, n, size=pairs)
        swap = np.arange(n)[None, :] >= cuts[:, None]
    else:
        swap = rng.random((pairs, n)) < 0.5
    swap &= do[:, None]
    first = genomes[0 : 2 * pairs : 2]
    second = genomes[1 : 2 * pairs : 2]
    out = genomes.copy()
    out[0 : 2 * pairs : 2] = np.where(swap, second, first)
    out[1 : 2 * pairs : 2] = np.where(swap, first, second)
    return out


def crossover(pop: Population, params: GAParams, rng: np.random.Generator, landscape: FitnessLandscape) -> Population:
    """Recombine consecutive pairs (0,1), (2,3), ...; an odd last member is left alone."""
    return Population.from_genomes(_recombine(pop.genomes, params, rng), landscape)


def best_index(pop: Population) -> int:
    return int(np.argmax(pop.fitness))


def best_individual(pop: Population) -> Individual:
    """Fittest member; ties go to the lowest index."""
    i = best_index(pop)
    return Individual(pop.genomes[i].copy(), float(pop.fitness[i]))


def diversity(pop: Population) -> float:
    """Mean pairwise Hamming distance between members."""
    m = pop.size
    ones = pop.genomes.sum(axis=0, dtype=np.int64)
    differing = int(np.sum(ones * (m - ones)))
    return differing / (m * (m - 1) / 2)


def make_record(
    generation: int,
    pop: Population,
    best: Individual,
    p_m: float,
    alpha: float | None = None,
    beta: float | None = None,
    action: str = "",
) -> GenerationRecord:
    return GenerationRecord(
        generation=generation,
        best_fitness=float(best.fitness),
        mean_fitness=float(pop.fitness.mean()),
        p_m=float(p_m),
        alpha=alpha,
        beta=beta,
        population_size=pop.size,
        diversity=diversity(pop),
        action=action,
        best_genotype=genotype_to_str(best.genotype),
    )


def generation_step(
    pop: Population,
    params: GAParams,
    landscape: FitnessLandscape,
    rng: np.random.Generator,
    generation: int = 0,
) -> tuple[Population, GenerationRecord]:
    """Selection, then mutation, then crossover; fitness is evaluated once at the end."""
    idx = _selected_indices(pop.fitness, params, rng)
    genomes = _flip(pop.genomes[idx], params.p_m, rng)
    genomes = _recombine(genomes, params, rng)
    new = Population.from_genomes(genomes, landscape)
    return new, make_record(generation, new, best_individual(new), params.p_m)
