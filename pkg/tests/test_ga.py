import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from critga.errors import ConfigurationError
from critga.ga import (
    CrossoverKind,
    GAParams,
    Population,
    Selection,
    best_individual,
    compare_fitness,
    crossover,
    diversity,
    generation_step,
    init_population,
    mutate,
    one_point,
    select,
)
from critga.landscape import custom_landscape, genotype_from_str, royal_road, sharp_peak

FLAT8 = custom_landscape(8, {}, 2.0)


def pop_of(rows, landscape):
    return Population.from_genomes(np.array([genotype_from_str(r) for r in rows]), landscape)


def pop_with_fitness(fitness, n=4):
    fitness = np.asarray(fitness, dtype=float)
    genomes = np.arange(len(fitness))[:, None] >> np.arange(n)[None, :] & 1
    return Population(genomes.astype(np.uint8), fitness)


# -- init_population -----------------------------------------------------


def test_init_two_by_one_is_uniform():
    L = sharp_peak(1, 2)
    rng = np.random.default_rng(2024)
    counts = np.zeros(4)
    for _ in range(10_000):
        g = init_population(2, 1, rng, L).genomes[:, 0]
        counts[2 * g[0] + g[1]] += 1
    freq = counts / counts.sum()
    assert np.all(np.abs(freq - 0.25) <= 0.02)
    assert stats.chisquare(counts).pvalue > 1e-3


def test_init_size_and_cache():
    L = royal_road(8, 4)
    pop = init_population(5, 8, np.random.default_rng(0), L)
    assert pop.size == 5 and pop.n == 8
    assert np.array_equal(pop.fitness, L.evaluate_many(pop.genomes))


def test_init_rejects_single_member():
    with pytest.raises(ConfigurationError):
        init_population(1, 8, np.random.default_rng(0), FLAT8)


# -- select --------------------------------------------------------------


def test_equal_fitness_selection_is_uniform():
    m, trials = 5, 10_000
    pop = pop_with_fitness([1.0] * m)
    rng = np.random.default_rng(3)
    params = GAParams()
    counts = np.zeros(m)
    for _ in range(trials):
        sel = select(pop, params, rng)
        # the first draw of each trial: one categorical sample
        counts[int(np.flatnonzero((pop.genomes == sel.genomes[0]).all(axis=1))[0])] += 1
    p = 1 / m
    se = math.sqrt(p * (1 - p) / trials)
    assert np.all(np.abs(counts / trials - p) <= 3 * se)


def test_proportional_three_to_one():
    pop = pop_with_fitness([3.0, 1.0], n=1)
    rng = np.random.default_rng(5)
    trials = 10_000
    first = 0
    for _ in range(trials):
        first += int(select(pop, GAParams(), rng).fitness[0] == 3.0)
    freq = first / trials
    assert abs(freq - 0.75) <= 0.02
    # exact binomial oracle: two-sided test at the 0.1% level
    assert stats.binomtest(first, trials, 0.75).pvalue > 1e-3


@pytest.mark.parametrize("m", [2, 5, 9])
def test_full_tournament_always_returns_best(m):
    pop = pop_with_fitness(np.linspace(1.0, 3.0, m)[::-1])
    params = GAParams(selection=Selection.TOURNAMENT, tournament_size=m)
    rng = np.random.default_rng(m)
    for _ in range(200):
        assert np.all(select(pop, params, rng).fitness == pop.fitness.max())


def test_tournament_selection_prefers_fitter():
    pop = pop_with_fitness([1.0, 2.0, 3.0, 4.0])
    rng = np.random.default_rng(9)
    params = GAParams(selection=Selection.TOURNAMENT, tournament_size=2)
    draws = np.concatenate([select(pop, params, rng).fitness for _ in range(5000)])
    # two distinct contestants out of four: rank r wins in r - 1 of the 6 pairs
    expected = np.array([0, 1, 2, 3]) / 6
    freq = np.array([(draws == f).mean() for f in (1.0, 2.0, 3.0, 4.0)])
    se = np.sqrt(expected * (1 - expected) / draws.size)
    assert np.all(np.abs(freq - expected) <= 3 * se)


def test_tournament_size_clamped_to_population():
    pop = pop_with_fitness([1.0, 2.0])
    out = select(pop, GAParams(selection=Selection.TOURNAMENT, tournament_size=5), np.random.default_rng(0))
    assert np.all(out.fitness == 2.0)


def test_proportional_selection_frequencies():
    fitness = np.array([1.0, 2.0, 3.0, 6.0])
    pop = pop_with_fitness(fitness)
    rng = np.random.default_rng(17)
    samples = 10_000
    hits = np.zeros(4)
    for _ in range(samples // 4):
        sel = select(pop, GAParams(), rng)
        for j, f in enumerate(fitness):
            hits[j] += np.count_nonzero(sel.fitness == f)
    expected = fitness / fitness.sum()
    se = np.sqrt(expected * (1 - expected) / samples)
    assert np.all(np.abs(hits / samples - expected) <= 3 * se)


# -- mutate --------------------------------------------------------------


def test_mutation_identity_and_complement():
    L = royal_road(8, 4)
    pop = init_population(6, 8, np.random.default_rng(1), L)
    rng = np.random.default_rng(2)
    assert np.array_equal(mutate(pop, 0.0, rng, L).genomes, pop.genomes)
    flipped = mutate(pop, 1.0, rng, L)
    assert np.array_equal(flipped.genomes, 1 - pop.genomes)
    assert np.array_equal(flipped.fitness, L.evaluate_many(flipped.genomes))


def test_mean_flipped_bits():
    L = custom_landscape(20, {}, 2.0)
    rng = np.random.default_rng(4)
    pop = init_population(50, 20, rng, L)
    total = 0
    gens = 10_000
    for _ in range(gens):
        new = mutate(pop, 0.1, rng, L)
        total += int((new.genomes != pop.genomes).sum())
    mean = total / (gens * 50)
    assert abs(mean - 20 * 0.1) <= 0.1


def test_per_bit_flip_frequency():
    n, m, p, reps = 12, 10, 0.07, 1000  # 10**4 samples per bit position
    L = custom_landscape(n, {}, 2.0)
    rng = np.random.default_rng(6)
    pop = init_population(m, n, rng, L)
    flips = np.zeros(n)
    for _ in range(reps):
        flips += (mutate(pop, p, rng, L).genomes != pop.genomes).sum(axis=0)
    freq = flips / (m * reps)
    se = math.sqrt(p * (1 - p) / (m * reps))
    assert np.all(np.abs(freq - p) <= 3 * se)


def test_mutate_rejects_bad_probability():
    pop = init_population(2, 8, np.random.default_rng(0), FLAT8)
    with pytest.raises(ConfigurationError):
        mutate(pop, 1.5, np.random.default_rng(0), FLAT8)


# -- crossover -----------------------------------------------------------


def test_crossover_rate_zero_is_identity():
    L = royal_road(8, 4)
    pop = init_population(7, 8, np.random.default_rng(1), L)
    out = crossover(pop, GAParams(crossover_rate=0.0), np.random.default_rng(2), L)
    assert np.array_equal(out.genomes, pop.genomes)


def test_one_point_definition():
    a, b = one_point(genotype_from_str("1111"), genotype_from_str("0000"), 2)
    assert "".join(map(str, a)) == "1100"
    assert "".join(map(str, b)) == "0011"


@pytest.mark.parametrize("kind", list(CrossoverKind))
def test_identical_parents_unchanged(kind):
    L = FLAT8
    g = genotype_from_str("10110010")
    pop = Population.from_genomes(np.stack([g, g, g, g]), L)
    out = crossover(pop, GAParams(crossover_rate=1.0, crossover=kind), np.random.default_rng(0), L)
    assert np.array_equal(out.genomes, pop.genomes)


def test_one_point_children_are_suffix_swaps():
    L = FLAT8
    pop = pop_of(["11111111", "00000000", "10101010"], L)
    rng = np.random.default_rng(12)
    for _ in range(50):
        out = crossover(pop, GAParams(crossover_rate=1.0), rng, L)
        a = "".join(map(str, out.genomes[0]))
        cut = a.index("0")
        assert 1 <= cut <= 7 and a == "1" * cut + "0" * (8 - cut)
        assert "".join(map(str, out.genomes[1])) == "0" * cut + "1" * (8 - cut)
        # odd member stays
        assert "".join(map(str, out.genomes[2])) == "10101010"


def test_uniform_crossover_conserves_bits_per_position():
    L = FLAT8
    pop = init_population(10, 8, np.random.default_rng(3), L)
    out = crossover(pop, GAParams(crossover_rate=1.0, crossover=CrossoverKind.UNIFORM), np.random.default_rng(4), L)
    for i in range(0, 10, 2):
        assert np.array_equal(out.genomes[i] + out.genomes[i + 1], pop.genomes[i] + pop.genomes[i + 1])


# -- best individual / diversity ----------------------------------------


@pytest.mark.parametrize("fitness, index, value", [([1, 4, 1], 1, 4), ([2, 2], 0, 2), ([1, 1, 1, 1], 0, 1)])
def test_best_individual(fitness, index, value):
    pop = pop_with_fitness(fitness)
    best = best_individual(pop)
    assert best.fitness == value
    assert np.array_equal(best.genotype, pop.genomes[index])


def test_diversity_matches_pairwise_definition():
    pop = init_population(9, 13, np.random.default_rng(8), custom_landscape(13, {}, 2.0))
    g = pop.genomes
    pairs = [(i, j) for i in range(9) for j in range(i + 1, 9)]
    brute = np.mean([np.count_nonzero(g[i] != g[j]) for i, j in pairs])
    assert diversity(pop) == pytest.approx(brute, rel=1e-12)


def test_compare_fitness():
    assert compare_fitness(2.0, 2.0) == 0
    assert compare_fitness(3.0, 2.0) == 1
    assert compare_fitness(1.0, 2.0) == -1
    assert compare_fitness(1.0 + 1e-12, 1.0, rel_tol=1e-9) == 0
    assert compare_fitness(1.0 + 1e-12, 1.0, rel_tol=0.0) == 1


# -- generation_step -----------------------------------------------------


def test_no_variation_resamples_input():
    L = FLAT8
    pop = init_population(12, 8, np.random.default_rng(21), L)
    out, rec = generation_step(pop, GAParams(p_m=0.0, crossover_rate=0.0), L, np.random.default_rng(22))
    originals = {bytes(row) for row in pop.genomes}
    assert all(bytes(row) in originals for row in out.genomes)
    assert rec.population_size == 12 and rec.best_fitness == 1.0


@settings(max_examples=200, deadline=None)
@given(
    m=st.integers(2, 30),
    n=st.integers(1, 24),
    p=st.floats(0, 1),
    rate=st.floats(0, 1),
    sel=st.sampled_from(list(Selection)),
    xo=st.sampled_from(list(CrossoverKind)),
    seed=st.integers(0, 2**32),
)
def test_generation_step_conserves_size(m, n, p, rate, sel, xo, seed):
    L = sharp_peak(n, 3.0)
    rng = np.random.default_rng(seed)
    pop = init_population(m, n, rng, L)
    params = GAParams(p_m=p, crossover_rate=rate, selection=sel, tournament_size=min(3, m), crossover=xo)
    out, rec = generation_step(pop, params, L, rng, generation=4)
    assert out.size == m and out.n == n
    assert np.array_equal(out.fitness, L.evaluate_many(out.genomes))
    assert rec.best_fitness == out.fitness.max()
    assert 0.0 <= rec.diversity <= n
    assert rec.generation == 4


def test_generation_step_is_deterministic():
    L = royal_road(12, 3)
    params = GAParams(p_m=0.05)

    def trace(seed):
        rng = np.random.default_rng(seed)
        pop = init_population(16, 12, rng, L)
        recs = []
        for t in range(30):
            pop, rec = generation_step(pop, params, L, rng, t)
            recs.append(rec)
        return pop.genomes.tobytes(), recs

    assert trace(5) == trace(5)
    assert trace(5) != trace(6)


def test_half_mutation_randomises_population():
    # p_m = 1/2 without crossover makes every genotype uniform: expected pairwise distance n/2
    n, m = 40, 100
    L = sharp_peak(n, 2.0)
    rng = np.random.default_rng(31)
    pop = Population.from_genomes(np.zeros((m, n), dtype=np.uint8), L)
    divs = []
    for t in range(200):
        pop, rec = generation_step(pop, GAParams(p_m=0.5, crossover_rate=0.0), L, rng, t)
        divs.append(rec.diversity)
    assert np.mean(divs) == pytest.approx(n / 2, abs=0.1)
