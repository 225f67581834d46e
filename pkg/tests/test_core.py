from dataclasses import replace

import numpy as np
import pytest

from evocomp.analysis import SharingSpec
from evocomp.core import (
    ConfigError,
    EaConfig,
    Termination,
    initialize_population,
    run,
    should_stop,
    start,
    step,
    validate_config,
)
from evocomp.genotypes import BitString, PrimitiveSet, RealVector, RealVectorSpace
from evocomp.population import Individual, Population
from evocomp.presets import ep_preset, es_preset, ga_preset, gp_preset
from evocomp.problems import Problem, onemax, sphere, symbolic_regression, sphere_eval, tour, two_peaks
from evocomp.selection import Comma, Generational, Plus, SteadyState, Tournament, UniformSelection
from evocomp.variation import (
    BitFlipMutation,
    CrossoverSpec,
    GaussianMutation,
    LocalSearchSpec,
    SwapMutation,
)

GENS = Termination(max_generations=10)


def plus_config(**kw):
    base = dict(
        mu=10, lam=30, selection=Tournament(2), replacement=Plus(), mutation=BitFlipMutation(0.1),
        termination=GENS, crossover=CrossoverSpec("one_point", 0.7),
    )
    base.update(kw)
    return EaConfig(**base)


# --- initialization --------------------------------------------------------------

def test_initialize_counts_and_fitness():
    pop = initialize_population(onemax(5), 4, rng=np.random.default_rng(0))
    assert len(pop) == 4
    assert all(len(ind.genotype) == 5 and ind.fitness is not None for ind in pop)


def test_initialize_with_inoculant():
    seed = BitString("11111")
    pop = initialize_population(onemax(5), 3, [seed], np.random.default_rng(0))
    assert pop[0].genotype == seed and pop[0].fitness == 5
    assert len(pop) == 3


def test_initialize_rejects_bad_inoculants():
    with pytest.raises(ValueError):
        initialize_population(onemax(5), 3, [BitString("111")], np.random.default_rng(0))
    with pytest.raises(TypeError):
        initialize_population(onemax(5), 3, [RealVector([0.0])], np.random.default_rng(0))
    with pytest.raises(ValueError):
        initialize_population(onemax(5), 1, [BitString("11111")] * 2, np.random.default_rng(0))


def test_initialize_real_uniform_in_bounds():
    p = Problem("box", RealVectorSpace.box(2, 0.0, 1.0), sphere_eval, "minimize")
    pop = initialize_population(p, 1000, rng=np.random.default_rng(1))
    x = np.array([ind.genotype.values for ind in pop])
    assert np.all((x >= 0) & (x <= 1))
    assert np.all(np.abs(x.mean(axis=0) - 0.5) <= 0.05)


# --- run ---------------------------------------------------------------------------

@pytest.mark.parametrize("make", [
    lambda t: ga_preset(1, mu=4, termination=t),
    lambda t: ga_preset(1, mu=4, replacement="steady-state", termination=t),
])
def test_single_bit_space_hits_target(make):
    trace = run(make(Termination(max_generations=50, target_fitness=1)), onemax(1))
    assert trace.best.fitness == 1
    assert trace.reason == "target_fitness"


def test_zero_generations():
    trace = run(plus_config(termination=Termination(max_generations=0)), onemax(8))
    assert len(trace.rows) == 1
    assert trace.rows[0].generation == 0 and trace.rows[0].evaluations == 10


def test_ga_preset_solves_small_onemax():
    hits = 0
    for seed in range(20):
        cfg = ga_preset(20, mu=50, termination=Termination(max_generations=100, target_fitness=20), seed=seed)
        hits += run(cfg, onemax(20)).best.fitness == 20
    assert hits >= 18


# --- step ------------------------------------------------------------------------------

def test_step_accounting():
    state = start(plus_config(lam=30), onemax(12))
    for _ in range(7):
        step(state)
    before_best, before_eval = state.population.best().fitness, state.evaluations
    assert state.generation == 7
    step(state)
    assert state.generation == 8
    assert state.evaluations == before_eval + 30
    assert len(state.population) == 10
    assert state.population.best().fitness >= before_best


def test_local_search_evaluations_counted():
    cfg = plus_config(local_search=LocalSearchSpec(3))
    trace = run(cfg, onemax(12))
    rows = trace.rows
    for a, b in zip(rows, rows[1:]):
        spent = b.evaluations - a.evaluations
        assert 30 <= spent <= 30 + 30 * 3


def test_evaluation_accounting_without_local_search():
    trace = run(plus_config(), onemax(12))
    assert [r.evaluations for r in trace.rows] == [10 + 30 * g for g in range(11)]


# --- termination -----------------------------------------------------------------------------

def _state():
    return start(plus_config(), onemax(12))


def test_should_stop_max_generations():
    state = _state()
    state.population = Population(state.population.members, 10)
    assert should_stop(state, Termination(max_generations=10)) == (True, "max_generations")


def test_should_stop_target():
    state = _state()
    state.best = Individual(BitString("0"), 4.9)
    assert should_stop(state, Termination(max_generations=99, target_fitness=5.0))[0] is False
    state.best = Individual(BitString("0"), 5.0)
    assert should_stop(state, Termination(max_generations=99, target_fitness=5.0)) == (True, "target_fitness")


def test_should_stop_no_improvement():
    state = _state()
    state.best_history = [1, 2, 3, 3, 3, 3, 3, 3]
    assert should_stop(state, Termination(max_generations=99, no_improvement=5)) == (True, "no_improvement")
    state.best_history = [1, 2, 3, 3, 3, 3, 3]
    assert should_stop(state, Termination(max_generations=99, no_improvement=5)) == (False, None)


def test_should_stop_evaluations_and_clock():
    state = _state()
    assert should_stop(state, Termination(max_evaluations=10)) == (True, "max_evaluations")
    assert should_stop(state, Termination(max_evaluations=11)) == (False, None)
    assert should_stop(state, Termination(wall_clock=1e-9)) == (True, "wall_clock")


def test_termination_validation():
    with pytest.raises(ConfigError):
        validate_config(plus_config(termination=Termination(no_improvement=3)))
    with pytest.raises(ConfigError):
        validate_config(plus_config(termination=Termination(max_generations=-1)))
    with pytest.raises(ConfigError):
        validate_config(plus_config(termination=Termination(max_generations=5, no_improvement=0)))
    with pytest.raises(ConfigError):
        validate_config(plus_config(termination=Termination(wall_clock=0.0)))


# --- configuration validation ---------------------------------------------------------------

def test_config_validation_rules():
    with pytest.raises(ConfigError):
        validate_config(plus_config(replacement=Comma(), lam=5))
    with pytest.raises(ConfigError):
        validate_config(plus_config(elitism_count=11))
    with pytest.raises(ConfigError):
        validate_config(plus_config(replacement=SteadyState()))
    with pytest.raises(ConfigError):
        validate_config(plus_config(replacement=Generational()))
    with pytest.raises(ConfigError):
        validate_config(plus_config(selection=Tournament(11)))
    with pytest.raises(ConfigError):
        validate_config(plus_config(seed=-1))
    with pytest.raises(ConfigError):
        validate_config(plus_config(mutation=GaussianMutation(0.1)), onemax(5))
    with pytest.raises(ConfigError):
        validate_config(plus_config(crossover=CrossoverSpec("order")), onemax(5))
    with pytest.raises(ConfigError):
        validate_config(plus_config(mutation=SwapMutation(1), crossover=None), tour([[0.0]]))
    with pytest.raises(ConfigError):
        unbounded = sphere(2, init_low=-np.inf, init_high=np.inf)
        validate_config(plus_config(mutation=GaussianMutation(0.1), crossover=None), unbounded)


# --- invariants ----------------------------------------------------------------------------

XS = np.linspace(-1, 1, 10)
PRIMS = PrimitiveSet.arithmetic(("x",), (1.0,))


def preset_cases():
    t = Termination(max_generations=8)
    return [
        (ga_preset(16, mu=20, elitism_count=1, termination=t), onemax(16)),
        (es_preset(4, mu=5, lam=30, termination=t), sphere(4)),
        (ep_preset(4, mu=10, termination=t), sphere(4)),
        (gp_preset(PRIMS, mu=40, max_depth=8, termination=t), symbolic_regression(XS, XS**2 + XS, PRIMS)),
        (replace(ga_preset(1, mu=2), termination=t, fitness_sharing=SharingSpec(0.5)), onemax(1)),
        (EaConfig(30, 30, Tournament(2), Generational(), GaussianMutation(0.05), t,
                  fitness_sharing=SharingSpec(0.5)), two_peaks()),
    ]


@pytest.mark.parametrize("case", range(6))
def test_determinism_across_worker_counts(case):
    cfg, problem = preset_cases()[case]
    traces = [run(replace(cfg, seed=5), problem, workers=w) for w in (1, 1, 4)]
    for t in traces[1:]:
        assert t.rows == traces[0].rows
        assert [i.genotype for i in t.final_population] == [i.genotype for i in traces[0].final_population]


@pytest.mark.parametrize("case", range(6))
def test_trace_and_population_invariants(case):
    cfg, problem = preset_cases()[case]
    state = start(cfg, problem)
    rng = np.random.default_rng(case)
    while not should_stop(state, cfg.termination)[0]:
        step(state)
        assert len(state.population) == cfg.mu
        for i in rng.choice(cfg.mu, size=min(5, cfg.mu), replace=False):
            ind = state.population[i]
            assert ind.fitness == problem.fitness(ind.genotype)
    gens = [r.generation for r in state.rows]
    assert gens == list(range(len(gens)))
    evals = [r.evaluations for r in state.rows]
    assert evals == sorted(evals)
    assert evals[-1] == cfg.mu + cfg.lam * (len(gens) - 1)


@pytest.mark.parametrize("seed", range(5))
def test_elitist_engines_never_lose_best(seed):
    cases = [
        plus_config(seed=seed),
        plus_config(lam=1, replacement=SteadyState(), seed=seed),
        plus_config(lam=10, replacement=Generational(), elitism_count=1, seed=seed),
        es_preset(3, mu=3, lam=10, mode="plus", termination=GENS, seed=seed),
        plus_config(lam=20, replacement=Comma(), elitism_count=2, seed=seed),
    ]
    for cfg in cases:
        problem = sphere(3) if cfg.mutation.kind == "real" else onemax(12)
        best = [r.best_fitness for r in run(cfg, problem).rows]
        assert all(b >= a for a, b in zip(best, best[1:]))


def test_inoculated_run_keeps_inoculant_best():
    trace = run(plus_config(termination=Termination(max_generations=3)), onemax(12), [BitString("1" * 12)])
    assert trace.best.fitness == 12
    assert trace.rows[0].best_fitness == 12


def test_mean_sigma_only_for_self_adaptive():
    assert run(plus_config(), onemax(6)).rows[0].mean_sigma is None
    es = run(es_preset(3, mu=3, lam=10, termination=GENS), sphere(3))
    assert es.rows[0].mean_sigma == pytest.approx(1.0)


def test_best_ties_keep_first_encountered():
    pop = Population([Individual(BitString("10"), 1.0), Individual(BitString("01"), 1.0)])
    assert pop.best() is pop[0]


def test_uniform_selection_config_runs():
    cfg = EaConfig(5, 5, UniformSelection(), Plus(), GaussianMutation(0.1), GENS)
    assert len(run(cfg, sphere(2)).rows) == 11
