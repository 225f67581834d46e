"""The generational loop: initialize, evaluate, select, vary, evaluate, replace.

All random draws (selection, crossover, mutation, local search, stochastic
replacement) happen on one ``numpy`` generator in a fixed order while the
engine runs single-threaded.  Only fitness evaluation of a generation's
offspring may be spread over worker threads, and results are gathered in
submission order, so a run is bit-identical whatever the worker count.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Sequence

import numpy as np

from .analysis import SharingSpec, population_diversity, shared_fitness
from .genotypes import RealVectorSpace, SelfAdaptiveRealVector
from .population import Individual, Population
from .selection import (
    Comma,
    EachParent,
    EpStochasticPlus,
    Generational,
    Plus,
    RouletteWheel,
    SteadyState,
    Tournament,
    UniformSelection,
    apply_elitism,
    comma_replacement,
    ep_stochastic_plus,
    generational_replacement,
    plus_replacement,
    select_indices,
    steady_state_replace,
)
from .variation import (
    CrossoverSpec,
    GaussianMutation,
    LocalSearchSpec,
    SelfAdaptiveMutation,
    SubtreeMutation,
    SwapMutation,
    local_search,
    mutate,
    recombine,
)

MAX_SEED = 2**64


class ConfigError(ValueError):
    """An :class:`EaConfig` that cannot be run on the given problem."""


@dataclass(frozen=True)
class Termination:
    """Stopping rules; the run stops as soon as any configured rule fires.

    ``target_fitness`` is in engine-internal (maximize) units.
    ``no_improvement`` is a window in generations over which the best-so-far
    fitness must rise.
    """

    max_evaluations: int | None = None
    max_generations: int | None = None
    target_fitness: float | None = None
    no_improvement: int | None = None
    wall_clock: float | None = None

    def validate(self) -> None:
        if self.max_evaluations is not None and self.max_evaluations < 0:
            raise ConfigError("max_evaluations must be >= 0")
        if self.max_generations is not None and self.max_generations < 0:
            raise ConfigError("max_generations must be >= 0")
        if self.no_improvement is not None and self.no_improvement < 1:
            raise ConfigError("no_improvement window must be >= 1")
        if self.wall_clock is not None and not self.wall_clock > 0:
            raise ConfigError("wall_clock seconds must be > 0")
        if self.max_evaluations is None and self.max_generations is None and self.wall_clock is None:
            raise ConfigError(
                "termination needs a finite budget: max_evaluations, max_generations or wall_clock"
            )


@dataclass(frozen=True)
class EaConfig:
    """Everything that determines a run, given a problem."""

    mu: int
    lam: int
    selection: Any
    replacement: Any
    mutation: Any
    termination: Termination
    crossover: CrossoverSpec | None = None
    elitism_count: int = 0
    local_search: LocalSearchSpec | None = None
    fitness_sharing: SharingSpec | None = None
    seed: int = 0

    def validate(self, problem=None) -> None:
        validate_config(self, problem)


def validate_config(config: EaConfig, problem=None) -> None:
    """Raise :class:`ConfigError` if ``config`` cannot run on ``problem``."""
    mu, lam = config.mu, config.lam
    if mu < 1 or lam < 1:
        raise ConfigError("mu and lambda must be >= 1")
    if not 0 <= config.seed < MAX_SEED:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    if not 0 <= config.elitism_count <= mu:
        raise ConfigError("elitism_count must lie in 0..mu")

    sel = config.selection
    if isinstance(sel, Tournament):
        if not 1 <= sel.size <= mu:
            raise ConfigError(f"tournament size {sel.size} must lie in 1..mu={mu}")
    elif not isinstance(sel, (RouletteWheel, UniformSelection, EachParent)):
        raise ConfigError(f"unknown selection {sel!r}")

    rep = config.replacement
    if isinstance(rep, Comma) and lam < mu:
        raise ConfigError(f"comma replacement needs lambda >= mu (got mu={mu}, lambda={lam})")
    if isinstance(rep, Generational) and lam != mu:
        raise ConfigError("generational replacement needs lambda == mu")
    if isinstance(rep, SteadyState) and lam != 1:
        raise ConfigError("steady-state replacement needs lambda == 1")
    if isinstance(rep, EpStochasticPlus):
        if lam != mu:
            raise ConfigError("EP replacement needs lambda == mu")
        if rep.q < 1:
            raise ConfigError("EP opponent count q must be >= 1")
    if not isinstance(rep, (Plus, Comma, Generational, SteadyState, EpStochasticPlus)):
        raise ConfigError(f"unknown replacement {rep!r}")

    try:
        config.mutation.validate()
        if config.crossover is not None:
            config.crossover.validate()
        if config.local_search is not None:
            config.local_search.validate()
        config.termination.validate()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    if problem is None:
        return
    kind = problem.kind
    if config.mutation.kind != kind:
        raise ConfigError(f"{type(config.mutation).__name__} does not apply to {kind} genotypes")
    if config.crossover is not None and config.crossover.kind != kind:
        raise ConfigError(f"{config.crossover.operator} crossover does not apply to {kind} genotypes")
    if isinstance(config.mutation, SelfAdaptiveMutation) and not isinstance(problem.space, RealVectorSpace):
        raise ConfigError("self-adaptive mutation needs a real-vector problem")
    if isinstance(config.mutation, SwapMutation) and problem.space.n < 2:
        raise ConfigError("swap mutation needs at least two elements")
    if kind == "real":
        try:
            problem.space.init_box()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc


def genotype_space(config: EaConfig, problem):
    """The space genotypes are drawn from (self-adaptive vectors carry sigmas)."""
    if isinstance(config.mutation, SelfAdaptiveMutation):
        return problem.space.self_adaptive(config.mutation.sigma0)
    if isinstance(config.mutation, SubtreeMutation) and config.mutation.max_depth is not None:
        space = problem.space
        lo, hi = space.init_depth
        top = config.mutation.max_depth
        return replace(space, max_depth=top, init_depth=(min(lo, top), min(hi, top)))
    return problem.space


# --------------------------------------------------------------------------
# Trace
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class TraceRow:
    generation: int
    evaluations: int
    best_fitness: float
    mean_fitness: float
    diversity: float
    mean_sigma: float | None = None


@dataclass
class RunTrace:
    rows: list[TraceRow]
    best: Individual
    reason: str
    final_population: Population | None = None
    seed: int | None = None

    def best_fitness_history(self) -> list[float]:
        return [r.best_fitness for r in self.rows]

    def evaluations_to_reach(self, target: float) -> int | None:
        """Evaluations used by the first generation whose best reaches ``target``."""
        for r in self.rows:
            if r.best_fitness >= target:
                return r.evaluations
        return None


# --------------------------------------------------------------------------
# Engine
# --------------------------------------------------------------------------


def _evaluate(genotypes: Sequence, problem, executor) -> list[float]:
    if executor is None or len(genotypes) < 2:
        return [problem.fitness(g) for g in genotypes]
    return list(executor.map(problem.fitness, genotypes))


def initialize_population(
    problem,
    mu: int,
    inoculants: Sequence = (),
    rng: np.random.Generator | None = None,
    space=None,
    executor=None,
) -> Population:
    """``mu`` evaluated individuals: the inoculants verbatim, then uniform samples."""
    if mu < 1:
        raise ValueError("mu must be >= 1")
    inoculants = list(inoculants)
    if len(inoculants) > mu:
        raise ValueError(f"{len(inoculants)} inoculants do not fit in a population of {mu}")
    if rng is None:
        rng = np.random.default_rng()
    space = problem.space if space is None else space
    genotypes = []
    for g in inoculants:
        if getattr(g, "kind", None) != problem.kind:
            raise TypeError(f"inoculant {g!r} is not a {problem.kind} genotype")
        space.check(g)
        if hasattr(space, "lift"):
            g = space.lift(g)
        genotypes.append(g)
    genotypes += [space.sample(rng) for _ in range(mu - len(inoculants))]
    fits = _evaluate(genotypes, problem, executor)
    return Population([Individual(g, f, 0) for g, f in zip(genotypes, fits)], generation=0)


@dataclass
class EngineState:
    config: EaConfig
    problem: Any
    space: Any
    rng: np.random.Generator
    population: Population
    evaluations: int
    best: Individual
    best_history: list[float] = field(default_factory=list)
    rows: list[TraceRow] = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)
    executor: Any = None

    @property
    def generation(self) -> int:
        return self.population.generation


def _record(state: EngineState) -> None:
    pop = state.population
    f = pop.fitnesses()
    sigma = None
    if isinstance(pop[0].genotype, SelfAdaptiveRealVector):
        sigma = float(np.mean([ind.genotype.sigmas for ind in pop]))
    state.rows.append(
        TraceRow(
            generation=pop.generation,
            evaluations=state.evaluations,
            best_fitness=float(f.max()),
            mean_fitness=float(f.mean()),
            diversity=population_diversity(pop),
            mean_sigma=sigma,
        )
    )
    champion = pop.best()
    if champion.fitness > state.best.fitness:
        state.best = champion
    state.best_history.append(state.best.fitness)


def start(config: EaConfig, problem, inoculants: Sequence = (), workers: int = 1) -> EngineState:
    """Validate, build and evaluate the initial population, record generation 0."""
    validate_config(config, problem)
    rng = np.random.default_rng(config.seed)
    space = genotype_space(config, problem)
    executor = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    pop = initialize_population(problem, config.mu, inoculants, rng, space, executor)
    state = EngineState(config, problem, space, rng, pop, config.mu, pop.best(), executor=executor)
    _record(state)
    return state


def _selection_fitness(state: EngineState) -> np.ndarray:
    f = state.population.fitnesses()
    spec = state.config.fitness_sharing
    if spec is None:
        return f
    if f.min() < 0:
        f = f - f.min()
    return shared_fitness(state.population, spec, f)


def _make_offspring(state: EngineState) -> list:
    cfg, rng = state.config, state.rng
    parents = state.population.members
    sel_f = _selection_fitness(state)
    cx = cfg.crossover
    lam = cfg.lam

    children = []
    if cx is not None:
        n_pairs = math.ceil(lam / 2) if cx.two_children else lam
        idx = select_indices(cfg.selection, sel_f, 2 * n_pairs, rng)
        for k in range(n_pairs):
            a = parents[idx[2 * k]].genotype
            b = parents[idx[2 * k + 1]].genotype
            if rng.random() < cx.p_c:
                children += recombine(a, b, cx, rng, state.space)
            else:
                children += [a, b] if cx.two_children else [a]
        children = children[:lam]
    else:
        idx = select_indices(cfg.selection, sel_f, lam, rng)
        children = [parents[i].genotype for i in idx]
    return [mutate(g, cfg.mutation, rng, state.space) for g in children]


def _local_search_step(state: EngineState) -> float | None:
    spec = state.config.local_search
    if spec.step is not None:
        return spec.step
    if isinstance(state.config.mutation, GaussianMutation) and state.config.mutation.sigma > 0:
        return state.config.mutation.sigma
    return None


def step(state: EngineState) -> EngineState:
    """Advance one generation in place and return the state."""
    cfg = state.config
    gen = state.generation + 1
    genotypes = _make_offspring(state)
    fits = _evaluate(genotypes, state.problem, state.executor)
    state.evaluations += len(genotypes)
    offspring = [Individual(g, f, gen, True) for g, f in zip(genotypes, fits)]

    if cfg.local_search is not None and cfg.local_search.budget > 0:
        ls_step = _local_search_step(state)
        improved = []
        for ind in offspring:
            new, used = local_search(ind, state.problem, cfg.local_search.budget, state.rng, ls_step, state.space)
            state.evaluations += used
            improved.append(new)
        offspring = improved

    parents = state.population.members
    rep = cfg.replacement
    if isinstance(rep, Plus):
        survivors = plus_replacement(parents, offspring, cfg.mu)
    elif isinstance(rep, Comma):
        survivors = apply_elitism(parents, comma_replacement(offspring, cfg.mu), cfg.elitism_count)
    elif isinstance(rep, Generational):
        survivors = generational_replacement(parents, offspring, cfg.elitism_count)
    elif isinstance(rep, SteadyState):
        survivors = steady_state_replace(parents, offspring[0])
    elif isinstance(rep, EpStochasticPlus):
        survivors = ep_stochastic_plus(parents, offspring, rep.q, state.rng)
    else:
        raise ConfigError(f"unknown replacement {rep!r}")

    for ind in survivors:
        ind.is_offspring = False
    state.population = Population(survivors, gen)
    _record(state)
    return state


def should_stop(state: EngineState, criterion: Termination) -> tuple[bool, str | None]:
    """Whether any configured rule fires, and the name of the first that does."""
    if criterion.target_fitness is not None and state.best.fitness >= criterion.target_fitness:
        return True, "target_fitness"
    if criterion.max_generations is not None and state.generation >= criterion.max_generations:
        return True, "max_generations"
    if criterion.max_evaluations is not None and state.evaluations >= criterion.max_evaluations:
        return True, "max_evaluations"
    w = criterion.no_improvement
    hist = state.best_history
    if w is not None and len(hist) > w and hist[-1] <= hist[-1 - w]:
        return True, "no_improvement"
    if criterion.wall_clock is not None and time.perf_counter() - state.started >= criterion.wall_clock:
        return True, "wall_clock"
    return False, None


def run(config: EaConfig, problem, inoculants: Sequence = (), workers: int = 1) -> RunTrace:
    """Execute a full run and return its trace."""
    state = start(config, problem, inoculants, workers)
    try:
        while True:
            stop, reason = should_stop(state, config.termination)
            if stop:
                break
            step(state)
    finally:
        if state.executor is not None:
            state.executor.shutdown()
    return RunTrace(state.rows, state.best, reason, state.population, config.seed)
