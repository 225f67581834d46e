"""Parent selection, survivor replacement and fitness scaling.

Selection draws genitors with repetition from a frozen population; replacement
decides which individuals (parents and/or offspring) form the next parent
population.  All ties are broken deterministically: offspring before parents,
then lower index first.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .population import Individual, Population

# --------------------------------------------------------------------------
# Specs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ShiftToPositive:
    """``f' = f - min(f) + epsilon``."""

    epsilon: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")


@dataclass(frozen=True)
class LinearScaling:
    """Affine map keeping the mean and sending the max to ``pressure * mean``."""

    pressure: float = 2.0

    def __post_init__(self):
        if not self.pressure > 1:
            raise ValueError("linear scaling pressure must be > 1")


@dataclass(frozen=True)
class RouletteWheel:
    scaling: ShiftToPositive | LinearScaling | None = None


@dataclass(frozen=True)
class Tournament:
    size: int = 2


@dataclass(frozen=True)
class UniformSelection:
    pass


@dataclass(frozen=True)
class EachParent:
    """Every parent is a genitor once, in population order (EP reproduction)."""


@dataclass(frozen=True)
class Plus:
    pass


@dataclass(frozen=True)
class Comma:
    pass


@dataclass(frozen=True)
class Generational:
    pass


@dataclass(frozen=True)
class SteadyState:
    pass


@dataclass(frozen=True)
class EpStochasticPlus:
    q: int = 10


# --------------------------------------------------------------------------
# Scaling
# --------------------------------------------------------------------------


def _values(pop) -> np.ndarray:
    if isinstance(pop, Population):
        return pop.fitnesses()
    if len(pop) and isinstance(pop[0], Individual):
        return np.array([ind.fitness for ind in pop], dtype=float)
    return np.asarray(pop, dtype=float)


def scale_fitness(pop, scaling) -> np.ndarray:
    """Scaled copy of the population's fitness values.

    ``pop`` may be a :class:`Population`, a list of individuals or a plain
    array of fitnesses.  Under :class:`LinearScaling` a population with a
    single fitness value gets uniform weights, and negative inputs are first
    shifted to start at zero.
    """
    f = _values(pop)
    if scaling is None:
        return f.copy()
    if isinstance(scaling, ShiftToPositive):
        return f - f.min() + scaling.epsilon
    if isinstance(scaling, LinearScaling):
        if f.min() < 0:
            f = f - f.min()
        mean, top = f.mean(), f.max()
        if top - mean <= 0 or mean <= 0:
            return np.ones_like(f)
        a = (scaling.pressure - 1.0) * mean / (top - mean)
        b = mean * (1.0 - a)
        return np.maximum(a * f + b, 0.0)
    raise TypeError(f"unknown scaling {scaling!r}")


# --------------------------------------------------------------------------
# Selection
# --------------------------------------------------------------------------


def roulette_indices(weights: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0) or not np.all(np.isfinite(weights)):
        raise ValueError("roulette selection needs finite non-negative fitnesses (use scaling)")
    total = weights.sum()
    if not total > 0:
        raise ValueError("roulette selection needs a positive fitness sum")
    return rng.choice(weights.size, size=k, p=weights / total)


def tournament_indices(fitness: np.ndarray, size: int, k: int, rng: np.random.Generator) -> np.ndarray:
    fitness = np.asarray(fitness, dtype=float)
    mu = fitness.size
    if not 1 <= size <= mu:
        raise ValueError(f"tournament size {size} must lie in 1..{mu}")
    out = np.empty(k, dtype=np.int64)
    for d in range(k):
        entrants = np.sort(rng.choice(mu, size=size, replace=False))
        # argmax returns the first maximum, i.e. the lowest population index
        out[d] = entrants[np.argmax(fitness[entrants])]
    return out


def roulette_select(pop, k: int, scaling, rng: np.random.Generator, fitness=None) -> list[Individual]:
    """Fitness-proportional draws with repetition.

    ``fitness`` overrides the members' own fitness values (e.g. shared
    fitness); scaling is applied to whichever values are used.
    """
    members = list(pop)
    values = _values(members) if fitness is None else np.asarray(fitness, dtype=float)
    idx = roulette_indices(scale_fitness(values, scaling), k, rng)
    return [members[i] for i in idx]


def tournament_select(pop, size: int, k: int, rng: np.random.Generator, fitness=None) -> list[Individual]:
    """Best of ``size`` distinct uniformly chosen members, ``k`` times."""
    members = list(pop)
    values = _values(members) if fitness is None else np.asarray(fitness, dtype=float)
    return [members[i] for i in tournament_indices(values, size, k, rng)]


def uniform_select(pop, k: int, rng: np.random.Generator) -> list[Individual]:
    members = list(pop)
    return [members[i] for i in rng.integers(0, len(members), size=k)]


def select_indices(spec, fitness: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Genitor indices for ``spec`` given (possibly shared) fitness values."""
    mu = len(fitness)
    if isinstance(spec, RouletteWheel):
        return roulette_indices(scale_fitness(fitness, spec.scaling), k, rng)
    if isinstance(spec, Tournament):
        return tournament_indices(fitness, spec.size, k, rng)
    if isinstance(spec, UniformSelection):
        return rng.integers(0, mu, size=k)
    if isinstance(spec, EachParent):
        return np.arange(k) % mu
    raise TypeError(f"unknown selection spec {spec!r}")


# --------------------------------------------------------------------------
# Replacement
# --------------------------------------------------------------------------


def _rank_key(fitness: float, offspring: bool, index: int):
    return (-fitness, 0 if offspring else 1, index)


def plus_replacement(parents: Sequence[Individual], offspring: Sequence[Individual], mu: int) -> list[Individual]:
    """(mu + lambda): the mu fittest of parents and offspring, best first."""
    pool = [(_rank_key(o.fitness, True, i), o) for i, o in enumerate(offspring)]
    pool += [(_rank_key(p.fitness, False, i), p) for i, p in enumerate(parents)]
    pool.sort(key=lambda t: t[0])
    return [ind for _, ind in pool[:mu]]


def comma_replacement(offspring: Sequence[Individual], mu: int) -> list[Individual]:
    """(mu, lambda): the mu fittest offspring, best first; parents are discarded."""
    if len(offspring) < mu:
        raise ValueError(f"comma replacement needs lambda >= mu ({len(offspring)} < {mu})")
    order = sorted(range(len(offspring)), key=lambda i: (-offspring[i].fitness, i))
    return [offspring[i] for i in order[:mu]]


def apply_elitism(parents: Sequence[Individual], survivors: Sequence[Individual], count: int) -> list[Individual]:
    """Re-admit up to ``count`` best parents in place of the worst survivors.

    An elite parent comes back only if it ranks among the ``count`` best of
    elite parents plus survivors (survivors win ties), so nothing changes when
    the survivors already hold individuals at least as good.
    """
    out = list(survivors)
    if count <= 0 or not parents:
        return out
    elite_order = sorted(range(len(parents)), key=lambda i: (-parents[i].fitness, i))[:count]
    pool = [(_rank_key(parents[i].fitness, False, i), ("p", i)) for i in elite_order]
    pool += [(_rank_key(s.fitness, True, i), ("s", i)) for i, s in enumerate(out)]
    pool.sort(key=lambda t: t[0])
    returning = [parents[tag[1]] for _, tag in pool[:count] if tag[0] == "p"]
    if not returning:
        return out
    # worst survivors first; among equals the later index goes first
    worst = sorted(range(len(out)), key=lambda i: (out[i].fitness, -i))[: len(returning)]
    for slot, elite in zip(sorted(worst), returning):
        out[slot] = elite
    return out


def generational_replacement(
    parents: Sequence[Individual], offspring: Sequence[Individual], elitism_count: int = 0
) -> list[Individual]:
    """All offspring replace all parents, optionally keeping elite parents."""
    if len(offspring) != len(parents):
        raise ValueError("generational replacement needs lambda == mu")
    return apply_elitism(parents, offspring, elitism_count)


def steady_state_replace(pop: Sequence[Individual], child: Individual) -> list[Individual]:
    """Replace the worst member by ``child`` when the child is at least as fit."""
    out = list(pop)
    worst = min(range(len(out)), key=lambda i: (out[i].fitness, -i))
    if child.fitness >= out[worst].fitness:
        out[worst] = child
    return out


def ep_stochastic_plus(
    parents: Sequence[Individual], offspring: Sequence[Individual], q: int, rng: np.random.Generator
) -> list[Individual]:
    """Stochastic (mu + mu) tournament replacement.

    Each of the 2*mu candidates meets ``q`` opponents drawn with replacement
    from the other candidates and scores a win whenever its fitness is at
    least the opponent's.  The mu highest scores survive (ties: higher
    fitness, then offspring, then lower index), best first.
    """
    mu = len(parents)
    if mu == 0:
        raise ValueError("EP replacement needs at least one parent")
    if q < 1:
        raise ValueError("EP opponent count q must be >= 1")
    cands = list(parents) + list(offspring)
    n = len(cands)
    f = np.array([c.fitness for c in cands], dtype=float)
    draws = rng.integers(0, n - 1, size=(n, q))
    draws += draws >= np.arange(n)[:, None]
    wins = (f[:, None] >= f[draws]).sum(axis=1)
    order = sorted(
        range(n),
        key=lambda i: (-wins[i], -f[i], 0 if i >= mu else 1, i - mu if i >= mu else i),
    )
    return [cands[i] for i in order[:mu]]
