"""Crossover, mutation and local-search operators.

Every operator is a pure function of its inputs and an explicit
``numpy.random.Generator``; the number of draws it makes does not depend on
the outcome of earlier draws where that can be avoided, which keeps runs
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .genotypes import (
    BitString,
    ParseTree,
    Permutation,
    PrimitiveSet,
    RealVector,
    SelfAdaptiveRealVector,
    random_tree,
)
from .population import Individual

# --------------------------------------------------------------------------
# Specs
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BitFlipMutation:
    p_m: float
    kind = "bits"

    def validate(self) -> None:
        _check_prob("p_m", self.p_m)


@dataclass(frozen=True)
class GaussianMutation:
    sigma: float
    kind = "real"

    def validate(self) -> None:
        if not self.sigma >= 0:
            raise ValueError("Gaussian mutation sigma must be >= 0")


@dataclass(frozen=True)
class SelfAdaptiveMutation:
    """Lognormal step-size self-adaptation.

    ``tau`` scales the per-component draws and ``tau_prime`` the single
    global draw.  ``None`` means the dimension-dependent default
    ``tau = 1/sqrt(2n)``, ``tau_prime = 1/sqrt(2 sqrt(n))``.  ``sigma0`` sets
    the initial step sizes (``None``: 10% of the initialization width).
    """

    tau: float | None = None
    tau_prime: float | None = None
    sigma_floor: float = 1e-10
    sigma0: float | None = None
    kind = "real"

    def rates(self, n: int) -> tuple[float, float]:
        tau = 1.0 / math.sqrt(2.0 * n) if self.tau is None else self.tau
        tau_prime = 1.0 / math.sqrt(2.0 * math.sqrt(n)) if self.tau_prime is None else self.tau_prime
        return tau, tau_prime

    def validate(self) -> None:
        if self.tau is not None and not self.tau >= 0:
            raise ValueError("tau must be >= 0")
        if self.tau_prime is not None and not self.tau_prime >= 0:
            raise ValueError("tau_prime must be >= 0")
        if not self.sigma_floor > 0:
            raise ValueError("sigma_floor must be > 0")
        if self.sigma0 is not None and not self.sigma0 > 0:
            raise ValueError("sigma0 must be > 0")


@dataclass(frozen=True)
class SwapMutation:
    swaps: int = 1
    kind = "perm"

    def validate(self) -> None:
        if self.swaps < 1:
            raise ValueError("swap count must be >= 1")


@dataclass(frozen=True)
class SubtreeMutation:
    """Replace a random subtree with probability ``probability``.

    ``max_depth`` overrides the tree space's depth limit for the whole run
    (crossover included) when set.
    """

    probability: float = 0.1
    max_depth: int | None = None
    kind = "tree"

    def validate(self) -> None:
        _check_prob("subtree replacement probability", self.probability)
        if self.max_depth is not None and self.max_depth < 0:
            raise ValueError("max_depth must be >= 0")


CROSSOVER_KINDS = {
    "one_point": "bits",
    "uniform": "bits",
    "arithmetic": "real",
    "discrete": "real",
    "order": "perm",
    "subtree": "tree",
}


@dataclass(frozen=True)
class CrossoverSpec:
    operator: str
    p_c: float = 0.7

    @property
    def kind(self) -> str:
        return CROSSOVER_KINDS[self.operator]

    @property
    def two_children(self) -> bool:
        return self.operator not in ("arithmetic", "discrete")

    def validate(self) -> None:
        if self.operator not in CROSSOVER_KINDS:
            raise ValueError(f"unknown crossover operator {self.operator!r}")
        _check_prob("p_c", self.p_c)


@dataclass(frozen=True)
class LocalSearchSpec:
    """First-improvement hill climbing applied to every offspring.

    ``step`` is the Gaussian step for real vectors; ``None`` falls back to the
    genotype's own step sizes or the fixed mutation sigma.
    """

    budget: int
    step: float | None = None
    cap: int = 1000

    def validate(self) -> None:
        if self.budget < 0:
            raise ValueError("local-search budget must be >= 0")
        if self.budget > self.cap:
            raise ValueError(f"local-search budget {self.budget} exceeds cap {self.cap}")
        if self.step is not None and not self.step > 0:
            raise ValueError("local-search step must be > 0")


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


# --------------------------------------------------------------------------
# Bit-strings
# --------------------------------------------------------------------------


def bitflip_mutate(g: BitString, p_m: float, rng: np.random.Generator) -> BitString:
    flips = rng.random(len(g)) < p_m
    return BitString._wrap(g.bits ^ flips.astype(np.uint8))


def one_point_crossover(
    a: BitString, b: BitString, rng: np.random.Generator, cut: int | None = None
) -> tuple[BitString, BitString]:
    """Exchange tails after a cut point drawn uniformly from ``1..L-1``."""
    n = len(a)
    if len(b) != n:
        raise ValueError("one-point crossover needs equal-length parents")
    if n == 1:
        return a, b
    if cut is None:
        cut = int(rng.integers(1, n))
    elif not 1 <= cut <= n - 1:
        raise ValueError("cut must lie in 1..L-1")
    c1 = np.concatenate([a.bits[:cut], b.bits[cut:]])
    c2 = np.concatenate([b.bits[:cut], a.bits[cut:]])
    return BitString._wrap(c1), BitString._wrap(c2)


def uniform_crossover(a: BitString, b: BitString, rng: np.random.Generator) -> tuple[BitString, BitString]:
    if len(a) != len(b):
        raise ValueError("uniform crossover needs equal-length parents")
    swap = rng.random(len(a)) < 0.5
    c1 = np.where(swap, b.bits, a.bits)
    c2 = np.where(swap, a.bits, b.bits)
    return BitString._wrap(c1), BitString._wrap(c2)


# --------------------------------------------------------------------------
# Real vectors
# --------------------------------------------------------------------------


def _clip(values: np.ndarray, bounds) -> np.ndarray:
    if bounds is None:
        return values
    return np.clip(values, bounds[0], bounds[1])


def _like(template: RealVector, values: np.ndarray, sigmas: np.ndarray | None = None) -> RealVector:
    if isinstance(template, SelfAdaptiveRealVector):
        return SelfAdaptiveRealVector._wrap(values, template.bounds, template.sigmas if sigmas is None else sigmas)
    return RealVector._wrap(values, template.bounds)


def gaussian_mutate(x: RealVector, sigma: float, rng: np.random.Generator) -> RealVector:
    """Add independent N(0, sigma^2) noise to every component, then clip."""
    noise = rng.standard_normal(len(x))
    return _like(x, _clip(x.values + sigma * noise, x.bounds))


def self_adaptive_mutate(
    g: SelfAdaptiveRealVector,
    tau: float,
    tau_prime: float,
    sigma_floor: float,
    rng: np.random.Generator,
) -> SelfAdaptiveRealVector:
    """Mutate the step sizes first, then the values with the new step sizes.

    ``sigma_i' = max(sigma_floor, sigma_i * exp(tau_prime * N + tau * N_i))``
    with one global draw ``N`` shared by all components.
    """
    n = len(g)
    global_draw = rng.standard_normal()
    local_draws = rng.standard_normal(n)
    sigmas = g.sigmas * np.exp(tau_prime * global_draw + tau * local_draws)
    sigmas = np.maximum(sigmas, sigma_floor)
    values = _clip(g.values + sigmas * rng.standard_normal(n), g.bounds)
    return SelfAdaptiveRealVector._wrap(values, g.bounds, sigmas)


def arithmetic_crossover(
    a: RealVector, b: RealVector, rng: np.random.Generator, alpha: np.ndarray | None = None
) -> RealVector:
    """Per-component convex combination with weights drawn uniformly in [0, 1].

    Step sizes of self-adaptive parents are blended with the same weights.
    """
    if len(a) != len(b):
        raise ValueError("arithmetic crossover needs equal dimensions")
    if alpha is None:
        alpha = rng.random(len(a))
    alpha = np.asarray(alpha, dtype=float)
    values = alpha * a.values + (1.0 - alpha) * b.values
    # rounding can push a blend a hair outside [min, max]
    values = np.clip(values, np.minimum(a.values, b.values), np.maximum(a.values, b.values))
    sigmas = None
    if isinstance(a, SelfAdaptiveRealVector) and isinstance(b, SelfAdaptiveRealVector):
        sigmas = alpha * a.sigmas + (1.0 - alpha) * b.sigmas
    return _like(a, values, sigmas)


def discrete_recombination(a: RealVector, b: RealVector, rng: np.random.Generator) -> RealVector:
    """Copy each component (with its step size, if any) from a random parent."""
    if len(a) != len(b):
        raise ValueError("discrete recombination needs equal dimensions")
    from_a = rng.random(len(a)) < 0.5
    values = np.where(from_a, a.values, b.values)
    sigmas = None
    if isinstance(a, SelfAdaptiveRealVector) and isinstance(b, SelfAdaptiveRealVector):
        sigmas = np.where(from_a, a.sigmas, b.sigmas)
    return _like(a, values, sigmas)


# --------------------------------------------------------------------------
# Permutations
# --------------------------------------------------------------------------


def swap_mutate(p: Permutation, swaps: int, rng: np.random.Generator) -> Permutation:
    """Exchange two distinct uniformly chosen positions, ``swaps`` times."""
    n = len(p)
    if n < 2:
        raise ValueError("swap mutation needs at least two elements")
    order = p.order.copy()
    for _ in range(swaps):
        i = int(rng.integers(n))
        j = int(rng.integers(n - 1))
        if j >= i:
            j += 1
        order[i], order[j] = order[j], order[i]
    return Permutation._wrap(order)


def _ox_child(a: np.ndarray, b: np.ndarray, i: int, j: int) -> np.ndarray:
    n = a.size
    child = np.empty_like(a)
    child[i:j] = a[i:j]
    taken = set(a[i:j].tolist())
    fill = [b[(j + k) % n] for k in range(n) if b[(j + k) % n] not in taken]
    for k, v in enumerate(fill):
        child[(j + k) % n] = v
    return child


def order_crossover(
    a: Permutation, b: Permutation, rng: np.random.Generator, segment: tuple[int, int] | None = None
) -> tuple[Permutation, Permutation]:
    """OX: keep a segment of one parent, fill the rest in the other's order."""
    n = len(a)
    if len(b) != n:
        raise ValueError("order crossover needs equal-size parents")
    if segment is None:
        if n < 2:
            return a, b
        i, j = sorted(int(v) for v in rng.choice(n + 1, size=2, replace=False))
    else:
        i, j = segment
        if not 0 <= i <= j <= n:
            raise ValueError("segment must satisfy 0 <= i <= j <= n")
    return (
        Permutation._wrap(_ox_child(a.order, b.order, i, j)),
        Permutation._wrap(_ox_child(b.order, a.order, i, j)),
    )


# --------------------------------------------------------------------------
# Parse trees
# --------------------------------------------------------------------------


def subtree_crossover(
    a: ParseTree, b: ParseTree, max_depth: int, rng: np.random.Generator
) -> tuple[ParseTree, ParseTree]:
    """Swap uniformly chosen subtrees.

    A child deeper than ``max_depth`` is replaced by its parent unchanged.
    Identical parents are returned as they are (the draws are still made).
    """
    nodes_a = a.nodes()
    nodes_b = b.nodes()
    pa, sa = nodes_a[int(rng.integers(len(nodes_a)))]
    pb, sb = nodes_b[int(rng.integers(len(nodes_b)))]
    if a == b:
        return a, b
    c1 = a.replace(pa, sb)
    c2 = b.replace(pb, sa)
    if c1.depth > max_depth:
        c1 = a
    if c2.depth > max_depth:
        c2 = b
    return c1, c2


def subtree_mutate(
    a: ParseTree, primitives: PrimitiveSet, max_depth: int, rng: np.random.Generator
) -> ParseTree:
    """Replace a uniformly chosen node by a fresh grow-method subtree."""
    nodes = a.nodes()
    path, _ = nodes[int(rng.integers(len(nodes)))]
    budget = max(max_depth - len(path), 0)
    return a.replace(path, random_tree(primitives, budget, "grow", rng))


# --------------------------------------------------------------------------
# Dispatch used by the engine
# --------------------------------------------------------------------------


def mutate(g, spec, rng: np.random.Generator, space=None):
    """Apply the mutation described by ``spec`` to genotype ``g``."""
    if isinstance(spec, BitFlipMutation):
        return bitflip_mutate(g, spec.p_m, rng)
    if isinstance(spec, GaussianMutation):
        return gaussian_mutate(g, spec.sigma, rng)
    if isinstance(spec, SelfAdaptiveMutation):
        tau, tau_prime = spec.rates(len(g))
        return self_adaptive_mutate(g, tau, tau_prime, spec.sigma_floor, rng)
    if isinstance(spec, SwapMutation):
        return swap_mutate(g, spec.swaps, rng)
    if isinstance(spec, SubtreeMutation):
        if rng.random() < spec.probability:
            return subtree_mutate(g, space.primitives, space.max_depth, rng)
        return g
    raise TypeError(f"unsupported mutation spec {spec!r}")


def recombine(a, b, spec: CrossoverSpec, rng: np.random.Generator, space=None) -> list:
    """Apply the crossover operator named by ``spec`` (ignoring ``p_c``)."""
    op = spec.operator
    if op == "one_point":
        return list(one_point_crossover(a, b, rng))
    if op == "uniform":
        return list(uniform_crossover(a, b, rng))
    if op == "arithmetic":
        return [arithmetic_crossover(a, b, rng)]
    if op == "discrete":
        return [discrete_recombination(a, b, rng)]
    if op == "order":
        return list(order_crossover(a, b, rng))
    if op == "subtree":
        return list(subtree_crossover(a, b, space.max_depth, rng))
    raise ValueError(f"unknown crossover operator {op!r}")


# --------------------------------------------------------------------------
# Local search
# --------------------------------------------------------------------------


def local_search(
    ind: Individual,
    problem,
    budget: int,
    rng: np.random.Generator,
    step: float | None = None,
    space=None,
) -> tuple[Individual, int]:
    """First-improvement hill climbing from an evaluated individual.

    Each trial applies the genotype's elementary move (single bit flip,
    single-component Gaussian step, one swap, one subtree replacement) and is
    accepted only if strictly fitter.  Bit-strings are swept position by
    position from a random offset and stop once a full sweep brings no
    improvement.  Returns the result and the number of evaluations consumed
    (never more than ``budget``).
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if budget == 0:
        return ind, 0
    g = ind.genotype
    best_g, best_f = g, ind.fitness
    used = 0

    if isinstance(g, BitString):
        n = len(g)
        pos = int(rng.integers(n))
        stale = 0
        while used < budget and stale < n:
            bits = best_g.bits.copy()
            bits[pos] ^= 1
            cand = BitString._wrap(bits)
            f = problem.fitness(cand)
            used += 1
            if f > best_f:
                best_g, best_f, stale = cand, f, 0
            else:
                stale += 1
            pos = (pos + 1) % n
    else:
        for _ in range(budget):
            cand = _elementary_move(best_g, rng, step, space)
            f = problem.fitness(cand)
            used += 1
            if f > best_f:
                best_g, best_f = cand, f

    if best_g is g:
        return ind, used
    return Individual(best_g, best_f, ind.birth_generation, ind.is_offspring), used


def _elementary_move(g, rng, step, space):
    if isinstance(g, RealVector):
        i = int(rng.integers(len(g)))
        if step is not None:
            s = step
        elif isinstance(g, SelfAdaptiveRealVector):
            s = g.sigmas[i]
        else:
            raise ValueError("local search on real vectors needs a step size")
        values = g.values.copy()
        values[i] += s * rng.standard_normal()
        return _like(g, _clip(values, g.bounds))
    if isinstance(g, Permutation):
        return swap_mutate(g, 1, rng)
    if isinstance(g, ParseTree):
        if space is None:
            raise ValueError("local search on trees needs the tree space")
        return subtree_mutate(g, space.primitives, space.max_depth, rng)
    raise TypeError(f"unsupported genotype {type(g).__name__}")
