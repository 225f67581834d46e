"""Ready-made configurations for the four classic dialects: GA, ES, EP and GP.

Numeric defaults that the dialects themselves leave open (p_c = 0.7 and
p_m = 1/L for the GA; p_c = 0.9, max depth 17 and tournament size 7 for GP)
are common community conventions.
"""

from __future__ import annotations

from dataclasses import dataclass

from .core import ConfigError, EaConfig, Termination, validate_config
from .genotypes import PrimitiveSet
from .selection import (
    Comma,
    EachParent,
    EpStochasticPlus,
    Generational,
    Plus,
    RouletteWheel,
    ShiftToPositive,
    SteadyState,
    Tournament,
    UniformSelection,
)
from .variation import BitFlipMutation, CrossoverSpec, SelfAdaptiveMutation, SubtreeMutation

DEFAULT_TERMINATION = Termination(max_generations=100)


@dataclass(frozen=True)
class DialectPreset:
    name: str
    config: EaConfig
    kind: str


def _checked(config: EaConfig) -> EaConfig:
    validate_config(config)
    return config


def ga_preset(
    length: int,
    mu: int = 100,
    p_c: float = 0.7,
    p_m: float | None = None,
    replacement: str = "generational",
    elitism_count: int = 0,
    termination: Termination = DEFAULT_TERMINATION,
    seed: int = 0,
) -> EaConfig:
    """Bit-strings, one-point crossover, bit-flip mutation, roulette selection
    with shift-to-positive scaling and generational (or steady-state)
    replacement."""
    if length < 1:
        raise ConfigError("bit-string length must be >= 1")
    if p_m is None:
        p_m = 1.0 / length
    if replacement == "generational":
        rep, lam = Generational(), mu
    elif replacement == "steady-state":
        rep, lam = SteadyState(), 1
    else:
        raise ConfigError(f"GA replacement must be 'generational' or 'steady-state', not {replacement!r}")
    return _checked(
        EaConfig(
            mu=mu,
            lam=lam,
            selection=RouletteWheel(ShiftToPositive()),
            replacement=rep,
            mutation=BitFlipMutation(p_m),
            termination=termination,
            crossover=CrossoverSpec("one_point", p_c),
            elitism_count=elitism_count,
            seed=seed,
        )
    )


def es_preset(
    n: int,
    mu: int = 15,
    lam: int = 100,
    mode: str = "comma",
    crossover: str = "none",
    termination: Termination = DEFAULT_TERMINATION,
    sigma0: float | None = None,
    seed: int = 0,
) -> EaConfig:
    """Self-adaptive real vectors, uniform genitor choice, (mu+lambda) or
    (mu,lambda) survivors; optional discrete or intermediate recombination.

    ``n`` only sanity-checks the dimension; the learning rates are derived
    from the genotype at mutation time.
    """
    if n < 1:
        raise ConfigError("dimension must be >= 1")
    if mode == "plus":
        rep = Plus()
    elif mode == "comma":
        rep = Comma()
    else:
        raise ConfigError(f"ES mode must be 'plus' or 'comma', not {mode!r}")
    cx = {
        "none": None,
        "discrete": CrossoverSpec("discrete", 1.0),
        "intermediate": CrossoverSpec("arithmetic", 1.0),
    }
    if crossover not in cx:
        raise ConfigError(f"ES crossover must be one of {sorted(cx)}, not {crossover!r}")
    return _checked(
        EaConfig(
            mu=mu,
            lam=lam,
            selection=UniformSelection(),
            replacement=rep,
            mutation=SelfAdaptiveMutation(sigma0=sigma0),
            termination=termination,
            crossover=cx[crossover],
            elitism_count=0,
            seed=seed,
        )
    )


def ep_preset(
    n: int,
    mu: int = 20,
    q: int = 10,
    termination: Termination = DEFAULT_TERMINATION,
    sigma0: float | None = None,
    seed: int = 0,
) -> EaConfig:
    """Each parent makes one self-adaptively mutated child; no crossover;
    stochastic (mu+mu) tournament replacement."""
    if n < 1:
        raise ConfigError("dimension must be >= 1")
    if mu < 1 or q < 1:
        raise ConfigError("EP needs mu >= 1 and q >= 1")
    return _checked(
        EaConfig(
            mu=mu,
            lam=mu,
            selection=EachParent(),
            replacement=EpStochasticPlus(q),
            mutation=SelfAdaptiveMutation(sigma0=sigma0),
            termination=termination,
            crossover=None,
            seed=seed,
        )
    )


def gp_preset(
    primitives: PrimitiveSet,
    mu: int = 500,
    p_c: float = 0.9,
    max_depth: int = 17,
    tournament_size: int = 7,
    p_mutation: float = 0.1,
    termination: Termination = DEFAULT_TERMINATION,
    seed: int = 0,
) -> EaConfig:
    """Parse trees, subtree crossover and mutation, tournament selection,
    generational replacement keeping the best individual.

    ``max_depth`` caps every tree the run produces; ramped initialization
    depths come from the problem's :class:`~evocomp.genotypes.TreeSpace`.
    """
    try:
        primitives.validate()
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return _checked(
        EaConfig(
            mu=mu,
            lam=mu,
            selection=Tournament(tournament_size),
            replacement=Generational(),
            mutation=SubtreeMutation(p_mutation, max_depth),
            termination=termination,
            crossover=CrossoverSpec("subtree", p_c),
            elitism_count=1,
            seed=seed,
        )
    )


PRESETS = {"GA": ("bits", ga_preset), "ES": ("real", es_preset), "EP": ("real", ep_preset), "GP": ("tree", gp_preset)}


def make_preset(name: str, *args, **kwargs) -> DialectPreset:
    """Build the named dialect (``GA``, ``ES``, ``EP`` or ``GP``)."""
    try:
        kind, factory = PRESETS[name.upper()]
    except KeyError:
        raise ConfigError(f"unknown dialect {name!r}; expected one of {sorted(PRESETS)}") from None
    return DialectPreset(name.upper(), factory(*args, **kwargs), kind)
