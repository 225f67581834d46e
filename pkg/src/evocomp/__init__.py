"""Dialect-agnostic evolutionary computation toolkit."""

from .analysis import (
    RunSummary,
    SharingSpec,
    detect_premature_convergence,
    population_diversity,
    run_batch,
    shared_fitness,
    welch_t_test,
)
from .core import ConfigError, EaConfig, RunTrace, Termination, run, should_stop, start, step
from .genotypes import (
    BitString,
    ParseTree,
    Permutation,
    PrimitiveSet,
    RealVector,
    SelfAdaptiveRealVector,
    distance,
    sample_uniform,
)
from .population import Individual, Population
from .presets import ep_preset, es_preset, ga_preset, gp_preset
from .problems import Problem, onemax, sphere, symbolic_regression, tour, two_peaks

__version__ = "0.1.0"
