from dataclasses import replace

import numpy as np
import pytest

from evocomp.core import ConfigError, EaConfig, Termination, run, validate_config
from evocomp.genotypes import PrimitiveSet
from evocomp.presets import PRESETS, ep_preset, es_preset, ga_preset, gp_preset, make_preset
from evocomp.problems import onemax, sphere, symbolic_regression
from evocomp.selection import (
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
from evocomp.variation import BitFlipMutation, CrossoverSpec, SelfAdaptiveMutation, SubtreeMutation

PRIMS = PrimitiveSet.arithmetic(("x",), (1.0,))


def test_ga_defaults():
    cfg = ga_preset(50)
    assert cfg.selection == RouletteWheel(ShiftToPositive())
    assert isinstance(cfg.replacement, Generational)
    assert cfg.mutation == BitFlipMutation(0.02)
    assert cfg.crossover == CrossoverSpec("one_point", 0.7)
    assert cfg.lam == cfg.mu


def test_ga_steady_state():
    cfg = ga_preset(10, replacement="steady-state")
    assert isinstance(cfg.replacement, SteadyState) and cfg.lam == 1


def test_ga_rejects_bad_probabilities():
    with pytest.raises(ConfigError):
        ga_preset(10, p_m=1.5)
    with pytest.raises(ConfigError):
        ga_preset(10, p_c=-0.1)
    with pytest.raises(ConfigError):
        ga_preset(10, replacement="plus")


def test_es_modes():
    assert isinstance(es_preset(10, 15, 100, "comma").replacement, Comma)
    with pytest.raises(ConfigError):
        es_preset(10, 100, 15, "comma")
    cfg = es_preset(10)
    assert cfg.crossover is None and cfg.elitism_count == 0
    assert isinstance(cfg.selection, UniformSelection)
    assert isinstance(cfg.mutation, SelfAdaptiveMutation)
    assert es_preset(10, crossover="intermediate").crossover.operator == "arithmetic"
    assert es_preset(10, crossover="discrete").crossover.operator == "discrete"


def test_es_plus_is_monotone():
    cfg = es_preset(5, 5, 35, "plus", termination=Termination(max_generations=30), seed=3)
    best = [r.best_fitness for r in run(cfg, sphere(5)).rows]
    assert all(b >= a for a, b in zip(best, best[1:]))


def test_ep_preset_shape():
    cfg = ep_preset(5, mu=12, q=7)
    assert cfg.crossover is None
    assert cfg.lam == cfg.mu == 12
    assert cfg.replacement == EpStochasticPlus(7)
    assert isinstance(cfg.selection, EachParent)
    with pytest.raises(ConfigError):
        ep_preset(5, q=0)


def test_gp_preset_shape():
    cfg = gp_preset(PRIMS)
    assert cfg.selection == Tournament(7)
    assert isinstance(cfg.replacement, Generational) and cfg.elitism_count == 1
    assert cfg.crossover == CrossoverSpec("subtree", 0.9)
    assert cfg.mutation == SubtreeMutation(0.1, 17)
    with pytest.raises(ConfigError):
        gp_preset(PrimitiveSet({"+": (2, np.add)}, (), ()))


def test_gp_run_respects_max_depth():
    xs = np.linspace(-1, 1, 20)
    problem = symbolic_regression(xs, xs**4 + xs**3 + xs**2 + xs, PRIMS)
    cfg = gp_preset(PRIMS, mu=60, max_depth=8, termination=Termination(max_generations=50), seed=1)
    trace = run(cfg, problem)
    assert len(trace.rows) == 51
    assert all(ind.genotype.depth <= 8 for ind in trace.final_population)
    assert trace.best.genotype.depth <= 8


@pytest.mark.parametrize("name,args,problem", [
    ("GA", (12,), onemax(12)),
    ("ES", (3,), sphere(3)),
    ("EP", (3,), sphere(3)),
    ("GP", (PRIMS,), symbolic_regression([0.0, 1.0], [0.0, 1.0], PRIMS)),
])
def test_presets_validate_and_match_hand_built(name, args, problem):
    preset = make_preset(name.lower(), *args, termination=Termination(max_generations=5), seed=4)
    assert preset.kind == problem.kind == PRESETS[name][0]
    validate_config(preset.config, problem)
    hand = EaConfig(**{f: getattr(preset.config, f) for f in preset.config.__dataclass_fields__})
    assert run(hand, problem).rows == run(preset.config, problem).rows


def test_unknown_preset():
    with pytest.raises(ConfigError):
        make_preset("CMA", 3)


def test_plus_mode_with_generational_shape():
    # sanity: the plus engine is what the ES preset selects in plus mode
    assert isinstance(replace(es_preset(3, mode="plus"), seed=1).replacement, Plus)
