"""Command-line front end: ``run``, ``compare`` and ``sweep``.

Exit codes: 0 success, 2 configuration or usage error, 3 runtime failure.

Example experiment file::

    [problem]
    name = "onemax"
    length = 20

    [dialect]
    preset = "GA"

    [termination]
    max_generations = 100
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import itertools
import json
import re
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from . import problems as P
from .analysis import (
    RunSummary,
    SharingSpec,
    detect_premature_convergence,
    fmt,
    run_batch,
    significance,
    welch_t_test,
)
from .core import ConfigError, EaConfig, RunTrace, Termination, validate_config
from .genotypes import PrimitiveSet
from .presets import PRESETS
from .selection import (
    Comma,
    EachParent,
    EpStochasticPlus,
    Generational,
    LinearScaling,
    Plus,
    RouletteWheel,
    ShiftToPositive,
    SteadyState,
    Tournament,
    UniformSelection,
)
from .variation import (
    BitFlipMutation,
    CrossoverSpec,
    GaussianMutation,
    LocalSearchSpec,
    SelfAdaptiveMutation,
    SubtreeMutation,
    SwapMutation,
)

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3
TRACE_COLUMNS = ["generation", "evaluations", "best_fitness", "mean_fitness", "diversity", "mean_sigma"]
DEFAULT_GRID_CAP = 256

INT, FLOAT, STR, BOOL, FLOATS = "integer", "number", "string", "boolean", "list of numbers"

SCHEMA: dict[str, dict[str, str]] = {
    "problem": {
        "name": STR, "length": INT, "dimension": INT, "init_low": FLOAT, "init_high": FLOAT,
        "low": FLOAT, "high": FLOAT, "data": STR, "matrix": STR, "max_depth": INT,
        "init_depth_min": INT, "init_depth_max": INT, "constants": FLOATS,
    },
    "dialect": {
        "preset": STR, "mu": INT, "lambda": INT, "p_c": FLOAT, "p_m": FLOAT, "replacement": STR,
        "elitism": INT, "mode": STR, "crossover": STR, "sigma0": FLOAT, "q": INT, "max_depth": INT,
        "tournament_size": INT, "p_mutation": FLOAT,
    },
    "engine": {
        "mu": INT, "lambda": INT, "selection": STR, "tournament_size": INT, "scaling": STR,
        "epsilon": FLOAT, "pressure": FLOAT, "replacement": STR, "q": INT, "crossover": STR,
        "p_c": FLOAT, "mutation": STR, "p_m": FLOAT, "sigma": FLOAT, "tau": FLOAT, "tau_prime": FLOAT,
        "sigma_floor": FLOAT, "sigma0": FLOAT, "swaps": INT, "p_mutation": FLOAT, "max_depth": INT,
        "elitism": INT, "local_search_budget": INT, "local_search_step": FLOAT,
    },
    "termination": {
        "max_generations": INT, "max_evaluations": INT, "target": FLOAT, "no_improvement": INT,
        "wall_clock": FLOAT,
    },
    "analysis": {
        "runs": INT, "base_seed": INT, "diversity_threshold": FLOAT, "sharing": BOOL,
        "sigma_share": FLOAT, "alpha": FLOAT, "report": STR, "workers": INT,
    },
}


class ConfigFileError(ValueError):
    """A diagnostic about an experiment or grid file."""


@dataclass
class ExperimentConfig:
    problem: P.Problem
    ea: EaConfig
    dialect: str | None
    runs: int = 20
    base_seed: int = 0
    diversity_threshold: float | None = None
    report_style: str = "optimization"
    workers: int = 1
    data: dict = field(default_factory=dict, repr=False)


# --------------------------------------------------------------------------
# Parsing
# --------------------------------------------------------------------------


def _key_line(text: str, section: str, key: str | None = None) -> int | None:
    current = None
    for n, line in enumerate(text.splitlines(), 1):
        m = re.match(r"\s*\[\s*([^\]\s]+)\s*\]", line)
        if m:
            current = m.group(1)
            if key is None and current == section:
                return n
            continue
        if key is not None and current == section and re.match(rf"\s*\"?{re.escape(key)}\"?\s*=", line):
            return n
    return None


def _where(text: str, section: str, key: str | None = None) -> str:
    line = _key_line(text, section, key)
    return f" (line {line})" if line else ""


def _check_types(data: dict, text: str) -> None:
    for section, table in data.items():
        if section not in SCHEMA:
            raise ConfigFileError(f"unknown section [{section}]{_where(text, section)}")
        if not isinstance(table, dict):
            raise ConfigFileError(f"[{section}] must be a table")
        for key, value in table.items():
            expected = SCHEMA[section].get(key)
            if expected is None:
                raise ConfigFileError(f"unknown key '{key}' in [{section}]{_where(text, section, key)}")
            ok = {
                INT: isinstance(value, int) and not isinstance(value, bool),
                FLOAT: isinstance(value, (int, float)) and not isinstance(value, bool),
                STR: isinstance(value, str),
                BOOL: isinstance(value, bool),
                FLOATS: isinstance(value, list)
                and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value),
            }[expected]
            if not ok:
                raise ConfigFileError(
                    f"type mismatch for '{section}.{key}'{_where(text, section, key)}: "
                    f"expected {expected}, got {type(value).__name__}"
                )


def _require(table: dict, section: str, key: str, text: str):
    if key not in table:
        raise ConfigFileError(f"missing required key '{key}' in [{section}]{_where(text, section)}")
    return table[key]


def _build_problem(table: dict, text: str, base_dir: Path) -> P.Problem:
    name = _require(table, "problem", "name", text)

    def path_of(key):
        p = Path(_require(table, "problem", key, text))
        if not p.is_absolute():
            p = base_dir / p
        if not p.exists():
            raise ConfigFileError(f"file for 'problem.{key}' not found: {p}{_where(text, 'problem', key)}")
        return p

    try:
        if name == "onemax":
            return P.onemax(_require(table, "problem", "length", text))
        if name == "sphere":
            n = _require(table, "problem", "dimension", text)
            return P.sphere(
                n,
                table.get("init_low", -5.0),
                table.get("init_high", 5.0),
                table.get("low", float("-inf")),
                table.get("high", float("inf")),
            )
        if name == "two_peaks":
            return P.two_peaks()
        if name == "symreg":
            xs, ys = P.load_dataset(path_of("data"))
            prims = PrimitiveSet.arithmetic(("x",), tuple(table.get("constants", [1.0])))
            depth = (table.get("init_depth_min", 2), table.get("init_depth_max", 6))
            return P.symbolic_regression(xs, ys, prims, table.get("max_depth", 17), depth)
        if name == "tour":
            return P.tour(P.load_distance_matrix(path_of("matrix")))
    except ConfigFileError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigFileError(f"invalid [problem]{_where(text, 'problem')}: {exc}") from exc
    raise ConfigFileError(
        f"unknown problem '{name}'{_where(text, 'problem', 'name')}; "
        "expected onemax, sphere, two_peaks, symreg or tour"
    )


def _build_termination(table: dict, problem: P.Problem) -> Termination:
    target = table.get("target")
    return Termination(
        max_evaluations=table.get("max_evaluations"),
        max_generations=table.get("max_generations"),
        target_fitness=None if target is None else problem.to_fitness(target),
        no_improvement=table.get("no_improvement"),
        wall_clock=table.get("wall_clock"),
    )


def _preset_config(table: dict, problem: P.Problem, term: Termination, text: str) -> tuple[str, EaConfig]:
    name = str(_require(table, "dialect", "preset", text)).upper()
    if name not in PRESETS:
        raise ConfigFileError(f"unknown preset '{table['preset']}'{_where(text, 'dialect', 'preset')}")
    kind, factory = PRESETS[name]
    if problem.kind != kind:
        raise ConfigFileError(
            f"constraint violation{_where(text, 'dialect', 'preset')}: "
            f"{name} works on {kind} genotypes but problem '{problem.name}' uses {problem.kind}"
        )
    allowed = {
        "GA": {"mu": "mu", "p_c": "p_c", "p_m": "p_m", "replacement": "replacement", "elitism": "elitism_count"},
        "ES": {"mu": "mu", "lambda": "lam", "mode": "mode", "crossover": "crossover", "sigma0": "sigma0"},
        "EP": {"mu": "mu", "q": "q", "sigma0": "sigma0"},
        "GP": {"mu": "mu", "p_c": "p_c", "max_depth": "max_depth", "tournament_size": "tournament_size",
               "p_mutation": "p_mutation"},
    }[name]
    kwargs = {}
    for key, value in table.items():
        if key == "preset":
            continue
        if key not in allowed:
            raise ConfigFileError(f"unknown key '{key}' for preset {name}{_where(text, 'dialect', key)}")
        kwargs[allowed[key]] = value
    if name == "GA":
        args = (problem.space.length,)
    elif name in ("ES", "EP"):
        args = (problem.space.dimension,)
    else:
        args = (problem.space.primitives,)
    try:
        return name, factory(*args, termination=term, **kwargs)
    except ValueError as exc:
        raise ConfigFileError(f"constraint violation in [dialect]{_where(text, 'dialect')}: {exc}") from exc


def _engine_config(table: dict, term: Termination, text: str) -> EaConfig:
    def where(key=None):
        return _where(text, "engine", key)

    mu = _require(table, "engine", "mu", text)
    lam = table.get("lambda", mu)

    sel = table.get("selection", "tournament")
    scaling_name = table.get("scaling", "shift")
    scalings = {
        "none": lambda: None,
        "shift": lambda: ShiftToPositive(table.get("epsilon", 1.0)),
        "linear": lambda: LinearScaling(table.get("pressure", 2.0)),
    }
    selections = {
        "roulette": lambda: RouletteWheel(scalings[scaling_name]()),
        "tournament": lambda: Tournament(table.get("tournament_size", 2)),
        "uniform": UniformSelection,
        "each": EachParent,
    }
    replacements = {
        "plus": Plus, "comma": Comma, "generational": Generational, "steady-state": SteadyState,
        "ep": lambda: EpStochasticPlus(table.get("q", 10)),
    }
    mutations = {
        "bitflip": lambda: BitFlipMutation(_require(table, "engine", "p_m", text)),
        "gaussian": lambda: GaussianMutation(_require(table, "engine", "sigma", text)),
        "self_adaptive": lambda: SelfAdaptiveMutation(
            table.get("tau"), table.get("tau_prime"), table.get("sigma_floor", 1e-10), table.get("sigma0")
        ),
        "swap": lambda: SwapMutation(table.get("swaps", 1)),
        "subtree": lambda: SubtreeMutation(table.get("p_mutation", 0.1), table.get("max_depth")),
    }
    for key, options in (("selection", selections), ("replacement", replacements), ("mutation", mutations)):
        value = table.get(key, {"selection": "tournament", "replacement": "plus"}.get(key))
        if value is None:
            raise ConfigFileError(f"missing required key '{key}' in [engine]{where()}")
        if value not in options:
            raise ConfigFileError(f"unknown {key} '{value}'{where(key)}; expected one of {sorted(options)}")
    if scaling_name not in scalings:
        raise ConfigFileError(f"unknown scaling '{scaling_name}'{where('scaling')}")
    cx_name = table.get("crossover", "none")
    if cx_name != "none" and cx_name not in ("one_point", "uniform", "arithmetic", "discrete", "order", "subtree"):
        raise ConfigFileError(f"unknown crossover '{cx_name}'{where('crossover')}")

    try:
        ls_budget = table.get("local_search_budget", 0)
        return EaConfig(
            mu=mu,
            lam=lam,
            selection=selections[sel](),
            replacement=replacements[table.get("replacement", "plus")](),
            mutation=mutations[table["mutation"]](),
            termination=term,
            crossover=None if cx_name == "none" else CrossoverSpec(cx_name, table.get("p_c", 0.7)),
            elitism_count=table.get("elitism", 0),
            local_search=LocalSearchSpec(ls_budget, table.get("local_search_step")) if ls_budget else None,
        )
    except ValueError as exc:
        raise ConfigFileError(f"constraint violation in [engine]{where()}: {exc}") from exc


def build_config(data: dict, text: str = "", base_dir: Path | str = ".") -> ExperimentConfig:
    """Validate a parsed TOML mapping into an :class:`ExperimentConfig`."""
    _check_types(data, text)
    base_dir = Path(base_dir)
    if "problem" not in data:
        raise ConfigFileError("missing required section [problem]")
    if ("dialect" in data) == ("engine" in data):
        raise ConfigFileError("exactly one of [dialect] or [engine] must be present")
    problem = _build_problem(data["problem"], text, base_dir)
    term = _build_termination(data.get("termination", {}), problem)
    try:
        term.validate()
    except ValueError as exc:
        raise ConfigFileError(f"constraint violation in [termination]{_where(text, 'termination')}: {exc}") from exc

    if "dialect" in data:
        dialect, ea = _preset_config(data["dialect"], problem, term, text)
        section = "dialect"
    else:
        dialect, ea = None, _engine_config(data["engine"], term, text)
        section = "engine"

    analysis = data.get("analysis", {})
    if analysis.get("sharing", False):
        try:
            sharing = SharingSpec(analysis.get("sigma_share", 0.5), analysis.get("alpha", 1.0))
        except ValueError as exc:
            raise ConfigFileError(f"constraint violation in [analysis]{_where(text, 'analysis')}: {exc}") from exc
        ea = replace(ea, fitness_sharing=sharing)
    runs = analysis.get("runs", 20)
    base_seed = analysis.get("base_seed", 0)
    style = analysis.get("report", "optimization")
    if runs < 1:
        raise ConfigFileError(f"'analysis.runs' must be >= 1{_where(text, 'analysis', 'runs')}")
    if not 0 <= base_seed < 2**64:
        raise ConfigFileError(f"'analysis.base_seed' must be a 64-bit unsigned integer{_where(text, 'analysis', 'base_seed')}")
    if style not in ("optimization", "design"):
        raise ConfigFileError(f"'analysis.report' must be 'optimization' or 'design'{_where(text, 'analysis', 'report')}")
    threshold = analysis.get("diversity_threshold")
    if threshold is not None and threshold < 0:
        raise ConfigFileError(f"'analysis.diversity_threshold' must be >= 0{_where(text, 'analysis', 'diversity_threshold')}")

    ea = replace(ea, seed=base_seed)
    try:
        validate_config(ea, problem)
    except ConfigError as exc:
        where = _where(text, "termination") if "termination" in str(exc) else _where(text, section)
        raise ConfigFileError(f"constraint violation{where}: {exc}") from exc
    return ExperimentConfig(
        problem=problem,
        ea=ea,
        dialect=dialect,
        runs=runs,
        base_seed=base_seed,
        diversity_threshold=threshold,
        report_style=style,
        workers=analysis.get("workers", 1),
        data=data,
    )


def parse_config(text: str, base_dir: Path | str = ".") -> ExperimentConfig:
    """Parse and validate experiment TOML; raises :class:`ConfigFileError`."""
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigFileError(f"malformed TOML: {exc}") from exc
    return build_config(data, text, base_dir)


def load_config(path: Path | str) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigFileError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    try:
        return parse_config(text, path.parent)
    except ConfigFileError as exc:
        raise ConfigFileError(f"{path}: {exc}") from exc


# --------------------------------------------------------------------------
# Output files
# --------------------------------------------------------------------------


def trace_csv(trace: RunTrace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for r in trace.rows:
        w.writerow([
            r.generation, r.evaluations, fmt(r.best_fitness), fmt(r.mean_fitness), fmt(r.diversity),
            "" if r.mean_sigma is None else fmt(r.mean_sigma),
        ])
    return buf.getvalue()


def summary_dict(summary: RunSummary, exp: ExperimentConfig) -> dict[str, Any]:
    out: dict[str, Any] = {
        "problem": exp.problem.name,
        "dialect": exp.dialect or "custom",
        "runs": summary.runs,
        "mean": summary.mean,
    }
    if summary.std is not None:
        out["std"] = summary.std
    out.update(min=summary.min, max=summary.max, success_rate=summary.success_rate, seeds=summary.seeds)
    if summary.evaluations_to_success is not None:
        out["evaluations_to_success"] = summary.evaluations_to_success
    if exp.diversity_threshold is not None:
        out["premature_convergence"] = [
            detect_premature_convergence(t, exp.diversity_threshold, exp.problem.optimum_fitness)
            for t in summary.traces
        ]
    return out


def _execute(exp: ExperimentConfig, runs: int | None = None, seed: int | None = None) -> RunSummary:
    return run_batch(
        exp.ea,
        exp.problem,
        runs=exp.runs if runs is None else runs,
        base_seed=exp.base_seed if seed is None else seed,
        workers=exp.workers,
    )


# --------------------------------------------------------------------------
# Commands
# --------------------------------------------------------------------------


def _err(msg: str) -> None:
    print(f"evocomp: {msg}", file=sys.stderr)


def cmd_run(config_path, out_dir="results", seed: int | None = None, runs: int | None = None,
            quiet: bool = False) -> int:
    try:
        exp = load_config(config_path)
        if runs is not None and runs < 1:
            raise ConfigFileError("--runs must be >= 1")
        if seed is not None and not 0 <= seed < 2**64:
            raise ConfigFileError("--seed must be a 64-bit unsigned integer")
    except ConfigFileError as exc:
        _err(str(exc))
        return EXIT_CONFIG

    try:
        summary = _execute(exp, runs, seed)
    except Exception as exc:
        _err(f"runtime failure: {exc}")
        return EXIT_RUNTIME

    out = Path(out_dir)
    written: list[Path] = []
    created = not out.exists()
    try:
        out.mkdir(parents=True, exist_ok=True)
        for i, trace in enumerate(summary.traces):
            path = out / f"run_{i:03d}.csv"
            path.write_text(trace_csv(trace))
            written.append(path)
        path = out / "summary.json"
        path.write_text(json.dumps(summary_dict(summary, exp), indent=2) + "\n")
        written.append(path)
    except OSError as exc:
        for p in written:
            p.unlink(missing_ok=True)
        if created and out.exists() and not any(out.iterdir()):
            out.rmdir()
        _err(f"runtime failure writing results: {exc}")
        return EXIT_RUNTIME

    if not quiet:
        for i, trace in enumerate(summary.traces):
            last = trace.rows[-1]
            print(
                f"run {i:03d} seed={trace.seed} best={fmt(trace.best.fitness)} "
                f"generations={last.generation} evaluations={last.evaluations} stop={trace.reason}"
            )
    print(f"{exp.problem.name} {exp.dialect or 'custom'}: {summary.report(exp.report_style)}")
    return EXIT_OK


def cmd_compare(config_a, config_b, runs: int | None = None) -> int:
    try:
        a = load_config(config_a)
        b = load_config(config_b)
        if a.data["problem"] != b.data["problem"]:
            raise ConfigFileError("configs target different problems; comparison needs the same [problem]")
        if runs is not None and runs < 2:
            raise ConfigFileError("--runs must be >= 2 for a t-test")
        for exp in (a, b):
            if runs is None and exp.runs < 2:
                raise ConfigFileError("a t-test needs at least 2 runs per config")
    except ConfigFileError as exc:
        _err(str(exc))
        return EXIT_CONFIG

    try:
        sa = _execute(a, runs)
        sb = _execute(b, runs)
    except Exception as exc:
        _err(f"runtime failure: {exc}")
        return EXIT_RUNTIME

    print(f"A {config_a}: {sa.report(a.report_style)}")
    print(f"B {config_b}: {sb.report(b.report_style)}")
    try:
        t, dof = welch_t_test(sa.best_fitnesses, sb.best_fitnesses)
        verdict = significance(t, dof)
        print(f"welch t={fmt(t)} dof={fmt(dof)}")
    except ValueError:
        # both samples constant: t is 0 when the constants agree, unbounded otherwise
        same = sa.best_fitnesses[0] == sb.best_fitnesses[0]
        t = 0.0 if same else float("inf") if sa.mean > sb.mean else float("-inf")
        verdict = {"0.05": not same, "0.01": not same}
        print(f"welch t={fmt(t)} dof=undefined (both samples have zero variance)")
    for alpha in ("0.05", "0.01"):
        print(f"alpha={alpha}: {'significant' if verdict[alpha] else 'not significant'}")
    if sa.mean > sb.mean:
        print(f"higher mean best fitness: A ({config_a})")
    elif sb.mean > sa.mean:
        print(f"higher mean best fitness: B ({config_b})")
    else:
        print("higher mean best fitness: tie")
    return EXIT_OK


def _flatten_grid(data: dict, prefix: str = "") -> dict[str, list]:
    out = {}
    for key, value in data.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            out.update(_flatten_grid(value, name + "."))
        else:
            out[name] = value
    return out


def _resolve_grid_key(key: str, data: dict) -> str:
    if "." in key:
        return key
    # bare key: the method section first, then the remaining sections
    order = [s for s in ("dialect", "engine") if s in data] + ["termination", "analysis", "problem"]
    for section in order:
        if key in SCHEMA[section]:
            return f"{section}.{key}"
    return key


def parse_grid(text: str, data: dict | None = None) -> dict[str, list]:
    """Grid TOML mapping keys to value lists.

    Keys may be dotted (``"dialect.p_m"``), nested tables, or bare names that
    resolve against the experiment's ``[dialect]``/``[engine]`` section.
    """
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigFileError(f"malformed grid TOML: {exc}") from exc
    flat = _flatten_grid(raw)
    if not flat:
        raise ConfigFileError("grid is empty")
    grid = {}
    for key, values in flat.items():
        if key.rpartition(".")[2] in ("seed", "base_seed"):
            raise ConfigFileError(f"'{key}' is not a tunable parameter (seeds cannot be swept)")
        full = _resolve_grid_key(key, data or {})
        section, _, name = full.partition(".")
        kind = SCHEMA.get(section, {}).get(name)
        if kind not in (INT, FLOAT):
            raise ConfigFileError(f"unknown or non-numeric grid key '{key}'")
        if not isinstance(values, list) or not values:
            raise ConfigFileError(f"grid key '{key}' needs a non-empty list of values")
        for v in values:
            if isinstance(v, bool) or not isinstance(v, (int, float)) or (kind == INT and not isinstance(v, int)):
                raise ConfigFileError(f"grid key '{key}' expects {kind} values, got {v!r}")
        if full in grid:
            raise ConfigFileError(f"grid key '{key}' given twice")
        grid[full] = values
    return grid


def cmd_sweep(config_path, grid_path, out_dir="results", cap: int = DEFAULT_GRID_CAP) -> int:
    try:
        base = load_config(config_path)
        try:
            grid_text = Path(grid_path).read_text()
        except OSError as exc:
            raise ConfigFileError(f"cannot read grid {grid_path}: {exc.strerror or exc}") from exc
        grid = parse_grid(grid_text, base.data)
        keys = list(grid)
        settings = list(itertools.product(*(grid[k] for k in keys)))
        if len(settings) > cap:
            raise ConfigFileError(f"grid has {len(settings)} settings, above the cap of {cap}")
        config_dir = Path(config_path).parent
        experiments = []
        for values in settings:
            data = copy.deepcopy(base.data)
            for key, value in zip(keys, values):
                section, _, name = key.partition(".")
                if section in ("termination", "analysis"):
                    data.setdefault(section, {})
                if section not in data:
                    raise ConfigFileError(f"grid key '{key}' addresses section [{section}] absent from the config")
                data[section][name] = value
            experiments.append((values, build_config(data, "", config_dir)))
    except ConfigFileError as exc:
        _err(str(exc))
        return EXIT_CONFIG

    rows = []
    try:
        for values, exp in experiments:
            s = _execute(exp)
            rows.append((values, s))
    except Exception as exc:
        _err(f"runtime failure: {exc}")
        return EXIT_RUNTIME

    rows.sort(key=lambda r: -r[1].mean)  # stable: grid order among equal means
    out = Path(out_dir)
    path = out / "sweep.csv"
    try:
        out.mkdir(parents=True, exist_ok=True)
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(keys + ["runs", "mean", "std", "min", "max", "success_rate"])
        for values, s in rows:
            w.writerow([fmt(v) for v in values] + [s.runs, fmt(s.mean), fmt(s.std), fmt(s.min), fmt(s.max),
                                                   fmt(s.success_rate)])
        path.write_text(buf.getvalue())
    except OSError as exc:
        path.unlink(missing_ok=True)
        _err(f"runtime failure writing results: {exc}")
        return EXIT_RUNTIME
    for values, s in rows:
        setting = " ".join(f"{k}={fmt(v)}" for k, v in zip(keys, values))
        print(f"{setting}: {s.report(base.report_style)}")
    return EXIT_OK


# --------------------------------------------------------------------------
# Entry point
# --------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _err(message)
        raise SystemExit(EXIT_CONFIG)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evocomp", description="Run evolutionary-computation experiments.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="batch of independent runs of one configuration")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="results")
    p.add_argument("--seed", type=int, help="base seed (overrides analysis.base_seed)")
    p.add_argument("--runs", type=int, help="number of runs (overrides analysis.runs)")
    p.add_argument("--quiet", action="store_true", help="print only the aggregate line")

    p = sub.add_parser("compare", help="compare two configurations with Welch's t-test")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--runs", type=int)

    p = sub.add_parser("sweep", help="batch runs over a parameter grid")
    p.add_argument("--config", required=True)
    p.add_argument("--grid", required=True)
    p.add_argument("--out", default="results")
    p.add_argument("--cap", type=int, default=DEFAULT_GRID_CAP, help="maximum number of grid settings")
    return parser


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_CONFIG
    if args.command == "run":
        return cmd_run(args.config, args.out, args.seed, args.runs, args.quiet)
    if args.command == "compare":
        return cmd_compare(args.a, args.b, args.runs)
    return cmd_sweep(args.config, args.grid, args.out, args.cap)


if __name__ == "__main__":
    sys.exit(main())
