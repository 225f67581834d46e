"""Diversity, fitness sharing, premature-convergence detection and
multi-run statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist, pdist

from ._treedist import tree_distance_matrix, tree_pair_distance_sum
from .genotypes import BitString, ParseTree, Permutation, RealVector, distance
from .population import Individual, Population


@dataclass(frozen=True)
class SharingSpec:
    sigma_share: float
    alpha: float = 1.0

    def __post_init__(self):
        if not self.sigma_share > 0:
            raise ValueError("sigma_share must be > 0")
        if not self.alpha > 0:
            raise ValueError("sharing alpha must be > 0")


def _genotypes(pop) -> list:
    return [ind.genotype if isinstance(ind, Individual) else ind for ind in pop]


# --------------------------------------------------------------------------
# Diversity
# --------------------------------------------------------------------------


def distance_matrix(genotypes: Sequence) -> np.ndarray:
    """Full symmetric matrix of pairwise genotype distances."""
    gs = list(genotypes)
    n = len(gs)
    first = gs[0]
    if isinstance(first, BitString):
        x = np.array([g.bits for g in gs], dtype=float)
        return x @ (1.0 - x).T + (1.0 - x) @ x.T
    if isinstance(first, RealVector):
        x = np.array([g.values for g in gs])
        return cdist(x, x)
    if isinstance(first, Permutation):
        x = np.array([g.order for g in gs])
        return (x[:, None, :] != x[None, :, :]).sum(axis=2).astype(float)
    if isinstance(first, ParseTree):
        return tree_distance_matrix(gs)
    d = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            d[i, j] = d[j, i] = distance(gs[i], gs[j])
    return d


def population_diversity(pop) -> float:
    """Mean distance over all unordered pairs of members (0 for one member)."""
    gs = _genotypes(pop)
    n = len(gs)
    if n < 2:
        return 0.0
    pairs = n * (n - 1) / 2
    first = gs[0]
    if isinstance(first, BitString):
        ones = np.sum([g.bits for g in gs], axis=0, dtype=np.int64)
        return float(np.sum(ones * (n - ones)) / pairs)
    if isinstance(first, RealVector):
        return float(pdist(np.array([g.values for g in gs])).mean())
    if isinstance(first, Permutation):
        x = np.array([g.order for g in gs])
        same = 0
        for col in x.T:
            counts = np.unique(col, return_counts=True)[1]
            same += int(np.sum(counts * (counts - 1) // 2))
        return float((pairs * x.shape[1] - same) / pairs)
    if isinstance(first, ParseTree):
        # group duplicates: identical trees are at distance 0
        uniq: dict[ParseTree, int] = {}
        for g in gs:
            uniq[g] = uniq.get(g, 0) + 1
        trees = list(uniq)
        counts = [uniq[t] for t in trees]
        total = tree_pair_distance_sum(trees, counts)
        return total / pairs
    return float(np.mean([distance(gs[i], gs[j]) for i in range(n) for j in range(i + 1, n)]))


# --------------------------------------------------------------------------
# Fitness sharing
# --------------------------------------------------------------------------


def shared_fitness(pop, spec: SharingSpec, fitness=None) -> np.ndarray:
    """Divide each fitness by its niche count.

    The niche count of member i is the sum over all members j (itself
    included) of ``1 - (d_ij / sigma_share) ** alpha`` for ``d_ij <
    sigma_share``.  Fitnesses must be non-negative.
    """
    members = list(pop)
    f = (
        np.array([ind.fitness for ind in members], dtype=float)
        if fitness is None
        else np.asarray(fitness, dtype=float)
    )
    if np.any(f < 0):
        raise ValueError("fitness sharing needs non-negative fitnesses (scale first)")
    d = distance_matrix(_genotypes(members))
    sh = np.where(d < spec.sigma_share, 1.0 - (d / spec.sigma_share) ** spec.alpha, 0.0)
    return f / sh.sum(axis=1)


# --------------------------------------------------------------------------
# Premature convergence
# --------------------------------------------------------------------------


def detect_premature_convergence(trace, diversity_threshold: float, optimum: float | None = None) -> int | None:
    """Earliest generation with diversity below the threshold while the best
    fitness is still short of ``optimum`` (when one is known).

    ``trace`` is a :class:`~evocomp.core.RunTrace` or any sequence of rows
    with ``generation``, ``diversity`` and ``best_fitness`` attributes.
    """
    if diversity_threshold < 0:
        raise ValueError("diversity threshold must be >= 0")
    rows = getattr(trace, "rows", trace)
    for row in rows:
        if row.diversity < diversity_threshold:
            if optimum is not None and row.best_fitness >= optimum:
                return None
            return row.generation
    return None


# --------------------------------------------------------------------------
# Multi-run statistics
# --------------------------------------------------------------------------


@dataclass
class RunSummary:
    runs: int
    best_fitnesses: list[float]
    seeds: list[int]
    mean: float
    std: float | None
    min: float
    max: float
    success_rate: float | None = None
    evaluations_to_success: dict[str, float] | None = None
    traces: list = field(default_factory=list, repr=False)

    def report(self, style: str = "optimization") -> str:
        """One-line text summary.

        ``"design"`` leads with the best result and the spread (one excellent
        solution is what counts); ``"optimization"`` leads with mean and
        standard deviation (consistency is what counts).
        """
        std = "n/a" if self.std is None else fmt(self.std)
        if style == "design":
            parts = [f"max={fmt(self.max)}", f"min={fmt(self.min)}", f"std={std}", f"mean={fmt(self.mean)}"]
        elif style == "optimization":
            parts = [f"mean={fmt(self.mean)}", f"std={std}", f"min={fmt(self.min)}", f"max={fmt(self.max)}"]
        else:
            raise ValueError(f"unknown report style {style!r}")
        if self.success_rate is not None:
            parts.append(f"success_rate={fmt(self.success_rate)}")
        return f"runs={self.runs} " + " ".join(parts)


def fmt(x: float) -> str:
    """Nine-significant-digit text form used in every output file."""
    if x is None:
        return ""
    return format(float(x), ".9g")


def round9(x: float | None) -> float | None:
    return None if x is None else float(fmt(x))


def summarize(
    best_fitnesses: Sequence[float],
    seeds: Sequence[int] | None = None,
    target: float | None = None,
    evaluations_to_success: Sequence[float] | None = None,
    traces: list | None = None,
) -> RunSummary:
    """Aggregate per-run best fitnesses.

    Statistics are rounded to nine significant digits, the precision every
    report and file uses, so printed values equal the summary fields exactly.
    """
    vals = np.asarray(best_fitnesses, dtype=float)
    r = vals.size
    if r < 1:
        raise ValueError("need at least one run")
    std = round9(float(np.std(vals, ddof=1))) if r >= 2 else None
    success = None
    if target is not None:
        success = round9(float(np.mean(vals >= target)))
    quantiles = None
    if evaluations_to_success:
        q = np.percentile(np.asarray(evaluations_to_success, dtype=float), [25, 50, 75])
        quantiles = {"q25": round9(q[0]), "median": round9(q[1]), "q75": round9(q[2])}
    return RunSummary(
        runs=r,
        best_fitnesses=[float(v) for v in vals],
        seeds=list(seeds) if seeds is not None else list(range(r)),
        mean=round9(float(vals.mean())),
        std=std,
        min=round9(float(vals.min())),
        max=round9(float(vals.max())),
        success_rate=success,
        evaluations_to_success=quantiles,
        traces=traces or [],
    )


class RunFailure(RuntimeError):
    def __init__(self, seed: int, cause: BaseException):
        super().__init__(f"run with seed {seed} failed: {cause}")
        self.seed = seed


def run_batch(config, problem, runs: int = 20, base_seed: int | None = None,
              target: float | None = None, workers: int = 1) -> RunSummary:
    """Run ``runs`` independent repetitions with seeds ``base_seed + i``.

    ``base_seed`` defaults to ``config.seed``.  ``target`` (internal fitness
    units) defaults to the termination target, then to the problem's known
    optimum, and drives the success rate.
    """
    from .core import run, validate_config

    if runs < 1:
        raise ValueError("run count must be >= 1")
    validate_config(config, problem)
    base = config.seed if base_seed is None else base_seed
    if target is None:
        target = config.termination.target_fitness
    if target is None:
        target = problem.optimum_fitness

    traces, bests, seeds, hits = [], [], [], []
    for i in range(runs):
        seed = base + i
        try:
            trace = run(replace(config, seed=seed), problem, workers=workers)
        except Exception as exc:
            raise RunFailure(seed, exc) from exc
        traces.append(trace)
        bests.append(trace.best.fitness)
        seeds.append(seed)
        if target is not None:
            hit = trace.evaluations_to_reach(target)
            if hit is not None:
                hits.append(hit)
    return summarize(bests, seeds, target, hits, traces)


# two-sided critical values of Student's t at significance 0.05 and 0.01
T_CRITICAL: dict[float, tuple[float, float]] = {
    1: (12.706, 63.657), 2: (4.303, 9.925), 3: (3.182, 5.841), 4: (2.776, 4.604),
    5: (2.571, 4.032), 6: (2.447, 3.707), 7: (2.365, 3.499), 8: (2.306, 3.355),
    9: (2.262, 3.250), 10: (2.228, 3.169), 11: (2.201, 3.106), 12: (2.179, 3.055),
    13: (2.160, 3.012), 14: (2.145, 2.977), 15: (2.131, 2.947), 16: (2.120, 2.921),
    17: (2.110, 2.898), 18: (2.101, 2.878), 19: (2.093, 2.861), 20: (2.086, 2.845),
    21: (2.080, 2.831), 22: (2.074, 2.819), 23: (2.069, 2.807), 24: (2.064, 2.797),
    25: (2.060, 2.787), 26: (2.056, 2.779), 27: (2.052, 2.771), 28: (2.048, 2.763),
    29: (2.045, 2.756), 30: (2.042, 2.750), 40: (2.021, 2.704), 60: (2.000, 2.660),
    120: (1.980, 2.617), math.inf: (1.960, 2.576),
}


def t_critical(dof: float, alpha: float = 0.05) -> float:
    """Tabulated two-sided critical value, using the nearest tabulated dof
    not above ``dof`` (conservative for fractional Welch dof)."""
    if alpha not in (0.05, 0.01):
        raise ValueError("critical values are tabulated for alpha 0.05 and 0.01 only")
    col = 0 if alpha == 0.05 else 1
    keys = [k for k in T_CRITICAL if k <= max(dof, 1)]
    return T_CRITICAL[max(keys)][col]


def welch_t_test(sample_a: Sequence[float], sample_b: Sequence[float]) -> tuple[float, float]:
    """Welch's unequal-variance t statistic and Welch-Satterthwaite dof."""
    a = np.asarray(sample_a, dtype=float)
    b = np.asarray(sample_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise ValueError("each sample needs at least two values")
    return welch_t_from_stats(a.mean(), a.var(ddof=1), a.size, b.mean(), b.var(ddof=1), b.size)


def welch_t_from_stats(mean_a, var_a, n_a, mean_b, var_b, n_b) -> tuple[float, float]:
    """Same as :func:`welch_t_test` from sample means and (n-1) variances."""
    if n_a < 2 or n_b < 2:
        raise ValueError("each sample needs at least two values")
    if var_a == 0 and var_b == 0:
        raise ValueError("t statistic undefined: both samples have zero variance")
    sa, sb = var_a / n_a, var_b / n_b
    t = (mean_a - mean_b) / math.sqrt(sa + sb)
    dof = (sa + sb) ** 2 / (sa**2 / (n_a - 1) + sb**2 / (n_b - 1))
    return float(t), float(dof)


def significance(t: float, dof: float) -> dict[str, bool]:
    """Verdicts ``{"0.05": bool, "0.01": bool}`` for a two-sided test."""
    return {str(alpha): abs(t) > t_critical(dof, alpha) for alpha in (0.05, 0.01)}
