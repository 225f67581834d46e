"""Benchmark problems and the :class:`Problem` wrapper.

The engine always maximizes.  A minimization problem reports its raw cost
through :meth:`Problem.evaluate` and the negated cost through
:meth:`Problem.fitness`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Any, Callable

import numpy as np

from .genotypes import (
    BitString,
    BitStringSpace,
    ParseTree,
    Permutation,
    PermutationSpace,
    PrimitiveSet,
    RealVector,
    RealVectorSpace,
    TreeSpace,
    evaluate_tree,
)

OVERFLOW_COST = 1e15


@dataclass(frozen=True)
class Problem:
    name: str
    space: Any
    objective: Callable[[Any], float]
    direction: str = "maximize"
    known_optimum: float | None = None

    def __post_init__(self):
        if self.direction not in ("maximize", "minimize"):
            raise ValueError(f"direction must be 'maximize' or 'minimize', not {self.direction!r}")

    @property
    def kind(self) -> str:
        return self.space.kind

    def evaluate(self, genotype) -> float:
        """Raw objective value (a cost for minimization problems)."""
        return float(self.objective(genotype))

    def fitness(self, genotype) -> float:
        """Engine-internal fitness: higher is always better."""
        return self.to_fitness(self.evaluate(genotype))

    def to_fitness(self, value: float) -> float:
        return -float(value) if self.direction == "minimize" else float(value)

    def from_fitness(self, fitness: float) -> float:
        return -float(fitness) if self.direction == "minimize" else float(fitness)

    @property
    def optimum_fitness(self) -> float | None:
        return None if self.known_optimum is None else self.to_fitness(self.known_optimum)


# --------------------------------------------------------------------------
# Fitness functions
# --------------------------------------------------------------------------


def onemax_eval(g: BitString) -> int:
    return int(np.count_nonzero(g.bits))


def sphere_eval(x: RealVector) -> float:
    return float(np.dot(x.values, x.values))


def two_peaks_eval(x: RealVector) -> float:
    """Global peak 1.0 at x=1, local peak 0.8 at x=-1, both of width 0.2."""
    v = float(x.values[0])
    return max(math.exp(-((v - 1.0) ** 2) / 0.04), 0.8 * math.exp(-((v + 1.0) ** 2) / 0.04))


def symreg_eval(t: ParseTree, dataset, primitives: PrimitiveSet) -> float:
    """Mean squared error of ``t`` over ``dataset``, capped at 1e15.

    ``dataset`` is ``(inputs, targets)`` with ``inputs`` mapping each
    variable name to an array of sample values.
    """
    inputs, targets = dataset
    with np.errstate(all="ignore"):
        out = evaluate_tree(t, primitives, inputs)
        out = np.broadcast_to(np.asarray(out, dtype=float), targets.shape)
        mse = float(np.mean((out - targets) ** 2))
    if not math.isfinite(mse) or mse > OVERFLOW_COST:
        return OVERFLOW_COST
    return mse


def tour_length_eval(p: Permutation, distance_matrix: np.ndarray) -> float:
    """Length of the closed tour visiting cities in ``p`` order."""
    d = np.asarray(distance_matrix, dtype=float)
    n = len(p)
    if d.shape != (n, n):
        raise ValueError(f"distance matrix shape {d.shape} does not match tour size {n}")
    order = p.order
    return float(d[order, np.roll(order, -1)].sum())


# --------------------------------------------------------------------------
# Problem factories
# --------------------------------------------------------------------------


def onemax(length: int) -> Problem:
    return Problem("onemax", BitStringSpace(length), onemax_eval, "maximize", float(length))


def sphere(n: int, init_low: float = -5.0, init_high: float = 5.0, low: float = -math.inf,
           high: float = math.inf) -> Problem:
    """Sum of squares; hard bounds default to none, sampling box to [-5, 5]^n."""
    space = RealVectorSpace.box(n, low, high, init_low, init_high)
    return Problem("sphere", space, sphere_eval, "minimize", 0.0)


def two_peaks() -> Problem:
    space = RealVectorSpace.box(1, -2.0, 2.0)
    return Problem("two_peaks", space, two_peaks_eval, "maximize", 1.0)


def symbolic_regression(
    xs,
    ys,
    primitives: PrimitiveSet | None = None,
    max_depth: int = 17,
    init_depth: tuple[int, int] = (2, 6),
) -> Problem:
    """Fit ``y = f(x)`` on the sample points with the given primitive set."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or xs.shape != ys.shape:
        raise ValueError("dataset must be non-empty with matching x and y columns")
    if primitives is None:
        primitives = PrimitiveSet.arithmetic(("x",), (1.0,))
    if set(primitives.variables) - {"x"}:
        raise ValueError("symbolic regression datasets provide a single input variable 'x'")
    dataset = ({"x": xs}, ys)
    space = TreeSpace(primitives, max_depth, init_depth)
    objective = partial(symreg_eval, dataset=dataset, primitives=primitives)
    return Problem("symreg", space, objective, "minimize", 0.0)


def tour(distance_matrix) -> Problem:
    d = np.array(distance_matrix, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise ValueError("distance matrix must be square")
    if not np.allclose(d, d.T) or np.any(np.diag(d) != 0):
        raise ValueError("distance matrix must be symmetric with a zero diagonal")
    d.flags.writeable = False
    return Problem("tour", PermutationSpace(d.shape[0]), partial(tour_length_eval, distance_matrix=d), "minimize")


# --------------------------------------------------------------------------
# Data files
# --------------------------------------------------------------------------


def _numeric_rows(path: Path) -> list[list[float]]:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = [f for f in line.replace(",", " ").split()]
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            if not rows and lineno == 1:  # header row
                continue
            raise ValueError(f"{path}:{lineno}: non-numeric value in {line!r}") from None
    return rows


def load_dataset(path) -> tuple[np.ndarray, np.ndarray]:
    """Two-column ``x,y`` text file; a header line is optional."""
    rows = _numeric_rows(path)
    if not rows:
        raise ValueError(f"{path}: no data rows")
    if any(len(r) != 2 for r in rows):
        raise ValueError(f"{path}: every row needs exactly two columns")
    arr = np.array(rows)
    return arr[:, 0], arr[:, 1]


def load_distance_matrix(path) -> np.ndarray:
    """Square numeric matrix, one row per line (comma or whitespace separated)."""
    rows = _numeric_rows(path)
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise ValueError(f"{path}: distance matrix must be square")
    return np.array(rows)
