"""Individuals and populations."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterator

import numpy as np


@dataclass(slots=True)
class Individual:
    """A genotype with its cached (maximize-internal) fitness.

    ``is_offspring`` only matters to replacement tie-breaking; it is reset when
    an individual survives into the next parent population.
    """

    genotype: Any
    fitness: float | None = None
    birth_generation: int = 0
    is_offspring: bool = field(default=False, compare=False)

    def __repr__(self) -> str:
        return f"Individual({self.genotype}, fitness={self.fitness}, born={self.birth_generation})"


@dataclass
class Population:
    members: list[Individual]
    generation: int = 0

    def __len__(self) -> int:
        return len(self.members)

    def __iter__(self) -> Iterator[Individual]:
        return iter(self.members)

    def __getitem__(self, i: int) -> Individual:
        return self.members[i]

    def fitnesses(self) -> np.ndarray:
        return np.array([ind.fitness for ind in self.members], dtype=float)

    def best(self) -> Individual:
        """Highest fitness member; the first one encountered wins ties."""
        best = self.members[0]
        for ind in self.members[1:]:
            if ind.fitness > best.fitness:
                best = ind
        return best
