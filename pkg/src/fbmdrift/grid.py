"""Uniform time grids and paths sampled on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition ``t_i = i*T/n`` of ``[0, T]``."""

    T: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise ValueError(f"n must be a positive integer, got {self.n!r}")
        if not math.isfinite(self.T) or self.T <= 0:
            raise ValueError(f"T must be positive and finite, got {self.T!r}")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "n", int(self.n))
        nodes = np.arange(self.n + 1, dtype=float) * (self.T / self.n)
        nodes[-1] = self.T
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)

    @property
    def dt(self) -> float:
        return self.T / self.n

    def __len__(self) -> int:
        return self.n + 1

    def key(self) -> tuple[float, int]:
        return (self.T, self.n)

    def refine(self, factor: int) -> "TimeGrid":
        return TimeGrid(self.T, self.n * factor)


def make_grid(T: float, n: int) -> TimeGrid:
    return TimeGrid(T, n)


@dataclass(frozen=True)
class SampledPath:
    """Real values on the nodes of a :class:`TimeGrid`."""

    grid: TimeGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.shape != (len(self.grid),):
            raise ValueError(
                f"expected {len(self.grid)} values for grid with n={self.grid.n}, "
                f"got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("sampled path contains non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def t(self) -> np.ndarray:
        return self.grid.nodes

    def __len__(self) -> int:
        return len(self.values)

    def reversed(self) -> "SampledPath":
        """Time reversal ``t -> T - t``."""
        return SampledPath(self.grid, self.values[::-1])

    def subsample(self, step: int) -> "SampledPath":
        if self.grid.n % step:
            raise ValueError(f"n={self.grid.n} is not divisible by {step}")
        return SampledPath(TimeGrid(self.grid.T, self.grid.n // step), self.values[::step])
