"""Site sets the walks live on: finite line windows and cycles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class TopologyError(ValueError):
    """Raised when two objects that must share a topology do not."""


@dataclass(frozen=True)
class Line:
    """The window ``[-half_width, half_width]`` of the integer line."""

    half_width: int

    def __post_init__(self) -> None:
        if self.half_width < 0:
            raise ValueError(f"half_width must be >= 0 (got {self.half_width})")

    @property
    def n_sites(self) -> int:
        return 2 * self.half_width + 1

    def sites(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    def index(self, x: int) -> int:
        if abs(x) > self.half_width:
            raise IndexError(f"site {x} outside window [-{self.half_width}, {self.half_width}]")
        return x + self.half_width

    def __str__(self) -> str:
        return f"line[-{self.half_width},{self.half_width}]"


@dataclass(frozen=True)
class Cycle:
    """The cycle graph on ``size`` vertices, sites labelled ``0..size-1``."""

    size: int

    def __post_init__(self) -> None:
        if self.size < 1:
            raise ValueError(f"cycle size must be >= 1 (got {self.size})")

    @property
    def n_sites(self) -> int:
        return self.size

    def sites(self) -> np.ndarray:
        return np.arange(self.size)

    def index(self, x: int) -> int:
        return x % self.size

    def __str__(self) -> str:
        return f"cycle[{self.size}]"


Topology = Line | Cycle


def require_same(first: Topology, second: Topology) -> None:
    if first != second:
        raise TopologyError(f"topology mismatch: {first} vs {second}")
