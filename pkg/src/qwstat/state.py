"""Spinor fields, the measure they induce, and uniformity checks."""

from __future__ import annotations

from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .topology import Cycle, Line, Topology

__all__ = [
    "SpinorField",
    "Measure",
    "gamma_measure",
    "uniformity_defect",
    "scale",
]


def _interior(topology: Topology, contaminated: int) -> NDArray[np.int64]:
    if isinstance(topology, Cycle):
        return topology.sites()
    reach = topology.half_width - contaminated
    if reach < 0:
        return np.arange(0)
    return np.arange(-reach, reach + 1)


@dataclass(frozen=True, eq=False)
class SpinorField:
    """
    Two-component amplitudes ``(psi_L(x), psi_R(x))`` over the sites of a topology.

    ``amplitudes[i]`` belongs to ``topology.sites()[i]``. On a line window,
    ``contaminated`` counts how many sites at each end may differ from the
    untruncated walk (one more per step of truncated evolution).
    """

    topology: Topology
    amplitudes: NDArray[np.complex128] = field(repr=False)
    contaminated: int = 0

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=np.complex128)
        if amps.shape != (self.topology.n_sites, 2):
            raise ValueError(
                f"amplitudes must have shape ({self.topology.n_sites}, 2) for {self.topology}, got {amps.shape}"
            )
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def zeros(cls, topology: Topology) -> SpinorField:
        return cls(topology, np.zeros((topology.n_sites, 2), dtype=np.complex128))

    @classmethod
    def from_sites(cls, topology: Topology, values: Mapping[int, ArrayLike]) -> SpinorField:
        """Field that is zero except at the given sites."""
        amps = np.zeros((topology.n_sites, 2), dtype=np.complex128)
        for x, v in values.items():
            amps[topology.index(x)] = v
        return cls(topology, amps)

    @classmethod
    def constant(cls, topology: Topology, value: ArrayLike) -> SpinorField:
        amps = np.broadcast_to(np.asarray(value, dtype=np.complex128), (topology.n_sites, 2))
        return cls(topology, amps)

    @classmethod
    def from_flat(cls, topology: Topology, vector: ArrayLike) -> SpinorField:
        """Inverse of :meth:`flat`."""
        return cls(topology, np.asarray(vector, dtype=np.complex128).reshape(-1, 2))

    @property
    def sites(self) -> NDArray[np.int64]:
        return self.topology.sites()

    @property
    def left(self) -> NDArray[np.complex128]:
        return self.amplitudes[:, 0]

    @property
    def right(self) -> NDArray[np.complex128]:
        return self.amplitudes[:, 1]

    def at(self, x: int) -> NDArray[np.complex128]:
        return self.amplitudes[self.topology.index(x)]

    def flat(self) -> NDArray[np.complex128]:
        """Amplitudes ordered ``[L(x0), R(x0), L(x0+1), R(x0+1), ...]``."""
        return self.amplitudes.reshape(-1).copy()

    def interior_sites(self) -> NDArray[np.int64]:
        return _interior(self.topology, self.contaminated)

    def is_zero(self) -> bool:
        return not np.any(self.amplitudes)


@dataclass(frozen=True, eq=False)
class Measure:
    """Nonnegative per-site values over a topology."""

    topology: Topology
    values: NDArray[np.float64] = field(repr=False)
    contaminated: int = 0

    def __post_init__(self) -> None:
        vals = np.array(self.values, dtype=np.float64)
        if vals.shape != (self.topology.n_sites,):
            raise ValueError(f"values must have shape ({self.topology.n_sites},), got {vals.shape}")
        if np.any(vals < 0):
            raise ValueError("measure values must be nonnegative")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def constant(cls, topology: Topology, c: float) -> Measure:
        return cls(topology, np.full(topology.n_sites, float(c)))

    @property
    def sites(self) -> NDArray[np.int64]:
        return self.topology.sites()

    def at(self, x: int) -> float:
        return float(self.values[self.topology.index(x)])

    def interior_sites(self) -> NDArray[np.int64]:
        return _interior(self.topology, self.contaminated)

    def total(self) -> float:
        return float(np.sum(self.values))


def gamma_measure(psi: SpinorField) -> Measure:
    """Per-site ``|psi_L(x)|^2 + |psi_R(x)|^2``."""
    amps = psi.amplitudes
    values = amps.real**2 + amps.imag**2
    return Measure(psi.topology, values.sum(axis=1), psi.contaminated)


def uniformity_defect(mu: Measure, region: Iterable[int] | None = None) -> float:
    """
    Largest deviation of ``mu`` on ``region`` from its value at the smallest site.

    Returns 0 exactly when ``mu`` is constant on the region. ``region``
    defaults to the uncontaminated interior of the measure.

    Raises
    ------
    ValueError
        If the region is empty or leaves the topology.
    """
    sites = mu.interior_sites() if region is None else np.asarray(sorted(region), dtype=np.int64)
    if sites.size == 0:
        raise ValueError("uniformity region is empty")
    if isinstance(mu.topology, Line):
        half = mu.topology.half_width
        if sites[0] < -half or sites[-1] > half:
            raise ValueError(f"region leaves {mu.topology}")
        idx = sites + half
    else:
        if sites[0] < 0 or sites[-1] >= mu.topology.size:
            raise ValueError(f"region leaves {mu.topology}")
        idx = sites
    vals = mu.values[idx]
    return float(np.max(np.abs(vals - vals[0])))


def scale(psi: SpinorField, z: complex) -> SpinorField:
    return SpinorField(psi.topology, psi.amplitudes * complex(z), psi.contaminated)
