"""
Split-step evolution of two-state walks.

One step sends the left chirality one site to the left and the right
chirality one site to the right after applying the local coin:

    psi'(x) = P_{x+1} psi(x+1) + Q_{x-1} psi(x-1)

On a cycle the neighbours wrap around. On a line window, amplitude that
would arrive from outside the window is taken to be zero, so after ``n``
steps only sites with ``|x| <= L - n`` are exact; the returned field records
this in ``contaminated``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from .coin import UNITARY_TOL, CoinSequence
from .errors import DomainError
from .state import SpinorField
from .topology import Cycle, Topology, TopologyError, require_same

__all__ = [
    "DENSE_MAX_SITES",
    "EvolutionOperator",
    "step",
    "iterate",
    "dense_cycle_operator",
]

DENSE_MAX_SITES = 512


@dataclass(frozen=True, eq=False)
class EvolutionOperator:
    """The one-step walk operator built from a coin sequence."""

    coins: CoinSequence
    _entries: tuple[NDArray[np.complex128], ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_entries", self.coins.entries(self.topology.sites()))

    @property
    def topology(self) -> Topology:
        return self.coins.topology

    def __call__(self, psi: SpinorField) -> SpinorField:
        return step(psi, self)


def step(psi: SpinorField, op: EvolutionOperator) -> SpinorField:
    """Apply one step of the walk to ``psi``."""
    require_same(psi.topology, op.topology)
    a, b, c, d = op._entries
    psi_l, psi_r = psi.left, psi.right
    to_left = a * psi_l + b * psi_r
    to_right = c * psi_l + d * psi_r

    out = np.empty_like(psi.amplitudes)
    if isinstance(psi.topology, Cycle):
        out[:, 0] = np.roll(to_left, -1)
        out[:, 1] = np.roll(to_right, 1)
        return SpinorField(psi.topology, out)

    out[:-1, 0] = to_left[1:]
    out[-1, 0] = 0.0
    out[1:, 1] = to_right[:-1]
    out[0, 1] = 0.0
    contaminated = min(psi.contaminated + 1, psi.topology.half_width + 1)
    return SpinorField(psi.topology, out, contaminated)


def iterate(psi: SpinorField, op: EvolutionOperator, n: int) -> SpinorField:
    """Apply ``n`` steps; ``n = 0`` returns ``psi`` unchanged."""
    if n < 0:
        raise ValueError(f"step count must be nonnegative (got {n})")
    for _ in range(n):
        psi = step(psi, op)
    return psi


def dense_cycle_operator(coins: CoinSequence) -> NDArray[np.complex128]:
    """
    Dense ``2m x 2m`` matrix of one walk step on a cycle of ``m`` sites.

    Rows and columns follow the flattening ``[L(0), R(0), L(1), R(1), ...]``
    so that ``M @ psi.flat()`` equals ``step(psi, op).flat()``. Intended as an
    oracle for small cycles only.

    Raises
    ------
    ValueError
        If the coins do not live on a cycle, or the cycle has fewer than 2 or
        more than ``DENSE_MAX_SITES`` sites.
    DomainError
        If the assembled matrix is not unitary within ``UNITARY_TOL``.
    """
    if not isinstance(coins.topology, Cycle):
        raise TopologyError("dense operator requires a cycle topology")
    m = coins.topology.size
    if m < 2:
        raise ValueError(f"dense cycle operator needs m >= 2 (got {m})")
    if m > DENSE_MAX_SITES:
        raise ValueError(f"dense cycle operator is limited to m <= {DENSE_MAX_SITES} (got {m})")

    a, b, c, d = coins.entries(np.arange(m))
    x = np.arange(m)
    nxt = (x + 1) % m
    prv = (x - 1) % m
    u = np.zeros((2 * m, 2 * m), dtype=np.complex128)
    u[2 * x, 2 * nxt] = a[nxt]
    u[2 * x, 2 * nxt + 1] = b[nxt]
    u[2 * x + 1, 2 * prv] = c[prv]
    u[2 * x + 1, 2 * prv + 1] = d[prv]

    defect = float(np.max(np.abs(u @ u.conj().T - np.eye(2 * m))))
    if defect > UNITARY_TOL:
        raise DomainError(f"cycle operator is not unitary (defect {defect:.3e})")
    return u
