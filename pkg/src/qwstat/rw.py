"""
Classical nearest-neighbour random walk with site-dependent hopping.

A walker at ``x`` moves left with probability ``p_x`` and right with
``q_x = 1 - p_x``, so measures evolve as

    mu'(x) = p_{x+1} mu(x+1) + q_{x-1} mu(x-1).

A uniform measure is a fixed point exactly when ``p_{x-1} = p_{x+1}`` for all
``x``: the hopping sequence is constant on each sublattice, hence has period
1 or 2 (period 1 on odd cycles). Phase-ramp quantum walks have no such
restriction, which :func:`dichotomy_table` demonstrates row by row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coin import CoinSequence, CPhiParams, detect_period
from .state import Measure, gamma_measure, uniformity_defect
from .topology import Cycle, Line, Topology, require_same
from .transfer import build_eigenstate, eigen_residual

__all__ = [
    "HoppingSequence",
    "WitnessReport",
    "QWWitness",
    "DichotomyRow",
    "rw_step",
    "uniform_stationarity_witness",
    "dichotomy_table",
    "IRRATIONAL_PHI",
]

WITNESS_TOL = 1e-12
IRRATIONAL_PHI = math.pi * (math.sqrt(2.0) - 1.0)


@dataclass(frozen=True, eq=False)
class HoppingSequence:
    """Left-hopping probabilities ``p_x`` over the sites of a topology."""

    topology: Topology
    p: NDArray[np.float64] = field(repr=False)

    def __post_init__(self) -> None:
        p = np.array(self.p, dtype=np.float64)
        if p.shape != (self.topology.n_sites,):
            raise ValueError(f"p must have shape ({self.topology.n_sites},), got {p.shape}")
        if np.any((p < 0) | (p > 1)) or not np.all(np.isfinite(p)):
            raise ValueError("hopping probabilities must lie in [0, 1]")
        p.setflags(write=False)
        object.__setattr__(self, "p", p)

    @classmethod
    def periodic(cls, pattern: ArrayLike, topology: Topology) -> HoppingSequence:
        """Repeat ``pattern`` so that ``p_x = pattern[x mod k]``."""
        pattern = np.asarray(pattern, dtype=np.float64).reshape(-1)
        return cls(topology, pattern[np.mod(topology.sites(), len(pattern))])

    @property
    def q(self) -> NDArray[np.float64]:
        return 1.0 - self.p


def rw_step(mu: Measure, hop: HoppingSequence) -> Measure:
    """One step of the random walk; on a line window, mass from outside is zero."""
    require_same(mu.topology, hop.topology)
    to_left = hop.p * mu.values
    to_right = hop.q * mu.values
    if isinstance(mu.topology, Cycle):
        return Measure(mu.topology, np.roll(to_left, -1) + np.roll(to_right, 1))
    out = np.zeros_like(mu.values)
    out[:-1] += to_left[1:]
    out[1:] += to_right[:-1]
    return Measure(mu.topology, out, min(mu.contaminated + 1, mu.topology.half_width + 1))


@dataclass(frozen=True)
class WitnessReport:
    is_uniform_stationary: bool
    violating_site: int | None = None


def uniform_stationarity_witness(hop: HoppingSequence, tol: float = WITNESS_TOL) -> WitnessReport:
    """
    Test ``p_{x-1} = p_{x+1}`` at every site where both neighbours are known.

    On a cycle every site is tested; on a line window, sites ``-L+1..L-1``.
    When the test fails, the first offending ``x`` is reported.
    """
    p = hop.p
    if isinstance(hop.topology, Cycle):
        sites = hop.topology.sites()
        diff = np.abs(np.roll(p, 1) - np.roll(p, -1))
    else:
        sites = hop.topology.sites()[1:-1]
        diff = np.abs(p[:-2] - p[2:])
    bad = np.flatnonzero(diff > tol)
    if bad.size:
        return WitnessReport(False, int(sites[bad[0]]))
    return WitnessReport(True, None)


@dataclass(frozen=True)
class QWWitness:
    """A phase-ramp walk checked to carry a uniform stationary measure."""

    phi: float
    theta: float
    detected_period: int | None
    eigen_residual: float
    uniformity_defect: float

    def passes(self, tol: float) -> bool:
        return self.eigen_residual <= tol and self.uniformity_defect <= tol


@dataclass(frozen=True)
class DichotomyRow:
    """One column of the period table; ``period is None`` stands for "no period"."""

    period: int | None
    rw_admits_uniform: bool
    qw_admits_uniform: bool
    qw_witness: QWWitness
    rw_witness: tuple[float, ...] | None = None

    @property
    def label(self) -> str:
        return "inf" if self.period is None else str(self.period)


def _qw_witness(phi: float, theta: float, half_width: int, max_period: int) -> QWWitness:
    params = CPhiParams(theta=theta, phi=phi, omega0=0.0)
    coins = CoinSequence.cphi(params, Line(half_width))
    lam = complex(math.cos(phi), math.sin(phi))
    psi = build_eigenstate(coins, lam)
    return QWWitness(
        phi=phi,
        theta=theta,
        detected_period=detect_period(coins, max_period),
        eigen_residual=eigen_residual(psi, coins, lam),
        uniformity_defect=uniformity_defect(gamma_measure(psi)),
    )


_RW_PATTERNS = {1: (0.5,), 2: (0.3, 0.7)}


def _rw_pattern_is_stationary(pattern: tuple[float, ...]) -> bool:
    hop = HoppingSequence.periodic(pattern, Cycle(2 * len(pattern)))
    mu = Measure.constant(hop.topology, 1.0)
    return uniform_stationarity_witness(hop).is_uniform_stationary and np.allclose(
        rw_step(mu, hop).values, 1.0, rtol=0, atol=1e-14
    )


def dichotomy_table(
    max_period: int,
    *,
    theta: float = math.pi / 4,
    half_width: int = 50,
    no_period_scan: int = 1000,
    tol: float = 1e-10,
) -> list[DichotomyRow]:
    """
    Rows ``1..max_period`` plus a "no period" row comparing the two walks.

    The random-walk column follows from the sublattice argument above, with
    a checked hopping pattern attached for periods 1 and 2. Every quantum-walk
    entry is earned by a constructed phase-ramp walk with ``phi = pi/n`` (or
    ``pi (sqrt 2 - 1)`` for the last row): its coin sequence must have the
    stated period (resp. none up to ``no_period_scan``), and its
    transfer-matrix eigenstate must pass the residual and uniformity checks.
    """
    if max_period < 2:
        raise ValueError(f"max_period must be >= 2 (got {max_period})")
    rows = []
    for n in range(1, max_period + 1):
        w = _qw_witness(math.pi / n, theta, half_width, max_period)
        pattern = _RW_PATTERNS.get(n)
        rw_ok = pattern is not None and _rw_pattern_is_stationary(pattern)
        rows.append(DichotomyRow(n, rw_ok, w.detected_period == n and w.passes(tol), w, pattern))
    w = _qw_witness(IRRATIONAL_PHI, theta, half_width, no_period_scan)
    rows.append(DichotomyRow(None, False, w.detected_period is None and w.passes(tol), w))
    return rows
