"""
Coin matrices for two-state walks on the line and on cycles.

A coin is a 2x2 unitary ``[[a, b], [c, d]]`` acting on the (left, right)
chirality pair at one site. The one-parameter family used throughout is

    U(theta, omega) = [[cos theta,            e^{i omega} sin theta],
                       [e^{-i omega} sin theta, -cos theta          ]]

and a *phase-ramp* sequence takes ``omega_x = omega0 + 2 phi x (mod 2 pi)``,
so that consecutive phases differ by exactly ``2 phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import DomainError
from .topology import Cycle, Line, Topology

__all__ = [
    "TWO_PI",
    "UNITARY_TOL",
    "PERIOD_TOL",
    "CoinMatrix",
    "CPhiParams",
    "CoinSequence",
    "build_coin",
    "split_coin",
    "omega_at",
    "cphi_coin_at",
    "detect_period",
]

TWO_PI = 2.0 * math.pi
UNITARY_TOL = 1e-12
PERIOD_TOL = 1e-9
EXCLUDED_THETA_TOL = 1e-12


def _unitarity_defect(m: NDArray[np.complex128]) -> float:
    """Max entrywise deviation of ``m^dagger m`` from the identity (batched)."""
    gram = np.conj(np.swapaxes(m, -1, -2)) @ m
    return float(np.max(np.abs(gram - np.eye(2))))


@dataclass(frozen=True)
class CoinMatrix:
    """A 2x2 unitary coin with row-major entries ``a, b, c, d``."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self) -> None:
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        defect = _unitarity_defect(self.matrix)
        if defect > UNITARY_TOL:
            raise DomainError(f"coin is not unitary (|U^dagger U - I|_max = {defect:.3e})")

    @classmethod
    def from_array(cls, m: ArrayLike) -> CoinMatrix:
        m = np.asarray(m, dtype=np.complex128)
        if m.shape != (2, 2):
            raise ValueError(f"coin must be 2x2, got shape {m.shape}")
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @property
    def matrix(self) -> NDArray[np.complex128]:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.complex128)


def _check_theta(theta: float) -> None:
    if not (0.0 < theta < TWO_PI):
        raise ValueError(f"theta must lie in (0, 2pi), got {theta!r}")


def build_coin(theta: float, omega: float) -> CoinMatrix:
    """
    Return the coin ``[[cos t, e^{iw} sin t], [e^{-iw} sin t, -cos t]]``.

    The result is unitary and Hermitian. ``theta = pi/2`` and ``3pi/2`` are
    accepted here; only the transfer-matrix construction has to exclude them.

    Raises
    ------
    ValueError
        If theta is outside the open interval (0, 2pi).
    """
    _check_theta(theta)
    ct, st = math.cos(theta), math.sin(theta)
    phase = complex(math.cos(omega), math.sin(omega))
    return CoinMatrix(ct, phase * st, phase.conjugate() * st, -ct)


def split_coin(coin: CoinMatrix) -> tuple[NDArray[np.complex128], NDArray[np.complex128]]:
    """Split a coin into its left-moving part ``P`` and right-moving part ``Q``.

    ``P`` keeps the first row of the coin, ``Q`` the second, so ``P + Q`` is
    the coin again with no rounding.
    """
    p = np.array([[coin.a, coin.b], [0, 0]], dtype=np.complex128)
    q = np.array([[0, 0], [coin.c, coin.d]], dtype=np.complex128)
    return p, q


@dataclass(frozen=True)
class CPhiParams:
    """
    Parameters of a phase-ramp coin sequence.

    Attributes
    ----------
    theta : float
        Mixing angle in (0, 2pi); pi/2 and 3pi/2 are rejected because the
        diagonal entries vanish there.
    phi : float
        Half the phase increment between neighbouring sites, in [0, 2pi).
    omega0 : float
        Phase at site 0, in [0, 2pi).
    """

    theta: float
    phi: float
    omega0: float = 0.0

    def __post_init__(self) -> None:
        _check_theta(self.theta)
        if abs(math.cos(self.theta)) < EXCLUDED_THETA_TOL:
            raise DomainError(f"theta = {self.theta!r} makes cos(theta) vanish (pi/2 and 3pi/2 are excluded)")
        if not (0.0 <= self.phi < TWO_PI):
            raise ValueError(f"phi must lie in [0, 2pi), got {self.phi!r}")
        if not (0.0 <= self.omega0 < TWO_PI):
            raise ValueError(f"omega0 must lie in [0, 2pi), got {self.omega0!r}")


_SPLITTER = 134217729.0  # 2**27 + 1


def _split(v: NDArray) -> tuple[NDArray, NDArray]:
    t = _SPLITTER * v
    hi = t - (t - v)
    return hi, v - hi


def _two_product(u: NDArray, v: float) -> tuple[NDArray, NDArray]:
    """``u * v`` as an unevaluated sum ``p + e`` with no rounding error (Dekker)."""
    p = u * v
    uh, ul = _split(u)
    vh, vl = _split(np.float64(v))
    e = ((uh * vh - p) + uh * vl + ul * vh) + ul * vl
    return p, e


def omega_at(params: CPhiParams, x: ArrayLike) -> NDArray[np.float64]:
    """Phase ``(omega0 + 2 phi x) mod 2pi`` evaluated directly at each site in ``x``."""
    # the product 2 phi x is formed exactly so far sites keep full precision
    p, e = _two_product(np.asarray(x, dtype=np.float64), 2.0 * params.phi)
    w = np.mod(np.mod(p, TWO_PI) + e + params.omega0, TWO_PI)
    # np.mod can round a tiny negative remainder up to exactly 2pi
    return np.where(w >= TWO_PI, 0.0, w)


def cphi_coin_at(params: CPhiParams, x: int) -> CoinMatrix:
    return build_coin(params.theta, float(omega_at(params, x)))


def _cphi_entries(params: CPhiParams, x: NDArray) -> tuple[NDArray, ...]:
    w = omega_at(params, x)
    ct, st = math.cos(params.theta), math.sin(params.theta)
    phase = np.exp(1j * w)
    a = np.full(w.shape, ct, dtype=np.complex128)
    return a, phase * st, np.conj(phase) * st, -a


@dataclass(frozen=True, eq=False)
class CoinSequence:
    """
    A family of coins indexed by the sites of a topology.

    Exactly one source is given: ``params`` (phase-ramp sequence, evaluated
    lazily at any integer site) or ``table`` (explicit coins, shape (k, 2, 2)).
    An explicit table either covers the topology site by site, or, when
    ``periodic`` is set, is repeated with ``U_x = table[x mod k]``.

    On a cycle all site indices are reduced modulo the cycle size.
    """

    topology: Topology
    params: CPhiParams | None = None
    table: NDArray[np.complex128] | None = field(default=None, repr=False)
    periodic: bool = False

    def __post_init__(self) -> None:
        if (self.params is None) == (self.table is None):
            raise ValueError("give exactly one of params or table")
        if self.table is not None:
            table = np.array(self.table, dtype=np.complex128)
            if table.ndim != 3 or table.shape[1:] != (2, 2) or len(table) == 0:
                raise ValueError(f"coin table must have shape (k, 2, 2), got {table.shape}")
            table.setflags(write=False)
            object.__setattr__(self, "table", table)
            if not self.periodic and len(table) != self.topology.n_sites:
                raise ValueError(
                    f"coin table has {len(table)} entries but {self.topology} has "
                    f"{self.topology.n_sites} sites; pass periodic=True to repeat a pattern"
                )
            if isinstance(self.topology, Cycle) and self.periodic and self.topology.size % len(table):
                raise ValueError(
                    f"pattern length {len(table)} does not divide cycle size {self.topology.size}"
                )
        elif isinstance(self.topology, Cycle):
            # the phase ramp must close up after going once around the cycle
            wrap = 2.0 * self.params.phi * self.topology.size
            if abs(complex(math.cos(wrap), math.sin(wrap)) - 1.0) > PERIOD_TOL:
                raise DomainError(
                    f"phase ramp with phi = {self.params.phi!r} is not consistent on "
                    f"{self.topology}: 2 * phi * m must be a multiple of 2pi"
                )

    @classmethod
    def cphi(cls, params: CPhiParams, topology: Topology) -> CoinSequence:
        return cls(topology, params=params)

    @classmethod
    def explicit(
        cls,
        coins: ArrayLike | list[CoinMatrix],
        topology: Topology,
        *,
        periodic: bool = False,
        unitary_tol: float = UNITARY_TOL,
    ) -> CoinSequence:
        """Build a sequence from explicit coins, checking each is unitary."""
        if isinstance(coins, (list, tuple)) and coins and isinstance(coins[0], CoinMatrix):
            table = np.stack([c.matrix for c in coins])
        else:
            table = np.asarray(coins, dtype=np.complex128)
        if table.ndim == 3 and len(table):
            defects = np.max(np.abs(np.conj(np.swapaxes(table, 1, 2)) @ table - np.eye(2)), axis=(1, 2))
            bad = np.flatnonzero(defects > unitary_tol)
            if bad.size:
                raise DomainError(
                    f"coin #{bad[0]} is not unitary (|U^dagger U - I|_max = {defects[bad[0]]:.3e})"
                )
        return cls(topology, table=table, periodic=periodic)

    def on(self, topology: Topology) -> CoinSequence:
        """Same coin rule placed on another topology (phase-ramp or periodic sources only)."""
        if self.table is not None and not self.periodic:
            raise ValueError("a site-by-site coin table cannot be moved to another topology")
        return CoinSequence(topology, params=self.params, table=self.table, periodic=self.periodic)

    def _table_rows(self, x: NDArray) -> NDArray:
        k = len(self.table)
        if self.periodic or isinstance(self.topology, Cycle):
            return np.mod(x, k)
        half = self.topology.half_width
        if x.size and (x.min() < -half or x.max() > half):
            raise IndexError(f"coins requested outside window [-{half}, {half}]")
        return x + half

    def entries(self, sites: ArrayLike) -> tuple[NDArray[np.complex128], ...]:
        """Return the coin entries ``(a, b, c, d)`` at each site, as four arrays."""
        x = np.asarray(sites, dtype=np.int64)
        if isinstance(self.topology, Cycle):
            x = np.mod(x, self.topology.size)
        if self.params is not None:
            return _cphi_entries(self.params, x)
        m = self.table[self._table_rows(x)]
        return m[..., 0, 0], m[..., 0, 1], m[..., 1, 0], m[..., 1, 1]

    def matrices(self, sites: ArrayLike) -> NDArray[np.complex128]:
        a, b, c, d = self.entries(sites)
        return np.stack([np.stack([a, b], -1), np.stack([c, d], -1)], -2)

    def coin_at(self, x: int) -> CoinMatrix:
        a, b, c, d = (complex(v[0]) for v in self.entries(np.array([x])))
        return CoinMatrix(a, b, c, d)


def detect_period(
    seq: CoinSequence,
    max_period: int,
    scan_width: int | None = None,
    tol: float = PERIOD_TOL,
) -> int | None:
    """
    Smallest ``N <= max_period`` with ``U_{x+N} = U_x`` on a finite scan.

    Coins are compared entrywise at every ``x`` in ``[-scan_width, scan_width]``.
    Returns ``None`` when no candidate matches, which only means "no period
    up to ``max_period`` at this tolerance".

    Parameters
    ----------
    seq : CoinSequence
        Sequence on a line topology.
    max_period : int
        Largest candidate period, at least 1.
    scan_width : int, optional
        Half-width of the scanned window; defaults to ``4 * max_period`` and
        must be at least ``2 * max_period``.
    tol : float
        Entrywise matching tolerance.
    """
    if max_period < 1:
        raise ValueError(f"max_period must be positive (got {max_period})")
    if not isinstance(seq.topology, Line):
        raise ValueError("period detection is defined for sequences on the line")
    if scan_width is None:
        scan_width = 4 * max_period
    if scan_width < 2 * max_period:
        raise ValueError(f"scan_width must be >= 2 * max_period (got {scan_width} < {2 * max_period})")

    span = 2 * scan_width + 1
    mats = seq.matrices(np.arange(-scan_width, scan_width + max_period + 1))
    base = mats[:span]
    for n in range(1, max_period + 1):
        if np.max(np.abs(mats[n:n + span] - base)) <= tol:
            return n
    return None
