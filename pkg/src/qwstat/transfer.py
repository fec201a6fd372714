"""
Transfer matrices for the eigenvalue problem ``U psi = lambda psi``.

Writing the eigen-equation site by site,

    lambda psi_L(x) = a_{x+1} psi_L(x+1) + b_{x+1} psi_R(x+1)
    lambda psi_R(x) = c_{x-1} psi_L(x-1) + d_{x-1} psi_R(x-1)

each amplitude pair determines its neighbours. ``D+_x`` maps ``psi(x-1)`` to
``psi(x)`` and ``D-_x`` maps ``psi(x+1)`` to ``psi(x)``; chaining them outward
from ``psi(0)`` produces a (generally non-normalisable) eigenvector.

For phase-ramp coins with ``lambda = e^{i phi}`` both matrices are unitary, so
``|psi(x)|`` does not depend on ``x`` and the induced measure is uniform.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .coin import TWO_PI, CoinMatrix, CoinSequence, CPhiParams, omega_at
from .errors import DomainError, IllConditionedWarning
from .state import SpinorField
from .topology import Cycle, Line, TopologyError

__all__ = [
    "LAMBDA_TOL",
    "SINGULAR_TOL",
    "ILL_CONDITIONED_TOL",
    "TransferMatrix",
    "normalize_lambda",
    "alpha_at",
    "transfer_plus",
    "transfer_minus",
    "cphi_transfer_plus",
    "cphi_transfer_minus",
    "build_eigenstate",
    "eigen_residual",
    "cycle_product",
    "plus_matrices",
    "minus_matrices",
]

LAMBDA_TOL = 1e-9
SINGULAR_TOL = 1e-12
ILL_CONDITIONED_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class TransferMatrix:
    """A transfer matrix at a fixed eigenvalue.

    ``side`` is ``"plus"`` for the rightward map ``psi(x-1) -> psi(x)`` and
    ``"minus"`` for the leftward map ``psi(x+1) -> psi(x)``.
    """

    entries: NDArray[np.complex128]
    lam: complex
    side: Literal["plus", "minus"]
    site: int | None = None

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if abs(abs(self.lam) - 1.0) > 1e-12:
            raise DomainError(f"transfer-matrix eigenvalue must be unimodular, got |lambda| = {abs(self.lam)!r}")

    def __matmul__(self, other):
        if isinstance(other, TransferMatrix):
            other = other.entries
        return self.entries @ other

    def is_unitary(self, tol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.entries.conj().T @ self.entries - np.eye(2))) <= tol)


def normalize_lambda(lam: complex, tol: float = LAMBDA_TOL) -> complex:
    """Snap ``lam`` onto the unit circle, rejecting values further than ``tol`` from it."""
    lam = complex(lam)
    r = abs(lam)
    if abs(r - 1.0) > tol:
        raise DomainError(f"eigenvalue must lie on the unit circle, got |lambda| = {r!r}")
    return lam / r


def _check_entries(names: tuple[str, ...], values: tuple[NDArray, ...], sites: NDArray) -> None:
    for name, v in zip(names, values):
        small = np.flatnonzero(np.abs(v) < SINGULAR_TOL)
        if small.size:
            i = small[0]
            raise DomainError(
                f"coin entry {name} vanishes at site {int(sites[i])} "
                f"(|{name}| = {abs(v[i]):.3e}); transfer matrices need a*b*c*d != 0"
            )


def _warn_ill_conditioned(name: str, v: NDArray, sites: NDArray) -> None:
    small = np.flatnonzero(np.abs(v) < ILL_CONDITIONED_TOL)
    if small.size:
        i = small[0]
        warnings.warn(
            f"|{name}| = {abs(v[i]):.3e} at site {int(sites[i])}: transfer matrix is ill-conditioned",
            IllConditionedWarning,
            stacklevel=3,
        )


def plus_matrices(coins: CoinSequence, lam: complex, sites: NDArray) -> NDArray[np.complex128]:
    """``D+_x`` for each ``x`` in ``sites``, shape (k, 2, 2)."""
    a, b, _, _ = coins.entries(sites)
    _, _, c_prev, d_prev = coins.entries(sites - 1)
    _check_entries(("a_x", "b_x", "c_{x-1}", "d_{x-1}"), (a, b, c_prev, d_prev), sites)
    _warn_ill_conditioned("a_x", a, sites)
    out = np.empty((len(sites), 2, 2), dtype=np.complex128)
    out[:, 0, 0] = (lam * lam - b * c_prev) / (lam * a)
    out[:, 0, 1] = -b * d_prev / (lam * a)
    out[:, 1, 0] = c_prev / lam
    out[:, 1, 1] = d_prev / lam
    return out


def minus_matrices(coins: CoinSequence, lam: complex, sites: NDArray) -> NDArray[np.complex128]:
    """``D-_x`` for each ``x`` in ``sites``, shape (k, 2, 2)."""
    _, _, c, d = coins.entries(sites)
    a_next, b_next, _, _ = coins.entries(sites + 1)
    _check_entries(("a_{x+1}", "b_{x+1}", "c_x", "d_x"), (a_next, b_next, c, d), sites)
    _warn_ill_conditioned("d_x", d, sites)
    out = np.empty((len(sites), 2, 2), dtype=np.complex128)
    out[:, 0, 0] = a_next / lam
    out[:, 0, 1] = b_next / lam
    out[:, 1, 0] = -a_next * c / (lam * d)
    out[:, 1, 1] = (lam * lam - b_next * c) / (lam * d)
    return out


def _pair_sequence(first: CoinMatrix, second: CoinMatrix) -> CoinSequence:
    # coins at sites 0 and 1 of a throwaway window, so the batched builders can be reused
    return CoinSequence.explicit([first, second], Line(0), periodic=True)


def transfer_plus(u_x: CoinMatrix, u_prev: CoinMatrix, lam: complex, site: int | None = None) -> TransferMatrix:
    """
    Rightward transfer matrix ``D+_x`` from the coins at ``x`` and ``x - 1``.

    Raises
    ------
    DomainError
        If one of ``a_x, b_x, c_{x-1}, d_{x-1}`` vanishes or ``lam`` is off
        the unit circle.
    """
    lam = normalize_lambda(lam)
    m = plus_matrices(_pair_sequence(u_prev, u_x), lam, np.array([1]))[0]
    return TransferMatrix(m, lam, "plus", site)


def transfer_minus(u_next: CoinMatrix, u_x: CoinMatrix, lam: complex, site: int | None = None) -> TransferMatrix:
    """Leftward transfer matrix ``D-_x`` from the coins at ``x + 1`` and ``x``."""
    lam = normalize_lambda(lam)
    m = minus_matrices(_pair_sequence(u_x, u_next), lam, np.array([0]))[0]
    return TransferMatrix(m, lam, "minus", site)


def alpha_at(params: CPhiParams, x: ArrayLike) -> NDArray[np.float64]:
    """Phase ``alpha_x = omega_x - phi (mod 2pi)`` of the closed-form transfer matrix."""
    a = np.mod(omega_at(params, x) - params.phi, TWO_PI)
    return np.where(a >= TWO_PI, 0.0, a)


def _closed_form(theta: float, diag_phase: float, alpha: float) -> NDArray[np.complex128]:
    ct, st = math.cos(theta), math.sin(theta)
    e_diag = complex(math.cos(diag_phase), math.sin(diag_phase))
    e_alpha = complex(math.cos(alpha), math.sin(alpha))
    return np.array(
        [[e_diag * ct, e_alpha * st], [e_alpha.conjugate() * st, -e_diag.conjugate() * ct]],
        dtype=np.complex128,
    )


def cphi_transfer_plus(params: CPhiParams, x: int) -> TransferMatrix:
    """Closed-form ``D+_x`` for a phase-ramp sequence at ``lambda = e^{i phi}``."""
    m = _closed_form(params.theta, params.phi, float(alpha_at(params, x)))
    return TransferMatrix(m, complex(math.cos(params.phi), math.sin(params.phi)), "plus", x)


def cphi_transfer_minus(params: CPhiParams, x: int) -> TransferMatrix:
    """Closed-form ``D-_x``; it uses ``alpha_{x+1}`` and the conjugate diagonal phase."""
    m = _closed_form(params.theta, -params.phi, float(alpha_at(params, x + 1)))
    return TransferMatrix(m, complex(math.cos(params.phi), math.sin(params.phi)), "minus", x)


def build_eigenstate(
    coins: CoinSequence,
    lam: complex,
    psi0: ArrayLike = (1.0, 0.0),
    half_width: int | None = None,
) -> SpinorField:
    """
    Build a solution of ``U psi = lam psi`` by chaining transfer matrices from ``psi(0)``.

    On the line, ``psi(x) = D+_x ... D+_1 psi0`` for ``x >= 1`` and
    ``psi(x) = D-_x ... D-_{-1} psi0`` for ``x <= -1``, over the window
    ``[-half_width, half_width]`` (default: the window of ``coins``).

    On a cycle of ``m`` sites only the rightward chain is used, for
    ``x = 1..m-1``. The result is a true eigenvector of the cycle walk only
    when the full loop product returned by :func:`cycle_product` fixes
    ``psi0``; check with :func:`eigen_residual`.

    Raises
    ------
    DomainError
        Propagated from the transfer matrices.
    ValueError
        If ``psi0`` is zero.
    """
    lam = normalize_lambda(lam)
    v = np.asarray(psi0, dtype=np.complex128).reshape(2)
    if not np.any(v):
        raise ValueError("psi0 must be nonzero")

    if isinstance(coins.topology, Cycle):
        m = coins.topology.size
        amps = np.empty((m, 2), dtype=np.complex128)
        amps[0] = v
        if m > 1:
            mats = plus_matrices(coins, lam, np.arange(1, m))
            for x in range(1, m):
                amps[x] = mats[x - 1] @ amps[x - 1]
        return SpinorField(coins.topology, amps)

    if half_width is None:
        half_width = coins.topology.half_width
    top = Line(half_width)
    amps = np.empty((top.n_sites, 2), dtype=np.complex128)
    amps[half_width] = v
    if half_width > 0:
        plus = plus_matrices(coins, lam, np.arange(1, half_width + 1))
        minus = minus_matrices(coins, lam, -np.arange(1, half_width + 1))
        for k in range(1, half_width + 1):
            amps[half_width + k] = plus[k - 1] @ amps[half_width + k - 1]
            amps[half_width - k] = minus[k - 1] @ amps[half_width - k + 1]
    return SpinorField(top, amps)


def eigen_residual(psi: SpinorField, coins: CoinSequence, lam: complex) -> float:
    """
    Max over checkable sites of ``|P_{x+1} psi(x+1) + Q_{x-1} psi(x-1) - lam psi(x)|``.

    On a line window the checkable sites are the interior ones whose two
    neighbours are inside the window and uncontaminated; on a cycle, all
    sites. Returns 0.0 when no site is checkable.
    """
    lam = normalize_lambda(lam)
    amps = psi.amplitudes
    if isinstance(psi.topology, Cycle):
        if not isinstance(coins.topology, Cycle) or coins.topology.size != psi.topology.size:
            raise TopologyError(f"coins on {coins.topology} cannot act on a field on {psi.topology}")
        x = psi.topology.sites()
        m = psi.topology.size
        here, nxt, prv = amps, amps[(x + 1) % m], amps[(x - 1) % m]
    else:
        half = psi.topology.half_width
        reach = half - 1 - psi.contaminated
        if reach < 0:
            return 0.0
        x = np.arange(-reach, reach + 1)
        i = x + half
        here, nxt, prv = amps[i], amps[i + 1], amps[i - 1]

    a, b, _, _ = coins.entries(x + 1)
    _, _, c, d = coins.entries(x - 1)
    res_l = a * nxt[:, 0] + b * nxt[:, 1] - lam * here[:, 0]
    res_r = c * prv[:, 0] + d * prv[:, 1] - lam * here[:, 1]
    return float(np.max(np.sqrt(np.abs(res_l) ** 2 + np.abs(res_r) ** 2)))


def cycle_product(coins: CoinSequence, lam: complex) -> NDArray[np.complex128]:
    """Ordered loop product ``D+_m ... D+_2 D+_1`` around a cycle of ``m`` sites."""
    if not isinstance(coins.topology, Cycle):
        raise TopologyError("cycle_product requires coins on a cycle")
    lam = normalize_lambda(lam)
    m = coins.topology.size
    out = np.eye(2, dtype=np.complex128)
    for mat in plus_matrices(coins, lam, np.arange(1, m + 1)):
        out = mat @ out
    return out
