import math

import numpy as np
import pytest
from hypothesis import settings

from qwstat import CoinSequence, CPhiParams, Cycle, build_coin

settings.register_profile("ci", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("ci")

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20260415)


@pytest.fixture
def hadamard():
    return build_coin(math.pi / 4, 0.0)


def random_unitary_table(rng, k):
    """k Haar-ish random 2x2 unitaries via QR of complex Gaussians."""
    z = rng.normal(size=(k, 2, 2)) + 1j * rng.normal(size=(k, 2, 2))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def random_phase_coins(rng, topology, theta):
    """Coins with fixed theta and independent uniform phases (not a phase ramp)."""
    omegas = rng.uniform(0.0, 2.0 * math.pi, topology.n_sites)
    return CoinSequence.explicit(np.stack([build_coin(theta, w).matrix for w in omegas]), topology)


def ramp_cycle_coins(n, theta, omega0):
    """Phase-ramp coins on C_{2N} with phi = pi/N."""
    return CoinSequence.cphi(CPhiParams(theta, math.pi / n, omega0), Cycle(2 * n))


def random_cphi(rng, margin=0.05):
    """Random phase-ramp parameters with theta at least ``margin`` from pi/2 and 3pi/2."""
    while True:
        theta = rng.uniform(1e-3, 2 * math.pi - 1e-3)
        if min(abs(theta - math.pi / 2), abs(theta - 3 * math.pi / 2)) >= margin:
            break
    return CPhiParams(theta, rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))

