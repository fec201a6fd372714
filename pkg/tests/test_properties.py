"""
Invariants of the walk, each written as a function returning the worst error seen.

The hypothesis tests drive them with generated seeds; the acceptance suite runs
the same functions from one fixed seed.
"""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qwstat import (
    CoinSequence,
    Cycle,
    EvolutionOperator,
    Line,
    SpinorField,
    build_coin,
    dense_cycle_operator,
    gamma_measure,
    scale,
    step,
)

from conftest import random_unitary_table

DENSE_SIZES = (2, 4, 6, 8, 12)


def _field(rng, top):
    return SpinorField(top, rng.normal(size=(top.n_sites, 2)) + 1j * rng.normal(size=(top.n_sites, 2)))


def _coins(rng, top):
    return CoinSequence.explicit(random_unitary_table(rng, top.n_sites), top)


def coin_unitarity_error(rng, trials=200):
    worst = 0.0
    for theta, omega in zip(rng.uniform(1e-3, 2 * math.pi - 1e-3, trials), rng.uniform(0, 2 * math.pi, trials)):
        u = build_coin(theta, omega).matrix
        worst = max(worst, float(np.max(np.abs(u @ u.conj().T - np.eye(2)))))
    return worst


def dense_unitarity_error(rng):
    worst = 0.0
    for m in DENSE_SIZES:
        u = dense_cycle_operator(_coins(rng, Cycle(m)))
        worst = max(worst, float(np.max(np.abs(u @ u.conj().T - np.eye(2 * m)))))
    return worst


def norm_drift(rng, m=10, steps=100):
    """Relative change of total measure over ``steps`` steps on a cycle."""
    top = Cycle(m)
    op = EvolutionOperator(_coins(rng, top))
    psi = _field(rng, top)
    total = gamma_measure(psi).total()
    worst = 0.0
    for _ in range(steps):
        psi = step(psi, op)
        worst = max(worst, abs(gamma_measure(psi).total() - total) / total)
    return worst


def linearity_error(rng):
    worst = 0.0
    for top in (Cycle(7), Line(6)):
        op = EvolutionOperator(_coins(rng, top))
        p1, p2 = _field(rng, top), _field(rng, top)
        a, b = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        lhs = step(SpinorField(top, a * p1.amplitudes + b * p2.amplitudes), op).amplitudes
        rhs = a * step(p1, op).amplitudes + b * step(p2, op).amplitudes
        worst = max(worst, float(np.max(np.abs(lhs - rhs))))
    return worst


def light_cone_violation(rng, half_width=12, n=4):
    """Fields agreeing on [x-n, x+n] must agree exactly at x after n steps; returns max |difference|."""
    top = Line(half_width)
    op = EvolutionOperator(_coins(rng, top))
    worst = 0.0
    for x in range(-half_width + n, half_width - n + 1):
        p1 = _field(rng, top)
        amps = _field(rng, top).amplitudes.copy()
        lo, hi = top.index(x - n), top.index(x + n)
        amps[lo:hi + 1] = p1.amplitudes[lo:hi + 1]
        p2 = SpinorField(top, amps)
        for _ in range(n):
            p1, p2 = step(p1, op), step(p2, op)
        worst = max(worst, float(np.max(np.abs(p1.at(x) - p2.at(x)))))
    return worst


def gamma_scaling_error(rng, trials=20):
    worst = 0.0
    for _ in range(trials):
        psi = _field(rng, Line(5))
        z = complex(*rng.normal(size=2)) * 3
        lhs = gamma_measure(scale(psi, z)).values
        rhs = abs(z) ** 2 * gamma_measure(psi).values
        worst = max(worst, float(np.max(np.abs(lhs - rhs) / np.maximum(1.0, rhs))))
    return worst


def dense_step_mismatch(rng):
    worst = 0.0
    for m in DENSE_SIZES:
        coins = _coins(rng, Cycle(m))
        u = dense_cycle_operator(coins)
        op = EvolutionOperator(coins)
        for _ in range(5):
            psi = _field(rng, Cycle(m))
            worst = max(worst, float(np.max(np.abs(u @ psi.flat() - step(psi, op).flat()))))
    return worst


# (measurement, tolerance)
PROPERTIES = {
    "coin unitarity": (coin_unitarity_error, 1e-12),
    "dense unitarity": (dense_unitarity_error, 1e-12),
    "norm conservation": (norm_drift, 1e-10),
    "linearity": (linearity_error, 1e-12),
    "light-cone locality": (light_cone_violation, 0.0),
    "gamma scaling": (gamma_scaling_error, 1e-12),
    "step vs dense operator": (dense_step_mismatch, 1e-12),
}

seeds = st.integers(0, 2**32 - 1)


@pytest.mark.parametrize("name", list(PROPERTIES))
@given(seed=seeds)
def test_property(name, seed):
    measure, tol = PROPERTIES[name]
    assert measure(np.random.default_rng(seed)) <= tol
