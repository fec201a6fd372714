import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qwstat import (
    CoinSequence,
    CPhiParams,
    Cycle,
    EvolutionOperator,
    Line,
    SpinorField,
    TopologyError,
    build_eigenstate,
    dense_cycle_operator,
    gamma_measure,
    iterate,
    step,
)

from conftest import ramp_cycle_coins, random_unitary_table
from oracles import cycle_block_matrix, line_block_matrix

R2 = math.sqrt(2) / 2


def _hadamard_seq(top):
    return CoinSequence.cphi(CPhiParams(math.pi / 4, math.pi, 0.0), top)


def _random_field(rng, top):
    return SpinorField(top, rng.normal(size=(top.n_sites, 2)) + 1j * rng.normal(size=(top.n_sites, 2)))


class TestStep:
    def test_one_step_from_origin(self):
        top = Line(3)
        op = EvolutionOperator(_hadamard_seq(top))
        out = step(SpinorField.from_sites(top, {0: (1, 0)}), op)
        np.testing.assert_allclose(out.at(-1), [R2, 0], atol=1e-15)
        np.testing.assert_allclose(out.at(1), [0, R2], atol=1e-15)
        mask = np.ones(7, bool)
        mask[[2, 4]] = False
        assert not np.any(out.amplitudes[mask])

    def test_zero_field(self):
        top = Cycle(5)
        out = step(SpinorField.zeros(top), EvolutionOperator(_hadamard_seq(top)))
        assert out.is_zero()

    def test_cycle_eigenstate_picks_up_phase(self):
        n = 4
        coins = ramp_cycle_coins(n, 0.9, 1.7)
        lam = np.exp(1j * math.pi / n)
        psi = build_eigenstate(coins, lam, (0.3, 0.2 - 0.5j))
        out = step(psi, EvolutionOperator(coins))
        np.testing.assert_allclose(out.amplitudes, lam * psi.amplitudes, atol=1e-10)

    def test_topology_mismatch(self):
        op = EvolutionOperator(_hadamard_seq(Line(3)))
        with pytest.raises(TopologyError):
            step(SpinorField.zeros(Line(4)), op)
        with pytest.raises(TopologyError):
            step(SpinorField.zeros(Cycle(7)), op)

    def test_contamination_grows_one_per_step(self):
        top = Line(4)
        op = EvolutionOperator(_hadamard_seq(top))
        psi = SpinorField.constant(top, (1, 0))
        for n in range(1, 8):
            psi = step(psi, op)
            assert psi.contaminated == min(n, 5)
        assert psi.interior_sites().size == 0

    def test_line_matches_block_matrix(self, rng):
        top = Line(6)
        coins = CoinSequence.explicit(random_unitary_table(rng, top.n_sites), top)
        u = line_block_matrix(coins, 6)
        psi = _random_field(rng, top)
        np.testing.assert_allclose(step(psi, EvolutionOperator(coins)).flat(), u @ psi.flat(), atol=1e-14)


class TestIterate:
    def test_zero_steps(self, rng):
        psi = _random_field(rng, Cycle(4))
        assert iterate(psi, EvolutionOperator(_hadamard_seq(Cycle(4))), 0) is psi

    def test_negative_rejected(self, rng):
        with pytest.raises(ValueError):
            iterate(_random_field(rng, Cycle(4)), EvolutionOperator(_hadamard_seq(Cycle(4))), -1)

    @pytest.mark.parametrize("n", [1, 3, 6])
    def test_cycle_eigenstate_measure_stationary(self, n):
        coins = ramp_cycle_coins(n, 2.0, 0.25)
        psi0 = build_eigenstate(coins, np.exp(1j * math.pi / n), (1, 1j))
        mu0 = gamma_measure(psi0).values
        op = EvolutionOperator(coins)
        psi = psi0
        for _ in range(100):
            psi = step(psi, op)
            np.testing.assert_allclose(gamma_measure(psi).values, mu0, atol=1e-9)

    def test_norm_conserved_on_cycle(self, rng):
        top = Cycle(9)
        coins = CoinSequence.explicit(random_unitary_table(rng, 9), top)
        psi = _random_field(rng, top)
        total = gamma_measure(psi).total()
        out = iterate(psi, EvolutionOperator(coins), 100)
        assert abs(gamma_measure(out).total() - total) <= 1e-10 * max(1.0, total)


class TestDenseCycleOperator:
    def test_two_sites_matches_step(self, rng):
        coins = _hadamard_seq(Cycle(2))
        u = dense_cycle_operator(coins)
        assert u.shape == (4, 4)
        op = EvolutionOperator(coins)
        for _ in range(10):
            psi = _random_field(rng, Cycle(2))
            np.testing.assert_allclose(u @ psi.flat(), step(psi, op).flat(), atol=1e-13)

    @pytest.mark.parametrize("m", [2, 3, 5, 8])
    def test_unitary_and_matches_block_oracle(self, rng, m):
        coins = CoinSequence.explicit(random_unitary_table(rng, m), Cycle(m))
        u = dense_cycle_operator(coins)
        np.testing.assert_allclose(u @ u.conj().T, np.eye(2 * m), atol=1e-12)
        np.testing.assert_allclose(u, cycle_block_matrix(coins, m), atol=0)

    def test_ramp_cycle_eigenvalue_present(self):
        coins = ramp_cycle_coins(3, math.pi / 5, 0.3)
        ev = np.linalg.eigvals(dense_cycle_operator(coins))
        assert np.min(np.abs(ev - np.exp(1j * math.pi / 3))) <= 1e-9

    def test_validation(self):
        with pytest.raises(TopologyError):
            dense_cycle_operator(_hadamard_seq(Line(3)))
        with pytest.raises(ValueError):
            dense_cycle_operator(_hadamard_seq(Cycle(1)))
        with pytest.raises(ValueError):
            dense_cycle_operator(_hadamard_seq(Cycle(513)))
