import math
from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase, tag
from scipy import integrate

from core.exceptions import ConfigError
from core.models import CouplingState
from core.priors import MrfHyper, mrf_joint_logprob, nu_logpdf

from ..chain import Acceptance
from ..coupling import (
    CouplingMoves,
    NuProposal,
    ThetaProposal,
    between_log_ratio,
    nu_step,
    nu_sweep,
    pair_log_posterior,
    theta_between_move,
    theta_within_move,
    update_coupling,
)


def two_group_state(theta=0.5, omega=0.5, nu=-1.0, m=3):
    state = CouplingState.initial(2, m, omega=omega, theta0=theta)
    state.nu[:] = nu
    return state


SHARED = np.array([[1, 1, 0], [1, 1, 0]], dtype=np.uint8)


class ProposalTests(SimpleTestCase):
    def test_invalid_shapes(self):
        with self.assertRaises(ConfigError):
            ThetaProposal(0.0, 1.0)
        with self.assertRaises(ConfigError):
            NuProposal(1.0, -1.0)

    def test_invalid_moves(self):
        with self.assertRaises(ConfigError):
            CouplingMoves(likelihood='exact')
        with self.assertRaises(ConfigError):
            CouplingMoves(scan='sideways')

    def test_nu_draws_are_finite(self):
        draws = NuProposal().draw(np.random.default_rng(0), size=1000)
        self.assertTrue(np.isfinite(draws).all())
        self.assertEqual(draws.shape, (1000,))


class ThetaMoveTests(SimpleTestCase):
    def test_within_move_skipped_when_unrelated(self):
        """Test theta stays 0 for a pair with epsilon = 0."""
        state = two_group_state()
        state.theta[:] = 0.0
        state.epsilon[:] = 0
        rng = np.random.default_rng(0)
        self.assertFalse(theta_within_move(state, 0, 1, SHARED, rng))
        self.assertEqual(state.theta[0, 1], 0.0)

    def test_within_move_same_value_accepted(self):
        """Test a proposal equal to the current value is always accepted."""
        state = two_group_state(theta=0.8)
        rng = np.random.default_rng(1)
        with patch.object(ThetaProposal, 'draw', return_value=0.8):
            for _ in range(20):
                self.assertTrue(
                    theta_within_move(state, 0, 1, SHARED, rng)
                )

    def test_switch_off_ratio(self):
        """Test the switch-off ratio includes the proposal density of theta."""
        state = two_group_state(theta=0.7, omega=0.5)
        proposal = ThetaProposal()
        log_r, theta_new = between_log_ratio(state, 0, 1, SHARED, proposal)
        expected = (
            pair_log_posterior(state, 0, 1, 0.0, 0, SHARED)
            + proposal.logpdf(0.7)
            - pair_log_posterior(state, 0, 1, 0.7, 1, SHARED)
        )
        self.assertEqual(theta_new, 0.0)
        self.assertAlmostEqual(log_r, expected)

    def test_prior_ratio_neutral_at_half(self):
        """Test omega = 0.5 gives equal Bernoulli terms for both states."""
        state = two_group_state(omega=0.5)
        on = pair_log_posterior(state, 0, 1, 0.5, 1, np.zeros((2, 3)))
        off = pair_log_posterior(state, 0, 1, 0.0, 0, np.zeros((2, 3)))
        gamma_term = math.log(2.0) - 1.0
        edges = float(np.sum(mrf_joint_logprob(
            np.zeros((2, 3)), state.nu, np.array([[0, 0.5], [0.5, 0]])
        )))
        edges_off = float(np.sum(mrf_joint_logprob(
            np.zeros((2, 3)), state.nu, np.zeros((2, 2))
        )))
        self.assertAlmostEqual(on - off,
                               gamma_term + edges - edges_off)

    def test_same_group_rejected(self):
        with self.assertRaises(ValueError):
            theta_between_move(two_group_state(), 1, 1, SHARED,
                               np.random.default_rng(0))

    def test_determinism(self):
        first = two_group_state()
        second = two_group_state()
        for state in (first, second):
            rng = np.random.default_rng(42)
            for _ in range(50):
                theta_between_move(state, 0, 1, SHARED, rng)
                theta_within_move(state, 0, 1, SHARED, rng)
        np.testing.assert_array_equal(first.theta, second.theta)


class NuMoveTests(SimpleTestCase):
    def test_same_value_accepted(self):
        state = two_group_state(nu=-0.4)
        rng = np.random.default_rng(0)
        with patch.object(NuProposal, 'draw', return_value=-0.4):
            self.assertTrue(nu_step(state, 1, SHARED, rng))

    def test_sweep_keeps_nu_finite(self):
        """Test a sweep counts acceptances and keeps nu finite."""
        state = two_group_state()
        rng = np.random.default_rng(3)
        accepted = nu_sweep(state, SHARED, rng)
        self.assertLessEqual(accepted, 3)
        self.assertTrue(np.isfinite(state.nu).all())

    def test_nu_determinism(self):
        first, second = two_group_state(), two_group_state()
        for state in (first, second):
            rng = np.random.default_rng(8)
            for k in range(3):
                nu_step(state, k, SHARED, rng)
        np.testing.assert_array_equal(first.nu, second.nu)


class UpdateCouplingTests(SimpleTestCase):
    def test_invariant_after_updates(self):
        """Test theta > 0 exactly where epsilon = 1 after many sweeps."""
        state = CouplingState.initial(4, 6)
        rng = np.random.default_rng(5)
        delta = rng.integers(0, 2, (4, 6)).astype(np.uint8)
        for scan in ('systematic', 'random'):
            moves = CouplingMoves(scan=scan)
            for _ in range(100):
                update_coupling(state, delta, rng, moves)
                state.check()

    def test_random_scan_visits_every_edge_once(self):
        state = CouplingState.initial(3, 4)
        acceptance = Acceptance()
        with patch('sampler.coupling.nu_step', wraps=nu_step) as step, \
                patch('sampler.coupling.nu_sweep') as sweep:
            update_coupling(state, np.ones((3, 4), dtype=np.uint8),
                            np.random.default_rng(3),
                            CouplingMoves(scan='random'), acceptance)
        sweep.assert_not_called()
        visited = sorted(call.args[1] for call in step.call_args_list)
        self.assertEqual(visited, [0, 1, 2, 3])
        self.assertEqual(acceptance.counts['nu'][1], 4)

    def test_frozen_state_untouched(self):
        state = CouplingState.independent(3, 3, 0.2)
        before = state.copy()
        update_coupling(state, np.ones((3, 3), dtype=np.uint8),
                        np.random.default_rng(0))
        np.testing.assert_array_equal(state.nu, before.nu)
        np.testing.assert_array_equal(state.theta, before.theta)

    def test_pseudo_likelihood_runs(self):
        state = CouplingState.initial(3, 3)
        update_coupling(state, np.ones((3, 3), dtype=np.uint8),
                        np.random.default_rng(0),
                        CouplingMoves(likelihood='pseudo'))
        state.check()

    @tag('slow')
    def test_epsilon_frequency_matches_quadrature(self):
        """Test P(epsilon = 1 | delta) on a frozen two-group system."""
        state = two_group_state(theta=0.5, omega=0.5, nu=-1.0)
        nu = state.nu.copy()

        def edges(theta):
            matrix = np.array([[0.0, theta], [theta, 0.0]])
            return float(np.sum(mrf_joint_logprob(SHARED, nu, matrix)))

        slab, _ = integrate.quad(
            lambda t: 2.0 * math.exp(-2.0 * t + edges(t)), 0, np.inf
        )
        expected = 0.5 * slab / (0.5 * slab + 0.5 * math.exp(edges(0.0)))
        rng = np.random.default_rng(2024)
        hits = 0
        total = 60000
        for _ in range(total):
            theta_between_move(state, 0, 1, SHARED, rng)
            theta_within_move(state, 0, 1, SHARED, rng)
            hits += int(state.epsilon[0, 1])
        self.assertAlmostEqual(hits / total, expected, delta=0.02)

    @tag('slow')
    def test_nu_stationary_mean_matches_quadrature(self):
        """Test the nu chain with empty graphs against its full conditional."""
        hyper = MrfHyper(1.0, 3.0)
        m = 400
        state = CouplingState.initial(2, m, theta0=0.0)
        state.theta[:] = 0.0
        state.epsilon[:] = 0
        delta = np.zeros((2, m), dtype=np.uint8)

        def density(v):
            return math.exp(nu_logpdf(v, 1.0, 3.0)
                            - 2 * math.log1p(math.exp(v)))

        norm, _ = integrate.quad(density, -40, 40)
        mean, _ = integrate.quad(lambda v: v * density(v) / norm, -40, 40)
        rng = np.random.default_rng(9)
        draws = []
        for t in range(400):
            nu_sweep(state, delta, rng, NuProposal(), hyper)
            if t >= 100:
                draws.append(state.nu.copy())
        self.assertAlmostEqual(float(np.mean(draws)), mean, delta=0.03)
