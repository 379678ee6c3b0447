"""Metropolis-Hastings updates of graph similarity and edge sparsity.

The similarity step visits every pair of groups with a between-model move
that switches epsilon_xh, followed by a within-model move that refreshes
theta_xh. The sparsity step refreshes every nu_rj from a logit-Beta
independence proposal. Both steps condition on the current edge indicators
of all groups, passed as a q x m array.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logit
from scipy.stats import gamma

from core.exceptions import ConfigError
from core.priors import (
    MrfHyper,
    coupling_loglik,
    epsilon_logprior,
    nu_logpdf,
    theta_prior_logpdf,
)

logger = logging.getLogger(__name__)


def metropolis_accept(log_r, rng):
    """Return True with probability min(1, exp(log_r)); NaN rejects."""
    return rng.random() < math.exp(min(log_r, 0.0))


@dataclass(frozen=True)
class ThetaProposal:
    """Gamma(alpha_t, rate beta_t) proposal for graph similarities."""
    alpha_t: float = 2.0
    beta_t: float = 2.0

    def __post_init__(self):
        if self.alpha_t <= 0 or self.beta_t <= 0:
            raise ConfigError('Theta proposal shapes must be positive.')

    def draw(self, rng):
        return float(rng.gamma(self.alpha_t, 1.0 / self.beta_t))

    def logpdf(self, theta):
        return float(gamma.logpdf(theta, self.alpha_t, scale=1 / self.beta_t))


@dataclass(frozen=True)
class NuProposal:
    """Beta(a_t, b_t) proposal for q_rj, mapped to nu_rj by logit."""
    a_t: float = 1.0
    b_t: float = 2.0

    def __post_init__(self):
        if self.a_t <= 0 or self.b_t <= 0:
            raise ConfigError('Nu proposal shapes must be positive.')

    def draw(self, rng, size=None):
        """Draw nu values, redrawing probabilities that hit 0 or 1."""
        draws = np.atleast_1d(rng.beta(self.a_t, self.b_t, size=size))
        bad = (draws <= 0) | (draws >= 1)
        while bad.any():
            draws[bad] = rng.beta(self.a_t, self.b_t, size=int(bad.sum()))
            bad = (draws <= 0) | (draws >= 1)
        nu = logit(draws)
        return float(nu[0]) if size is None else nu

    def logpdf(self, nu):
        return nu_logpdf(nu, self.a_t, self.b_t)


@dataclass(frozen=True)
class CouplingMoves:
    """Proposals and settings of the similarity and sparsity steps."""
    theta_proposal: ThetaProposal = ThetaProposal()
    nu_proposal: NuProposal = NuProposal()
    mrf_hyper: MrfHyper = MrfHyper()
    likelihood: str = 'joint'
    scan: str = 'systematic'

    def __post_init__(self):
        if self.likelihood not in ('joint', 'pseudo'):
            raise ConfigError(
                f'Unknown coupling likelihood {self.likelihood!r}.')
        if self.scan not in ('systematic', 'random'):
            raise ConfigError(f'Unknown scan order {self.scan!r}.')

    @classmethod
    def from_config(cls, config):
        return cls(config.theta_proposal(), config.nu_proposal(),
                   config.mrf_hyper(), config.coupling_likelihood,
                   config.scan)


def pair_log_posterior(state, x, h, theta_xh, epsilon_xh, delta_all,
                       likelihood='joint'):
    """Log full conditional of (theta_xh, epsilon_xh) up to a constant."""
    prior = theta_prior_logpdf(theta_xh, epsilon_xh, state.alpha, state.beta)
    prior += epsilon_logprior(epsilon_xh, state.omega_for(x, h))
    if prior == -math.inf:
        return -math.inf
    theta = state.theta.copy()
    theta[x, h] = theta[h, x] = theta_xh
    edges = coupling_loglik(delta_all, state.nu, theta, likelihood)
    return prior + float(np.sum(edges))


def _set_pair(state, x, h, theta_xh, epsilon_xh):
    state.theta[x, h] = state.theta[h, x] = theta_xh
    state.epsilon[x, h] = state.epsilon[h, x] = epsilon_xh


def between_log_ratio(state, x, h, delta_all, proposal, theta_new=None,
                      likelihood='joint'):
    """Return (log acceptance ratio, proposed theta) of a switch of eps_xh.

    Switching off proposes (0, 0); switching on proposes theta_new, drawn
    by the caller from the Gamma proposal.
    """
    theta_xh = state.theta[x, h]
    current = pair_log_posterior(state, x, h, theta_xh, state.epsilon[x, h],
                                 delta_all, likelihood)
    if state.epsilon[x, h]:
        proposed = pair_log_posterior(state, x, h, 0.0, 0, delta_all,
                                      likelihood)
        return proposed + proposal.logpdf(theta_xh) - current, 0.0
    proposed = pair_log_posterior(state, x, h, theta_new, 1, delta_all,
                                  likelihood)
    return proposed - current - proposal.logpdf(theta_new), theta_new


def theta_between_move(state, x, h, delta_all, rng, proposal=None,
                       likelihood='joint'):
    """Switch epsilon_xh on or off with a Metropolis-Hastings test."""
    if x == h:
        raise ValueError('A group is not paired with itself.')
    proposal = proposal or ThetaProposal()
    switching_on = not state.epsilon[x, h]
    theta_new = proposal.draw(rng) if switching_on else None
    log_r, theta_new = between_log_ratio(state, x, h, delta_all, proposal,
                                         theta_new, likelihood)
    if metropolis_accept(log_r, rng):
        _set_pair(state, x, h, theta_new, int(switching_on))
        return True
    return False


def theta_within_move(state, x, h, delta_all, rng, proposal=None,
                      likelihood='joint'):
    """Refresh theta_xh of a related pair; a no-op when eps_xh = 0."""
    if not state.epsilon[x, h]:
        return False
    proposal = proposal or ThetaProposal()
    theta_xh = state.theta[x, h]
    theta_new = proposal.draw(rng)
    log_r = (
        pair_log_posterior(state, x, h, theta_new, 1, delta_all, likelihood)
        + proposal.logpdf(theta_xh)
        - pair_log_posterior(state, x, h, theta_xh, 1, delta_all, likelihood)
        - proposal.logpdf(theta_new)
    )
    if metropolis_accept(log_r, rng):
        _set_pair(state, x, h, theta_new, 1)
        return True
    return False


def nu_log_target(nu, delta_cols, theta, mrf_hyper, likelihood='joint'):
    """Log full conditional of nu for the edges held in ``delta_cols``."""
    nu = np.atleast_1d(np.asarray(nu, dtype=float))
    return nu_logpdf(nu, mrf_hyper.a, mrf_hyper.b) + coupling_loglik(
        delta_cols, nu, theta, likelihood
    )


def nu_step(state, k, delta_all, rng, proposal=None, mrf_hyper=None,
            likelihood='joint'):
    """Independence Metropolis-Hastings update of nu for pair index k."""
    proposal = proposal or NuProposal()
    mrf_hyper = mrf_hyper or MrfHyper()
    cols = np.asarray(delta_all)[:, k:k + 1]
    current = state.nu[k]
    new = proposal.draw(rng)
    target = nu_log_target([new, current], np.repeat(cols, 2, axis=1),
                           state.theta, mrf_hyper, likelihood)
    log_r = target[0] + proposal.logpdf(current) \
        - target[1] - proposal.logpdf(new)
    if metropolis_accept(log_r, rng):
        state.nu[k] = new
        return True
    return False


def nu_sweep(state, delta_all, rng, proposal=None, mrf_hyper=None,
             likelihood='joint'):
    """Update every nu_rj at once; edges are independent given the rest.

    Returns the number of accepted proposals.
    """
    proposal = proposal or NuProposal()
    mrf_hyper = mrf_hyper or MrfHyper()
    current = state.nu
    if not current.size:
        return 0
    new = proposal.draw(rng, size=current.size)
    log_r = (
        nu_log_target(new, delta_all, state.theta, mrf_hyper, likelihood)
        + proposal.logpdf(current)
        - nu_log_target(current, delta_all, state.theta, mrf_hyper,
                        likelihood)
        - proposal.logpdf(new)
    )
    accept = rng.random(current.size) < np.exp(np.minimum(log_r, 0.0))
    state.nu = np.where(accept, new, current)
    return int(accept.sum())


def group_pairs(q):
    return [(x, h) for x in range(q) for h in range(x + 1, q)]


def update_coupling(state, delta_all, rng, moves=None, acceptance=None):
    """Run the similarity step over all pairs and then the sparsity step.

    A random scan visits the group pairs and the edges in a fresh random
    order each call. Frozen states (uncoupled engines) are left untouched.
    """
    if state.frozen:
        return
    moves = moves or CouplingMoves()
    pairs = group_pairs(state.q)
    if moves.scan == 'random':
        pairs = [pairs[i] for i in rng.permutation(len(pairs))]
    for x, h in pairs:
        accepted = theta_between_move(state, x, h, delta_all, rng,
                                      moves.theta_proposal, moves.likelihood)
        if acceptance is not None:
            acceptance.record('theta_between', accepted)
        if state.epsilon[x, h]:
            accepted = theta_within_move(state, x, h, delta_all, rng,
                                         moves.theta_proposal,
                                         moves.likelihood)
            if acceptance is not None:
                acceptance.record('theta_within', accepted)
    if moves.scan == 'random':
        accepted = sum(
            nu_step(state, int(k), delta_all, rng, moves.nu_proposal,
                    moves.mrf_hyper, moves.likelihood)
            for k in rng.permutation(state.nu.size)
        )
    else:
        accepted = nu_sweep(state, delta_all, rng, moves.nu_proposal,
                            moves.mrf_hyper, moves.likelihood)
    if acceptance is not None:
        counts = acceptance.counts['nu']
        counts[0] += accepted
        counts[1] += state.nu.size
    logger.debug('coupling step: epsilon=%s', state.epsilon.tolist())
