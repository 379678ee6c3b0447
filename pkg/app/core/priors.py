"""Prior log-densities for graphs, canonical parameters and coupling.

Covers the Markov random field prior that links the same edge across
groups, the Diaconis-Ylvisaker kernel used by the exact engine, the Normal
spike-and-slab prior used by the quasi-likelihood engine, the Gamma
spike-and-slab prior on graph similarity and the logit-Beta prior on the
edge-specific sparsity parameters.
"""
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import betaln, logsumexp
from scipy.stats import bernoulli, gamma, norm

from .exceptions import ConfigError
from .ising import check_exact_limit, log_psi
from .models import EdgeIndicators, n_pairs

MAX_JOINT_GROUPS = 12


@dataclass(frozen=True)
class MrfHyper:
    """Beta(a, b) shapes of the prior edge probability q_rj."""
    a: float = 1.0
    b: float = 3.0

    def __post_init__(self):
        if self.a <= 0 or self.b <= 0:
            raise ConfigError('Beta shapes a and b must be positive.')


@dataclass(eq=False)
class DyHyper:
    """Fictive marginal counts s and fictive sample size g."""
    s: np.ndarray
    g: float

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float).reshape(-1)
        self.g = float(self.g)
        if self.g <= 0:
            raise ConfigError('The fictive sample size g must be positive.')
        if (self.s <= 0).any() or (self.s >= self.g).any():
            raise ConfigError('Fictive counts s must lie in (0, g).')
        p = (math.isqrt(1 + 8 * self.s.size) - 1) // 2
        if p + n_pairs(p) != self.s.size:
            raise ConfigError('s does not hold p + p(p-1)/2 entries.')
        self._p = p

    @property
    def p(self):
        return self._p

    def updated(self, counts):
        """Return the conjugate update (s + y, g + n)."""
        return DyHyper(self.s + counts.vector(), self.g + counts.n)


@dataclass(frozen=True)
class SpikeSlabHyper:
    """Slab variance rho and spike variance gamma."""
    rho: float = 2.0
    gamma: float = 0.5

    def __post_init__(self):
        if not self.rho > self.gamma > 0:
            raise ConfigError('Spike-and-slab variances need rho > gamma > 0.')

    @classmethod
    def default(cls, p):
        """Moderate sparsity for p <= 10, stronger sparsity above."""
        if p <= 10:
            return cls(rho=2.0, gamma=0.5)
        return cls(rho=10.0, gamma=0.1)


def mrf_edge_logprob(delta, delta_other, nu_rj, theta_x):
    """Return log p(delta_rj,x | delta_rj,-x, nu_rj, theta_x)."""
    theta_x = np.asarray(theta_x, dtype=float).reshape(-1)
    if (theta_x < 0).any():
        raise ValueError('Graph similarities must be nonnegative.')
    eta = nu_rj + theta_x @ np.asarray(delta_other, dtype=float).reshape(-1)
    return float(delta * eta - np.logaddexp(0.0, eta))


def mrf_graph_logprob(delta_x, delta_others, nu, theta_x):
    """Return log p(delta_x | delta_-x, nu, theta_x) summed over all pairs.

    ``delta_others`` holds one row of edge bits per other group, in the
    same order as ``theta_x``.
    """
    bits = _bits(delta_x).astype(float)
    theta_x = np.asarray(theta_x, dtype=float).reshape(-1)
    others = np.asarray(
        [_bits(d) for d in delta_others], dtype=float
    ).reshape(theta_x.size, -1)
    nu = np.asarray(nu, dtype=float)
    if nu.size != bits.size or others.shape[1] not in (bits.size, 0):
        raise ValueError('Edge vectors of different lengths.')
    if (theta_x < 0).any():
        raise ValueError('Graph similarities must be nonnegative.')
    eta = nu + (theta_x @ others if theta_x.size else 0.0)
    return float(np.sum(bits * eta - np.logaddexp(0.0, eta)))


@lru_cache(maxsize=16)
def _group_configs(q):
    k = np.arange(1 << q)
    return ((k[:, None] >> np.arange(q)) & 1).astype(float)


def mrf_joint_logprob(delta_all, nu, theta):
    """Return log p(delta_rj | nu_rj, theta) of every edge's group vector.

    The normalizer sums over all 2^q cross-group configurations; the
    conditional of one group given the others is ``mrf_edge_logprob``.
    """
    d = np.asarray(delta_all, dtype=float)
    q = d.shape[0]
    if q > MAX_JOINT_GROUPS:
        raise ConfigError(
            f'The joint coupling likelihood supports at most '
            f'{MAX_JOINT_GROUPS} groups; use the pseudo likelihood.'
        )
    theta = np.asarray(theta, dtype=float)
    configs = _group_configs(q)
    quad = 0.5 * np.einsum('kx,xh,kh->k', configs, theta, configs)
    log_c = logsumexp(
        np.outer(nu, configs.sum(axis=1)) + quad[None, :], axis=1
    )
    observed = 0.5 * np.einsum('xm,xh,hm->m', d, theta, d)
    return nu * d.sum(axis=0) + observed - log_c


def mrf_pseudo_logprob(delta_all, nu, theta):
    """Return the per-edge sum over groups of the conditional log-probs."""
    d = np.asarray(delta_all, dtype=float)
    theta = np.array(theta, dtype=float)
    np.fill_diagonal(theta, 0.0)
    eta = nu[None, :] + theta @ d
    return np.sum(d * eta - np.logaddexp(0.0, eta), axis=0)


def coupling_loglik(delta_all, nu, theta, likelihood='joint'):
    """Dispatch to the joint or pseudo per-edge coupling likelihood."""
    if likelihood == 'joint':
        return mrf_joint_logprob(delta_all, nu, theta)
    if likelihood == 'pseudo':
        return mrf_pseudo_logprob(delta_all, nu, theta)
    raise ConfigError(f'Unknown coupling likelihood {likelihood!r}.')


def dy_log_kernel(lam, hyper, delta):
    """Return the unnormalized Diaconis-Ylvisaker log-density of lam."""
    bits = _bits(delta).astype(float)
    p = lam.p
    restricted = lam.restrict(bits)
    return float(
        lam.main @ hyper.s[:p]
        + restricted.inter @ hyper.s[p:]
        - hyper.g * log_psi(restricted)
    )


def spike_slab_logpdf(lam_row, delta_row, hyper):
    """Return the Normal spike-and-slab log-density, entry by entry.

    Entries with delta = 1 use the slab variance rho, the others the spike
    variance gamma.
    """
    lam_row = np.asarray(lam_row, dtype=float)
    delta_row = np.asarray(delta_row)
    if lam_row.shape != delta_row.shape:
        raise ValueError('Parameter and indicator rows differ in length.')
    var = np.where(delta_row == 1, hyper.rho, hyper.gamma)
    return float(np.sum(norm.logpdf(lam_row, 0.0, np.sqrt(var))))


def theta_prior_logpdf(theta_xh, epsilon_xh, alpha, beta):
    """Return the point-mass / Gamma(alpha, rate beta) log-density."""
    if theta_xh < 0:
        raise ValueError('Graph similarity must be nonnegative.')
    if not epsilon_xh:
        return 0.0 if theta_xh == 0 else -math.inf
    return float(gamma.logpdf(theta_xh, alpha, scale=1.0 / beta))


def epsilon_logprior(epsilon_xh, omega):
    """Return the Bernoulli(omega) log-probability of a relatedness flag."""
    return float(bernoulli.logpmf(int(epsilon_xh), omega))


def nu_logpdf(nu_rj, a, b):
    """Return the logit-Beta(a, b) log-density of nu_rj."""
    nu_rj = np.asarray(nu_rj, dtype=float)
    out = -betaln(a, b) + a * nu_rj - (a + b) * np.logaddexp(0.0, nu_rj)
    return float(out) if out.ndim == 0 else out


def default_dy_hyper(p, g=0.02):
    """Fictive counts of a table putting mass g / 2^p on every cell."""
    check_exact_limit(p)
    s = np.concatenate([np.full(p, g / 2.0), np.full(n_pairs(p), g / 4.0)])
    return DyHyper(s, g)


def _bits(delta):
    if isinstance(delta, EdgeIndicators):
        return delta.bits
    return np.asarray(delta).reshape(-1)
