"""Exact-likelihood sampler over graphs with canonical parameters
integrated out.

The marginal likelihood of a graph is a ratio of Diaconis-Ylvisaker
normalizing constants, each approximated by Laplace's method around the
mode of the kernel restricted to the main effects and the active
interactions. Graph moves flip one uniformly chosen edge of one group.
"""
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from core.exceptions import NumericalError
from core.ising import cell_blocks, check_exact_limit, marginal_counts
from core.models import CanonicalParams, EdgeIndicators, n_pairs, pair_index
from core.priors import DyHyper, mrf_edge_logprob

from .chain import ChainRecorder
from .coupling import CouplingMoves, metropolis_accept, update_coupling

logger = logging.getLogger(__name__)

NEWTON_TOL = 1e-8
NEWTON_MAX_ITER = 100
MAX_HALVINGS = 40
ROUNDING_SLACK = 1e-13
LOG_2PI = math.log(2 * math.pi)


@dataclass(eq=False)
class LaplaceResult:
    """Laplace estimate of a log normalizing constant.

    ``hessian`` is the negative Hessian of the kernel at the mode over the
    active coordinates ``active`` (main effects first).
    """
    log_c: float
    mode: CanonicalParams
    converged: bool
    iterations: int
    hessian: np.ndarray = None
    active: np.ndarray = None

    def covariance(self):
        return np.linalg.inv(self.hessian)


def _as_bits(delta):
    if isinstance(delta, EdgeIndicators):
        return delta.bits
    return np.asarray(delta, dtype=np.uint8).reshape(-1)


def _statistics(cells, rows, cols):
    z = cells.astype(float)
    return np.hstack([z, z[:, rows] * z[:, cols]])


def _moments(p, rows, cols, lam):
    """Return log Psi, E[T] and Cov[T] of the active statistics T."""
    energies = [
        _statistics(cells, rows, cols) @ lam for cells in cell_blocks(p)
    ]
    log_z = logsumexp(np.concatenate(energies))
    mean = np.zeros(lam.size)
    second = np.zeros((lam.size, lam.size))
    for cells, energy in zip(cell_blocks(p), energies):
        stats = _statistics(cells, rows, cols)
        weights = np.exp(energy - log_z)
        mean += weights @ stats
        second += (stats * weights[:, None]).T @ stats
    return float(log_z), mean, second - np.outer(mean, mean)


def laplace_log_normconst(s, g, delta, tol=NEWTON_TOL,
                          max_iter=NEWTON_MAX_ITER):
    """Approximate log of the integral of the Diaconis-Ylvisaker kernel.

    Damped Newton from lambda = 0 finds the kernel mode over the p main
    effects and the interactions switched on in ``delta``. The dimension
    of the Gaussian integral counts both.
    """
    hyper = s if isinstance(s, DyHyper) else DyHyper(s, g)
    s, g, p = hyper.s, hyper.g, hyper.p
    check_exact_limit(p)
    on = np.flatnonzero(_as_bits(delta))
    all_rows, all_cols = pair_index(p)
    rows, cols = all_rows[on], all_cols[on]
    active = np.concatenate([np.arange(p), p + on])
    target = s[active]

    lam = np.zeros(active.size)
    log_z, mean, cov = _moments(p, rows, cols, lam)
    value = lam @ target - g * log_z
    converged = False
    iterations = 0
    while True:
        grad = target - g * mean
        if np.max(np.abs(grad)) < tol:
            converged = True
            break
        if iterations >= max_iter:
            break
        iterations += 1
        try:
            step = np.linalg.solve(g * cov, grad)
        except np.linalg.LinAlgError:
            break
        t = 1.0
        for _ in range(MAX_HALVINGS):
            trial = lam + t * step
            trial_log_z, trial_mean, trial_cov = _moments(p, rows, cols,
                                                          trial)
            trial_value = trial @ target - g * trial_log_z
            if trial_value >= value - ROUNDING_SLACK * max(1.0, abs(value)):
                break
            t *= 0.5
        else:
            break
        lam, log_z, mean, cov, value = (trial, trial_log_z, trial_mean,
                                        trial_cov, trial_value)

    hessian = g * cov
    sign, logdet = np.linalg.slogdet(hessian)
    if sign <= 0:
        converged = False
        logdet = math.nan
    inter = np.zeros(n_pairs(p))
    inter[on] = lam[p:]
    return LaplaceResult(
        log_c=float(value + 0.5 * active.size * LOG_2PI - 0.5 * logdet),
        mode=CanonicalParams(lam[:p], inter),
        converged=converged,
        iterations=iterations,
        hessian=hessian,
        active=active,
    )


def log_marginal(counts, hyper, delta):
    """Return the log marginal likelihood of a graph for one group."""
    posterior = laplace_log_normconst(hyper.updated(counts), None, delta)
    prior = laplace_log_normconst(hyper, None, delta)
    if not (posterior.converged and prior.converged):
        raise NumericalError(
            f'Laplace approximation did not converge for edges '
            f'{EdgeIndicators(_as_bits(delta)).edges()}.'
        )
    return posterior.log_c - prior.log_c


def laplace_posterior(counts, hyper, delta):
    """Normal approximation (mode, covariance) of lambda given a graph."""
    result = laplace_log_normconst(hyper.updated(counts), None, delta)
    if not result.converged:
        raise NumericalError('Laplace approximation did not converge.')
    return result.mode, result.covariance()


def laplace_intervals(counts, hyper, delta, level=0.9):
    """Equal-tailed Normal intervals for the active canonical parameters.

    Returns (lower, upper) arrays over [main, inter]; inactive interactions
    are reported as the degenerate interval (0, 0).
    """
    mode, cov = laplace_posterior(counts, hyper, delta)
    p = mode.p
    on = np.flatnonzero(_as_bits(delta))
    active = np.concatenate([np.arange(p), p + on])
    center = mode.vector()
    half = np.zeros_like(center)
    half[active] = norm.ppf(0.5 + level / 2) * np.sqrt(np.diag(cov))
    return center - half, center + half


def selected_intervals(data, graphs, hyper, level=0.9):
    """Laplace intervals of every group's lambda given its selected graph."""
    out = []
    for group, graph in zip(data, graphs):
        lower, upper = laplace_intervals(marginal_counts(group), hyper, graph,
                                         level)
        out.append({'label': group.label, 'level': level,
                    'lower': lower.tolist(), 'upper': upper.tolist()})
    return out


class MarginalCache:
    """Bounded memo of log marginal likelihoods keyed by (group, graph)."""

    def __init__(self, counts, hypers, maxsize=4096):
        self.counts = counts
        self.hypers = hypers
        self._lookup = lru_cache(maxsize=maxsize)(self._compute)

    def _compute(self, x, key):
        bits = np.frombuffer(key, dtype=np.uint8)
        return log_marginal(self.counts[x], self.hypers[x], bits)

    def __call__(self, x, bits):
        return self._lookup(x, np.ascontiguousarray(bits, np.uint8).tobytes())

    def info(self):
        return self._lookup.cache_info()


@dataclass(eq=False)
class FbState:
    """Edge indicators of every group, coupling and cached marginals."""
    delta: np.ndarray
    coupling: object
    logml: np.ndarray
    failures: int = 0
    proposals: int = 0

    def graph(self, x):
        return EdgeIndicators(self.delta[x])

    def check_cache(self, cache, atol=1e-9):
        """Raise NumericalError if a cached marginal went stale."""
        for x in range(self.delta.shape[0]):
            fresh = log_marginal(cache.counts[x], cache.hypers[x],
                                 self.delta[x])
            if abs(fresh - self.logml[x]) > atol:
                raise NumericalError(f'Stale marginal for group {x}.')


def graph_log_ratio(state, x, k, new_logml):
    """Posterior log ratio of flipping pair k of group x; no proposal term."""
    coupling = state.coupling
    others = np.delete(state.delta[:, k], x)
    theta_x = np.delete(coupling.theta[x], x)
    old = int(state.delta[x, k])
    prior = mrf_edge_logprob(1 - old, others, coupling.nu[k], theta_x) \
        - mrf_edge_logprob(old, others, coupling.nu[k], theta_x)
    return new_logml - state.logml[x] + prior


def fb_graph_step(state, x, cache, rng):
    """Flip one uniformly chosen edge of group x with an MH test."""
    m = state.delta.shape[1]
    if not m:
        return False
    k = int(rng.integers(m))
    proposal = state.delta[x].copy()
    proposal[k] = 1 - proposal[k]
    state.proposals += 1
    try:
        new_logml = cache(x, proposal)
    except NumericalError as exc:
        state.failures += 1
        logger.warning('Rejected graph move for group %d: %s', x, exc)
        return False
    if metropolis_accept(graph_log_ratio(state, x, k, new_logml), rng):
        state.delta[x] = proposal
        state.logml[x] = new_logml
        return True
    return False


def initial_fb_state(data, config, cache):
    q, p = data.q, data.p
    m = n_pairs(p)
    delta = np.zeros((q, m), dtype=np.uint8)
    try:
        logml = np.array([cache(x, delta[x]) for x in range(q)])
    except NumericalError as exc:
        raise NumericalError(
            f'Cannot evaluate the empty graph marginal: {exc}') from exc
    return FbState(delta, config.initial_coupling(q, m, p), logml)


def run_fb_chain(data, config, rng=None):
    """Run the exact-likelihood chain and return its ChainOutput."""
    check_exact_limit(data.p)
    rng = np.random.default_rng(config.seed if rng is None else rng)
    counts = [marginal_counts(group) for group in data]
    hyper = config.dy_hyper(data.p)
    cache = MarginalCache(counts, [hyper] * data.q,
                          config.laplace_cache_size)
    state = initial_fb_state(data, config, cache)
    moves = CouplingMoves.from_config(config)
    recorder = ChainRecorder(config.engine, data, config)
    initial = {
        'delta': 'empty',
        'theta': state.coupling.theta.tolist(),
        'epsilon': state.coupling.epsilon.tolist(),
        'nu': state.coupling.nu[:1].tolist(),
    }
    logger.info('Starting %s chain: p=%d q=%d iterations=%d seed=%s',
                config.engine, data.p, data.q, config.iterations,
                config.seed)
    for t in range(1, config.iterations + 1):
        for x in range(data.q):
            for _ in range(config.sweeps):
                accepted = fb_graph_step(state, x, cache, rng)
                recorder.acceptance.record('graph', accepted)
        update_coupling(state.coupling, state.delta, rng, moves,
                        recorder.acceptance)
        recorder.step(t, state.delta, state.coupling)

    failure_rate = state.failures / state.proposals if state.proposals \
        else 0.0
    info = cache.info()
    logger.info('Finished %s chain: %s; %d Laplace failures; cache %d/%d',
                config.engine, recorder.acceptance, state.failures,
                info.hits, info.hits + info.misses)
    if failure_rate > config.laplace_failure_rate:
        raise NumericalError(
            f'Laplace failures in {failure_rate:.1%} of graph moves exceed '
            f'the {config.laplace_failure_rate:.1%} threshold.'
        )
    return recorder.finish(
        initial,
        laplace_failures=state.failures,
        laplace_failure_rate=failure_rate,
        cache_hits=info.hits,
        cache_misses=info.misses,
        final_logml=state.logml.tolist(),
    )
