"""Quasi-likelihood sampler: node-wise MALA on canonical parameters.

Each node r carries a logistic regression on the preceding nodes in which
only the main effect and the interactions whose edge is on enter the
linear predictor. Active coordinates move by one-at-a-time Langevin
proposals; interactions whose edge is off are redrawn from the spike,
which is their exact full conditional. Edge indicators then flip one by
one against the change in the node likelihood, the spike-and-slab density
and the cross-group prior.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from core.models import CanonicalParams, EdgeIndicators, n_pairs, row_slice
from core.priors import mrf_edge_logprob

from .chain import ChainRecorder
from .coupling import CouplingMoves, metropolis_accept, update_coupling

logger = logging.getLogger(__name__)

TARGET_ACCEPTANCE = 0.5
TUNER_DECAY = 0.6


@dataclass(eq=False)
class AbState:
    """Canonical parameters and edge indicators of every group."""
    lam: list
    delta: np.ndarray
    coupling: object
    step_size: float = 0.1

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError('The MALA step size must be positive.')

    def graph(self, x):
        return EdgeIndicators(self.delta[x])

    def row(self, x, r):
        return self.lam[x].row(r)

    def set_row(self, x, r, values):
        self.lam[x].main[r] = values[0]
        self.lam[x].inter[row_slice(r)] = values[1:]

    def is_finite(self):
        return all(params.is_finite() for params in self.lam)


def _variances(delta_row, hyper):
    """Prior variance of [main, interactions]; the main effect is slab."""
    return np.where(_mask(delta_row) == 1, hyper.rho, hyper.gamma)


def _mask(delta_row):
    return np.concatenate([[1], np.asarray(delta_row).reshape(-1)])


def _design(data, r):
    z = data.as_float()
    return np.hstack([np.ones((data.n, 1)), z[:, :r]]), z[:, r]


def _node_design(data, r, design=None):
    if design is None:
        return _design(data, r)
    return design[:, :r + 1], design[:, r + 1]


def _node_loglik(y, eta):
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def quasi_grad(lam_row, delta_row, data, r, hyper):
    """Gradient of the node-r log quasi-posterior.

    ``lam_row`` is [lambda_rr, lambda_r1, ..., lambda_r(r-1)] and
    ``delta_row`` holds the r edge bits of the interactions only.
    """
    lam_row = np.asarray(lam_row, dtype=float)
    if lam_row.size != r + 1 or np.size(delta_row) != r:
        raise ValueError(f'Row {r} takes {r + 1} parameters and {r} bits.')
    design, y = _design(data, r)
    mask = _mask(delta_row)
    resid = y - expit(design @ (lam_row * mask))
    return mask * (resid @ design) - lam_row / _variances(delta_row, hyper)


class NodeSampler:
    """Langevin updates of one node row with an incrementally kept predictor.

    ``design`` has a leading column of ones and zeroed columns for the
    edges that are off; ``eta`` is design @ row. Proposals have variance
    ``sigma``.
    """

    def __init__(self, design, y, row, variances, sigma):
        self.design = design
        self.y = y
        self.row = np.array(row, dtype=float)
        self.var = variances
        self.sigma = sigma
        self.eta = design @ self.row

    def _grad(self, c, eta, value):
        return (self.y - expit(eta)) @ self.design[:, c] - value / self.var[c]

    def update(self, c, rng):
        """Propose a new value of coordinate c; return the accept flag."""
        sigma = self.sigma
        scale = math.sqrt(sigma)
        current = self.row[c]
        mean_fwd = current + 0.5 * sigma * self._grad(c, self.eta, current)
        new = mean_fwd + scale * rng.standard_normal()
        eta_new = self.eta + (new - current) * self.design[:, c]
        mean_back = new + 0.5 * sigma * self._grad(c, eta_new, new)
        log_r = (
            _node_loglik(self.y, eta_new) - _node_loglik(self.y, self.eta)
            - (new * new - current * current) / (2 * self.var[c])
            + norm.logpdf(current, mean_back, scale)
            - norm.logpdf(new, mean_fwd, scale)
        )
        if metropolis_accept(log_r, rng):
            self.row[c] = new
            self.eta = eta_new
            return True
        return False


def mala_step(state, x, r, data, rng, hyper, acceptance=None,
              design=None):
    """One-at-a-time MALA over the active coordinates of node r in group x.

    Returns the list of accept flags in coordinate order.
    """
    design, y = _node_design(data, r, design)
    delta_row = state.delta[x, row_slice(r)]
    sampler = NodeSampler(design * _mask(delta_row), y, state.row(x, r),
                          _variances(delta_row, hyper), state.step_size)
    active = np.concatenate([[0], 1 + np.flatnonzero(delta_row)])
    flags = []
    for c in active:
        accepted = sampler.update(int(c), rng)
        flags.append(accepted)
        if acceptance is not None:
            acceptance.record('mala', accepted)
    state.set_row(x, r, sampler.row)
    return flags


def spike_refresh(state, x, r, rng, hyper):
    """Redraw the interactions of node r whose edge is off from N(0, gamma)."""
    sl = row_slice(r)
    off = np.flatnonzero(state.delta[x, sl] == 0)
    if off.size:
        values = state.lam[x].inter[sl]
        values[off] = rng.normal(0.0, math.sqrt(hyper.gamma), off.size)
        state.lam[x].inter[sl] = values


def flip_loglik_change(state, x, r, j, data, design=None):
    """Change in the node-r log-likelihood when edge (r, j) flips."""
    design, y = _node_design(data, r, design)
    sl = row_slice(r)
    row = state.row(x, r)
    eta = design @ (row * _mask(state.delta[x, sl]))
    shift = row[1 + j] * design[:, 1 + j]
    if state.delta[x, sl][j]:
        shift = -shift
    return _node_loglik(y, eta + shift) - _node_loglik(y, eta)


def flip_log_ratio(state, x, r, j, data, hyper, design=None):
    """Log posterior ratio of flipping edge (r, j) of group x, lambda fixed."""
    k = r * (r - 1) // 2 + j
    lam_k = state.lam[x].inter[k]
    old = int(state.delta[x, k])
    var_old = hyper.rho if old else hyper.gamma
    var_new = hyper.gamma if old else hyper.rho
    density = norm.logpdf(lam_k, 0.0, math.sqrt(var_new)) \
        - norm.logpdf(lam_k, 0.0, math.sqrt(var_old))
    coupling = state.coupling
    others = np.delete(state.delta[:, k], x)
    theta_x = np.delete(coupling.theta[x], x)
    prior = mrf_edge_logprob(1 - old, others, coupling.nu[k], theta_x) \
        - mrf_edge_logprob(old, others, coupling.nu[k], theta_x)
    likelihood = flip_loglik_change(state, x, r, j, data, design)
    return likelihood + density + prior


def delta_flip_step(state, x, r, j, data, rng, hyper, design=None):
    """Propose delta_rj = 1 - delta_rj and accept with the posterior ratio."""
    if not 0 <= j < r:
        raise ValueError(f'Pair ({r}, {j}) is not below the diagonal.')
    k = r * (r - 1) // 2 + j
    log_r = flip_log_ratio(state, x, r, j, data, hyper, design)
    if metropolis_accept(log_r, rng):
        state.delta[x, k] = 1 - state.delta[x, k]
        return True
    return False


def initial_ab_state(data, config):
    q, p = data.q, data.p
    m = n_pairs(p)
    return AbState(
        lam=[CanonicalParams.zeros(p) for _ in range(q)],
        delta=np.zeros((q, m), dtype=np.uint8),
        coupling=config.initial_coupling(q, m, p),
        step_size=config.sigma,
    )


class StepSizeTuner:
    """Robbins-Monro adaptation of log sigma towards a target acceptance.

    Active during burn-in only so the retained chain keeps a constant step.
    """

    def __init__(self, sigma, target=TARGET_ACCEPTANCE, decay=TUNER_DECAY):
        self.log_sigma = math.log(sigma)
        self.target = target
        self.decay = decay

    def update(self, t, rate):
        self.log_sigma += (rate - self.target) / t ** self.decay
        return math.exp(self.log_sigma)


def run_ab_chain(data, config, rng=None):
    """Run the quasi-likelihood chain and return its ChainOutput."""
    rng = np.random.default_rng(config.seed if rng is None else rng)
    hyper = config.spike_slab(data.p)
    state = initial_ab_state(data, config)
    moves = CouplingMoves.from_config(config)
    recorder = ChainRecorder(config.engine, data, config,
                             keep_lambda=config.keep_lambda)
    designs = [
        np.hstack([np.ones((group.n, 1)), group.as_float()])
        for group in data
    ]
    tuner = StepSizeTuner(config.sigma) if config.tune_step_size else None
    initial = {
        'lambda': 'zeros',
        'delta': 'empty',
        'theta': state.coupling.theta.tolist(),
        'epsilon': state.coupling.epsilon.tolist(),
        'nu': state.coupling.nu[:1].tolist(),
        'step_size': state.step_size,
    }
    logger.info('Starting %s chain: p=%d q=%d iterations=%d seed=%s',
                config.engine, data.p, data.q, config.iterations,
                config.seed)
    for t in range(1, config.iterations + 1):
        flags = []
        for x, group in enumerate(data):
            for r in range(data.p):
                flags += mala_step(state, x, r, group, rng, hyper,
                                   recorder.acceptance, designs[x])
                spike_refresh(state, x, r, rng, hyper)
                for j in range(r):
                    accepted = delta_flip_step(state, x, r, j, group, rng,
                                               hyper, designs[x])
                    recorder.acceptance.record('delta', accepted)
        update_coupling(state.coupling, state.delta, rng, moves,
                        recorder.acceptance)
        if tuner is not None and t <= config.burn_in and flags:
            state.step_size = tuner.update(t, float(np.mean(flags)))
            if t == config.burn_in:
                logger.info('MALA step size tuned to %.4g', state.step_size)
        recorder.step(t, state.delta, state.coupling, state.lam)

    logger.info('Finished %s chain: %s', config.engine, recorder.acceptance)
    return recorder.finish(initial, step_size=state.step_size)
