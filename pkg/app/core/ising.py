"""Exact and node-conditional Ising likelihoods and a Gibbs data generator.

Exact paths enumerate all 2^p binary cells and are limited to
``MULTISING['EXACT_P_LIMIT']`` nodes; the node-conditional (quasi)
likelihood has no such limit. Cell k of an enumeration holds bit r of k in
column r, so cell 0 is the all-zero baseline cell.
"""
import logging
from functools import lru_cache

import numpy as np
from django.conf import settings
from scipy.special import expit, logsumexp

from .exceptions import DimensionLimitError
from .models import BinaryDataset, MarginalCounts

logger = logging.getLogger(__name__)

CHUNK_BITS = 16


def exact_limit():
    """Largest p for which 2^p cells may be enumerated."""
    return int(settings.MULTISING['EXACT_P_LIMIT'])


def check_exact_limit(p):
    """Raise DimensionLimitError when 2^p enumeration is not allowed."""
    limit = exact_limit()
    if p > limit:
        raise DimensionLimitError(
            f'Exact Ising computations support at most {limit} '
            f'variables, got p={p}. Use the quasi-likelihood engine.'
        )


@lru_cache(maxsize=8)
def _cell_block(p, start, stop):
    k = np.arange(start, stop)
    cells = ((k[:, None] >> np.arange(p)) & 1).astype(np.uint8)
    cells.setflags(write=False)
    return cells


def cell_blocks(p):
    """Yield consecutive blocks of the 2^p x p cell table."""
    check_exact_limit(p)
    total = 1 << p
    step = 1 << CHUNK_BITS
    for start in range(0, total, step):
        yield _cell_block(p, start, min(total, start + step))


def cell_table(p):
    """Return the full 2^p x p table of binary cells."""
    return np.concatenate(list(cell_blocks(p)))


def _coupling_matrix(lam):
    matrix = lam.matrix()
    np.fill_diagonal(matrix, 0.0)
    return matrix


def cell_energies(lam):
    """Return the unnormalized log-probability of every cell."""
    if not lam.is_finite():
        raise ValueError('Canonical parameters must be finite.')
    matrix = _coupling_matrix(lam)
    energies = []
    for cells in cell_blocks(lam.p):
        z = cells.astype(float)
        energies.append(
            z @ lam.main + 0.5 * np.einsum('ij,ij->i', z @ matrix, z)
        )
    return np.concatenate(energies)


def log_psi(lam, p=None):
    """Return the log normalization constant of Ising(lam)."""
    if p is not None and p != lam.p:
        raise ValueError(f'Parameters are for p={lam.p}, not p={p}.')
    return float(logsumexp(cell_energies(lam)))


def exact_cell_probs(lam):
    """Return the probability of every cell of {0,1}^p under Ising(lam)."""
    energies = cell_energies(lam)
    return np.exp(energies - logsumexp(energies))


def marginal_counts(data):
    """Return counts of ones (diagonal) and joint ones (off-diagonal)."""
    z = data.rows.astype(np.int64)
    return MarginalCounts(z.T @ z, data.n)


def ising_loglik(data, lam):
    """Return the exact log-likelihood via sufficient statistics."""
    if data.p != lam.p:
        raise ValueError(
            f'Data has {data.p} variables but parameters have {lam.p}.'
        )
    counts = marginal_counts(data)
    return float(lam.vector() @ counts.vector() - data.n * log_psi(lam))


def node_conditional_loglik(data, lam_row, r):
    """Return the r-th node conditional log-likelihood.

    ``lam_row`` is [lambda_rr, lambda_r1, ..., lambda_r(r-1)]: only nodes
    preceding r enter the linear predictor.
    """
    if not 0 <= r < data.p:
        raise ValueError(f'Node index {r} out of range for p={data.p}.')
    lam_row = np.asarray(lam_row, dtype=float)
    if lam_row.size != r + 1:
        raise ValueError(
            f'Row {r} takes {r + 1} parameters, got {lam_row.size}.'
        )
    z = data.as_float()
    eta = lam_row[0] + z[:, :r] @ lam_row[1:]
    return float(np.sum(z[:, r] * eta - np.logaddexp(0.0, eta)))


def quasi_loglik(data, lam):
    """Return the product-of-node-conditionals log quasi-likelihood."""
    if data.p != lam.p:
        raise ValueError(
            f'Data has {data.p} variables but parameters have {lam.p}.'
        )
    return sum(
        node_conditional_loglik(data, lam.row(r), r) for r in range(lam.p)
    )


def gibbs_sample(lam, n, burn_in=1000, thin=10, rng=None, chains=None,
                 label='0', columns=()):
    """Draw n rows from Ising(lam) by single-site Gibbs sampling.

    A batch of ``chains`` independent chains (default min(n, 128)) is run
    side by side; each is burned in for ``burn_in`` sweeps and then
    contributes one row every ``thin`` sweeps.
    """
    if n < 1 or burn_in < 0 or thin < 1:
        raise ValueError('Require n >= 1, burn_in >= 0 and thin >= 1.')
    rng = np.random.default_rng(rng)
    p = lam.p
    chains = min(n, 128) if chains is None else int(chains)
    per_chain = -(-n // chains)
    matrix = _coupling_matrix(lam)
    state = rng.integers(0, 2, size=(chains, p)).astype(float)

    def sweep():
        u = rng.random((chains, p))
        for r in range(p):
            eta = lam.main[r] + state @ matrix[:, r]
            state[:, r] = u[:, r] < expit(eta)

    for _ in range(burn_in):
        sweep()
    draws = np.empty((per_chain, chains, p), dtype=np.uint8)
    for t in range(per_chain):
        for _ in range(thin):
            sweep()
        draws[t] = state
    logger.debug('Gibbs sampler drew %d rows from %d chains', n, chains)
    return BinaryDataset(draws.reshape(-1, p)[:n], label, columns)
