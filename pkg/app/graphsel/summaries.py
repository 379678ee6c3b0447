"""Posterior summaries of a recorded chain.

Edge inclusion probabilities (PPI) are the fraction of post-burn-in
iterations in which an edge is present. Graphs are selected by a strict
threshold on them.
"""
import enum
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
from django.conf import settings

from core.exceptions import ConfigError
from core.models import (
    CanonicalParams,
    EdgeIndicators,
    nodes_from_pairs,
    pair_labels,
)

logger = logging.getLogger(__name__)

MEAN = 'mean'
DEFAULT_LEVELS = (0.25, MEAN, 0.75)


class Degenerate(str, enum.Enum):
    """Markers for summaries whose defining ratio has no value."""
    NO_DISCOVERIES = 'no-discoveries'
    CONSTANT = 'constant'

    def __str__(self):
        return self.value


@dataclass(eq=False)
class PpiTable:
    """Per-group, per-edge posterior inclusion probabilities."""
    values: np.ndarray
    burn_in: int
    retained: int
    labels: list = field(default_factory=list)
    columns: tuple = ()

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2:
            raise ValueError('A PPI table is a groups x pairs matrix.')
        if ((self.values < 0) | (self.values > 1)).any():
            raise ValueError('Inclusion probabilities must lie in [0, 1].')
        if not self.labels:
            self.labels = [str(x) for x in range(self.q)]

    @property
    def q(self):
        return self.values.shape[0]

    @property
    def m(self):
        return self.values.shape[1]

    @property
    def p(self):
        return nodes_from_pairs(self.m)

    def edge_labels(self):
        return pair_labels(self.p)

    def rows(self):
        """Yield one record per group and edge in canonical pair order."""
        for x, label in enumerate(self.labels):
            for k, (r, j) in enumerate(self.edge_labels()):
                yield {'group': label, 'r': r, 'j': j,
                       'ppi': float(self.values[x, k])}


@dataclass(eq=False)
class SelectedGraphs:
    """Point-estimate graph of every group and the cutoff behind it."""
    graphs: list
    cutoff: float
    labels: list = field(default_factory=list)

    def __post_init__(self):
        self.graphs = [
            graph if isinstance(graph, EdgeIndicators)
            else EdgeIndicators(graph)
            for graph in self.graphs
        ]
        if not self.labels:
            self.labels = [str(x) for x in range(len(self.graphs))]

    @property
    def q(self):
        return len(self.graphs)

    @property
    def p(self):
        return self.graphs[0].p

    def bits(self):
        """Return the (q, m) matrix of edge bits."""
        return np.stack([graph.bits for graph in self.graphs])

    def edge_counts(self):
        return [graph.count for graph in self.graphs]

    def shared_edges(self):
        """Edges present in every group's graph."""
        return EdgeIndicators(self.bits().min(axis=0))

    def __iter__(self):
        return iter(self.graphs)

    def __getitem__(self, x):
        return self.graphs[x]


@dataclass(eq=False)
class QuantileGraphs:
    """Selected graphs at several levels of the block inclusion frequency."""
    levels: tuple
    graphs: dict
    blocks: int
    cutoff: float

    def edge_counts(self):
        """Number of selected edges per level and group."""
        return {
            str(level): self.graphs[level].edge_counts()
            for level in self.levels
        }


def _resolve_burn_in(chain, burn_in):
    burn_in = chain.burn_in if burn_in is None else int(burn_in)
    total = chain.total_iterations
    if burn_in < 0 or burn_in >= total:
        raise ConfigError(
            f'Burn-in {burn_in} leaves no iterations out of {total}.'
        )
    return burn_in


def _retained(chain, burn_in, what='delta'):
    mask = chain.retained(burn_in)
    if not mask.any():
        raise ConfigError(
            f'No recorded draws after burn-in {burn_in}; lower the burn-in '
            f'or the thinning.'
        )
    return getattr(chain, what)[mask]


def ppi(chain, burn_in=None):
    """Return the PpiTable of a chain after discarding ``burn_in``.

    At the chain's own burn-in the running accumulator covers every
    iteration; any other burn-in is applied to the recorded draws.
    """
    burn_in = _resolve_burn_in(chain, burn_in)
    if burn_in == chain.burn_in and chain.ppi_retained:
        values = chain.ppi_counts / chain.ppi_retained
        retained = chain.ppi_retained
    else:
        draws = _retained(chain, burn_in)
        values = draws.mean(axis=0)
        retained = draws.shape[0]
    return PpiTable(values, burn_in, retained, list(chain.labels),
                    chain.columns)


def select_graphs(table, cutoff=0.5):
    """Keep the edges whose inclusion probability exceeds ``cutoff``."""
    if not 0 <= cutoff < 1:
        raise ConfigError('The selection cutoff must lie in [0, 1).')
    bits = (table.values > cutoff).astype(np.uint8)
    return SelectedGraphs(list(bits), cutoff, list(table.labels))


def expected_fdr(table, bound=0.5):
    """Average inclusion probability over edges with PPI at most ``bound``.

    Returns ``Degenerate.NO_DISCOVERIES`` when no edge qualifies.
    """
    values = table.values
    below = values <= bound
    if not below.any():
        return Degenerate.NO_DISCOVERIES
    return float(values[below].sum() / below.sum())


def sec_matrix(graphs):
    """Shared-edge counts: edge totals on the diagonal, overlaps off it."""
    bits = graphs.bits().astype(np.int64)
    return bits @ bits.T


def theta_ppi(chain, burn_in=None):
    """Posterior probability that each pair of groups is related."""
    burn_in = _resolve_burn_in(chain, burn_in)
    return _retained(chain, burn_in, 'epsilon').mean(axis=0)


def block_frequencies(chain, burn_in=None, blocks=None):
    """Inclusion frequencies within contiguous blocks of retained draws.

    Returns an array of shape (blocks, q, m).
    """
    blocks = blocks or settings.MULTISING['QUANTILE_BLOCKS']
    burn_in = _resolve_burn_in(chain, burn_in)
    draws = _retained(chain, burn_in)
    if draws.shape[0] < blocks:
        raise ConfigError(
            f'{draws.shape[0]} retained draws cannot fill {blocks} blocks.'
        )
    return np.stack([
        part.mean(axis=0) for part in np.array_split(draws, blocks, axis=0)
    ])


def quantile_graphs(chain, burn_in=None, levels=DEFAULT_LEVELS, cutoff=0.5,
                    blocks=None, clamp_mean=True):
    """Select graphs at quantiles (and the mean) of the block frequencies.

    With ``clamp_mean`` the mean level is clamped between the lowest and
    highest requested quantiles so that the edge sets stay nested across
    levels; every clamped frequency is logged.
    """
    freq = block_frequencies(chain, burn_in, blocks)
    quantiles = sorted(level for level in levels if level != MEAN)
    if any(not 0 <= level <= 1 for level in quantiles):
        raise ConfigError('Quantile levels must lie in [0, 1].')
    values = {
        level: np.quantile(freq, level, axis=0) for level in quantiles
    }
    if MEAN in levels:
        mean = freq.mean(axis=0)
        if clamp_mean and quantiles:
            clamped = np.clip(mean, values[quantiles[0]],
                              values[quantiles[-1]])
            moved = int(np.count_nonzero(clamped != mean))
            if moved:
                logger.warning(
                    'Clamped %d mean edge frequencies into the [%s, %s] '
                    'quantile band', moved, quantiles[0], quantiles[-1])
            mean = clamped
        values[MEAN] = mean
    graphs = {
        level: SelectedGraphs(
            list((values[level] > cutoff).astype(np.uint8)), cutoff,
            list(chain.labels),
        )
        for level in levels
    }
    return QuantileGraphs(tuple(levels), graphs, freq.shape[0], cutoff)


def top_models(chain, burn_in=None, k=5):
    """Most visited graphs of every group with their sample frequencies."""
    burn_in = _resolve_burn_in(chain, burn_in)
    draws = _retained(chain, burn_in)
    total = draws.shape[0]
    out = []
    for x in range(draws.shape[1]):
        visits = Counter(bytes(row) for row in draws[:, x])
        out.append([
            (EdgeIndicators(np.frombuffer(key, dtype=np.uint8)),
             count / total)
            for key, count in visits.most_common(k)
        ])
    return out


def credible_intervals(chain, burn_in=None, level=0.9):
    """Equal-tailed intervals of the canonical parameters.

    Returns (lower, upper), each of shape (q, p + m) in [main, inter]
    order. Needs a chain that kept its canonical parameter draws.
    """
    if chain.lam is None or not np.size(chain.lam):
        raise ConfigError('The chain did not record canonical parameters.')
    if not 0 < level < 1:
        raise ConfigError('The credible level must lie in (0, 1).')
    burn_in = _resolve_burn_in(chain, burn_in)
    draws = _retained(chain, burn_in, 'lam')
    tail = (1 - level) / 2
    lower, upper = np.quantile(draws, [tail, 1 - tail], axis=0)
    return lower, upper


def interval_coverage(intervals, truth):
    """Fraction of true parameters inside their credible interval."""
    lower, upper = intervals
    true = np.stack([
        params.vector() if isinstance(params, CanonicalParams)
        else np.asarray(params, dtype=float)
        for params in truth
    ])
    if true.shape != lower.shape:
        raise ValueError('Intervals and true parameters differ in shape.')
    return float(np.mean((lower <= true) & (true <= upper)))


@dataclass(eq=False)
class ChainSummary:
    """Everything reported for one chain at a given burn-in and cutoff."""
    ppi: PpiTable
    selected: SelectedGraphs
    theta_ppi: np.ndarray
    sec: np.ndarray
    fdr: object
    fdr_bound: float


def pooled_ppi(tables):
    """Combine the PPI tables of independent chains, weighted by draws."""
    first = tables[0]
    weights = [table.retained for table in tables]
    values = np.average([table.values for table in tables], axis=0,
                        weights=weights)
    return PpiTable(values, first.burn_in, sum(weights), list(first.labels),
                    first.columns)


def summarize(chain, burn_in=None, cutoff=0.5, fdr_bound=0.5):
    return summarize_chains([chain], burn_in, cutoff, fdr_bound)


def summarize_chains(chains, burn_in=None, cutoff=0.5, fdr_bound=0.5):
    """Summaries of one or more independent chains on the same data."""
    tables = [ppi(chain, burn_in) for chain in chains]
    table = tables[0] if len(tables) == 1 else pooled_ppi(tables)
    selected = select_graphs(table, cutoff)
    summary = ChainSummary(
        ppi=table,
        selected=selected,
        theta_ppi=np.mean([theta_ppi(chain, t.burn_in)
                           for chain, t in zip(chains, tables)], axis=0),
        sec=sec_matrix(selected),
        fdr=expected_fdr(table, fdr_bound),
        fdr_bound=fdr_bound,
    )
    logger.info('Selected %s edges per group at cutoff %.2f (FDR %s)',
                selected.edge_counts(), cutoff, summary.fdr)
    return summary
