"""Files written and read by the command-line tools.

Grouped binary data is one CSV with a ``group`` column. A chain is a
columnar CSV, one row per recorded iteration, plus a JSON sidecar with
its accumulators and metadata. Summaries are JSON documents.
"""
import logging
from pathlib import Path

import numpy as np
import pandas as pd
from rest_framework.exceptions import ParseError
from rest_framework.parsers import JSONParser
from rest_framework.renderers import JSONRenderer

from core.exceptions import ConfigError, DataError
from core.models import (
    BinaryDataset,
    EdgeIndicators,
    GroupedData,
    pair_labels,
)
from graphsel.serializers import ChainSummarySerializer
from graphsel.summaries import SelectedGraphs
from sampler.chain import ChainOutput

logger = logging.getLogger(__name__)

GROUP_COLUMN = 'group'


def render_json(data):
    return JSONRenderer().render(data, renderer_context={'indent': 2})


def write_json(data, path):
    path = Path(path)
    _writable(path)
    path.write_bytes(render_json(data) + b'\n')
    return path


def read_json(path):
    try:
        with open(path, 'rb') as stream:
            return JSONParser().parse(stream)
    except FileNotFoundError as exc:
        raise DataError(f'No such file: {path}.') from exc
    except ParseError as exc:
        raise DataError(f'{path} is not valid JSON: {exc}') from exc


def _writable(path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f'Cannot write to {path.parent}: {exc}') from exc


def write_grouped(data, path):
    """Write every group's rows under a leading group column."""
    path = Path(path)
    _writable(path)
    frames = [
        pd.DataFrame(group.rows, columns=list(group.columns)).assign(
            **{GROUP_COLUMN: group.label}
        )
        for group in data
    ]
    frame = pd.concat(frames, ignore_index=True)
    frame = frame[[GROUP_COLUMN, *data.columns]]
    frame.to_csv(path, index=False)
    return path


def read_grouped(path, group_column=GROUP_COLUMN):
    """Read a grouped binary CSV; groups keep their order of appearance."""
    try:
        frame = pd.read_csv(path, dtype={group_column: str})
    except FileNotFoundError as exc:
        raise DataError(f'No such data file: {path}.') from exc
    if group_column not in frame.columns:
        raise DataError(f'{path} has no {group_column!r} column.')
    if frame.isna().any().any():
        raise DataError(f'{path} has missing values.')
    columns = tuple(c for c in frame.columns if c != group_column)
    groups = [
        BinaryDataset(frame.loc[frame[group_column] == label,
                                list(columns)].to_numpy(),
                      label, columns)
        for label in pd.unique(frame[group_column])
    ]
    return GroupedData(groups)


def _group_pairs(q):
    return list(zip(*np.triu_indices(q, 1)))


def chain_frame(chain):
    """One row per recorded iteration with delta, theta, epsilon, nu, lambda.

    Edge columns carry the 1-based (r, j) label of the pair.
    """
    edges = [f'{r}_{j}' for r, j in pair_labels(chain.p)]
    pairs = _group_pairs(chain.q)
    blocks = [pd.DataFrame({'iteration': chain.iterations})]
    blocks.append(pd.DataFrame(
        chain.delta.reshape(chain.draws, -1),
        columns=[f'delta_{label}_{edge}'
                 for label in chain.labels for edge in edges],
    ))
    for name in ('theta', 'epsilon'):
        values = getattr(chain, name)
        blocks.append(pd.DataFrame(
            np.stack([values[:, x, h] for x, h in pairs], axis=1)
            if pairs else np.zeros((chain.draws, 0)),
            columns=[f'{name}_{chain.labels[x]}_{chain.labels[h]}'
                     for x, h in pairs],
        ))
    blocks.append(pd.DataFrame(chain.nu,
                               columns=[f'nu_{edge}' for edge in edges]))
    if chain.lam is not None:
        params = [f'{r}_{r}' for r in range(1, chain.p + 1)] + edges
        blocks.append(pd.DataFrame(
            chain.lam.reshape(chain.draws, -1),
            columns=[f'lambda_{label}_{name}'
                     for label in chain.labels for name in params],
        ))
    return pd.concat(blocks, axis=1)


def write_chain(chain, path):
    """Write ``<path>`` as the sample CSV and ``<path>.json`` beside it."""
    path = Path(path)
    _writable(path)
    chain_frame(chain).to_csv(path, index=False)
    write_json({
        'engine': chain.engine,
        'labels': chain.labels,
        'columns': list(chain.columns),
        'burn_in': chain.burn_in,
        'ppi_counts': chain.ppi_counts,
        'ppi_retained': chain.ppi_retained,
        'has_lambda': chain.lam is not None,
        'acceptance': chain.acceptance,
        'meta': chain.meta,
    }, sidecar(path))
    logger.info('Wrote %d draws of the %s chain to %s', chain.draws,
                chain.engine, path)
    return path


def sidecar(path):
    path = Path(path)
    return path.with_name(path.name + '.json')


def read_chain(path):
    """Rebuild a ChainOutput written by ``write_chain``."""
    info = read_json(sidecar(path))
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError as exc:
        raise DataError(f'No such chain file: {path}.') from exc
    labels = info['labels']
    q = len(labels)
    ppi_counts = np.asarray(info['ppi_counts'], dtype=np.int64)
    m = ppi_counts.shape[1]
    p = len(info['columns'])
    draws = len(frame)

    def block(prefix):
        return frame[[c for c in frame.columns
                      if c.startswith(prefix)]].to_numpy()

    def symmetric(values, dtype):
        out = np.zeros((draws, q, q), dtype=dtype)
        for k, (x, h) in enumerate(_group_pairs(q)):
            out[:, x, h] = out[:, h, x] = values[:, k]
        return out

    lam = None
    if info['has_lambda']:
        lam = block('lambda_').reshape(draws, q, p + m)
    return ChainOutput(
        engine=info['engine'],
        labels=labels,
        columns=tuple(info['columns']),
        iterations=frame['iteration'].to_numpy(),
        delta=block('delta_').reshape(draws, q, m),
        theta=symmetric(block('theta_'), float),
        epsilon=symmetric(block('epsilon_'), np.uint8),
        nu=block('nu_'),
        lam=lam,
        ppi_counts=ppi_counts,
        ppi_retained=info['ppi_retained'],
        burn_in=info['burn_in'],
        acceptance=info['acceptance'],
        meta=info['meta'],
    )


def write_ppi(table, path):
    """Write one row per group and edge with its inclusion probability."""
    path = Path(path)
    _writable(path)
    pd.DataFrame(list(table.rows()),
                 columns=['group', 'r', 'j', 'ppi']).to_csv(path, index=False)
    return path


def summary_document(summary, columns, **extra):
    """The JSON document written next to a fit or selection."""
    document = {
        'p': summary.ppi.p,
        'columns': list(columns),
        'summary': ChainSummarySerializer(summary).data,
    }
    document.update(extra)
    return document


def read_selected(path):
    """Rebuild the selected graphs and node names of a summary document."""
    document = read_json(path)
    try:
        p = document['p']
        selected = document['summary']['selected']
        graphs = [EdgeIndicators.from_edges(p, edges)
                  for edges in selected['edges']]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f'{path} is not a summary document: {exc}') from exc
    return (SelectedGraphs(graphs, selected['cutoff'], selected['labels']),
            tuple(document.get('columns') or ()))
