"""Graph export as edge lists, DOT or GraphML.

Every group gets its own file; a combined file holds the union of all
edges, with ``shared`` set on the edges present in every group.
"""
import logging
from pathlib import Path

import networkx as nx

from core.exceptions import ConfigError, DataError
from core.models import EdgeIndicators

logger = logging.getLogger(__name__)

FORMATS = {
    'edgelist': 'tsv',
    'dot': 'dot',
    'graphml': 'graphml',
}


def _node_names(p, columns):
    columns = tuple(columns or ())
    return columns if len(columns) == p else \
        tuple(f'z{r}' for r in range(1, p + 1))


def to_networkx(graph, columns=None):
    """Undirected graph on named nodes; edges keep their (r, j) label."""
    names = _node_names(graph.p, columns)
    out = nx.Graph()
    out.add_nodes_from(names)
    for r, j in graph.edges():
        out.add_edge(names[r - 1], names[j - 1], label=f'{r},{j}')
    return out


def combined_graph(selected, columns=None):
    """Union of the selected graphs with per-edge group membership."""
    names = _node_names(selected.p, columns)
    shared = set(selected.shared_edges().edges())
    out = nx.Graph()
    out.add_nodes_from(names)
    for label, graph in zip(selected.labels, selected):
        for r, j in graph.edges():
            u, v = names[r - 1], names[j - 1]
            if out.has_edge(u, v):
                out[u][v]['groups'] += f',{label}'
            else:
                out.add_edge(u, v, label=f'{r},{j}', groups=str(label),
                             shared=(r, j) in shared)
    return out


def write_graph(graph, path, fmt):
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if fmt == 'edgelist':
            nx.write_edgelist(graph, path, delimiter='\t', data=False)
        elif fmt == 'dot':
            nx.nx_pydot.write_dot(graph, path)
        elif fmt == 'graphml':
            nx.write_graphml(graph, path)
        else:
            raise ConfigError(f'Unknown graph format {fmt!r}; choose from '
                              f'{sorted(FORMATS)}.')
    except OSError as exc:
        raise ConfigError(f'Cannot write {path}: {exc}') from exc
    return path


def export_graphs(selected, directory, fmt='edgelist', columns=None,
                  prefix='graph'):
    """Write one file per group and a combined file; return the paths."""
    if fmt not in FORMATS:
        raise ConfigError(f'Unknown graph format {fmt!r}; choose from '
                          f'{sorted(FORMATS)}.')
    directory = Path(directory)
    ext = FORMATS[fmt]
    paths = [
        write_graph(to_networkx(graph, columns),
                    directory / f'{prefix}_{label}.{ext}', fmt)
        for label, graph in zip(selected.labels, selected)
    ]
    paths.append(write_graph(combined_graph(selected, columns),
                             directory / f'{prefix}_combined.{ext}', fmt))
    logger.info('Exported %d graphs as %s to %s', selected.q, fmt, directory)
    return paths


def read_edgelist(path, columns):
    """Rebuild EdgeIndicators from an exported edge list."""
    index = {name: r for r, name in enumerate(columns, start=1)}
    edges = []
    with open(path) as stream:
        for line in stream:
            if not line.strip():
                continue
            u, v = line.rstrip('\n').split('\t')[:2]
            if u not in index or v not in index:
                raise DataError(f'Unknown node in edge ({u}, {v}).')
            edges.append((index[u], index[v]))
    return EdgeIndicators.from_edges(len(columns), edges)
