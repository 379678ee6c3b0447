"""Simulation scenarios: scale-free graphs shared across groups.

Kind A gives every group the same graph, kind B a different graph per
group. Kinds C and D take four groups: C pairs them as (0, 1) and (2, 3),
D lets groups 0 to 2 share one graph while group 3 has its own.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from core.exceptions import ConfigError
from core.ising import gibbs_sample
from core.models import CanonicalParams, EdgeIndicators, GroupedData

logger = logging.getLogger(__name__)

KINDS = ('A', 'B', 'C', 'D')
MAX_RESAMPLES = 100


def _simulation_defaults():
    return settings.MULTISING['SIMULATION']


def barabasi_albert(p, m=1, rng=None):
    """Grow a preferential-attachment graph on p nodes.

    Starts from a clique of m + 1 nodes; every later node attaches m edges
    to earlier nodes with probability proportional to degree + 1.
    """
    if p < 2 or not 1 <= m < p:
        raise ConfigError(f'Preferential attachment needs p >= 2 and '
                          f'1 <= m < p, got p={p}, m={m}.')
    rng = np.random.default_rng(rng)
    degree = np.zeros(p, dtype=np.int64)
    edges = []
    for r in range(m + 1):
        for j in range(r):
            edges.append((r + 1, j + 1))
            degree[[r, j]] += 1
    for new in range(m + 1, p):
        weights = (degree[:new] + 1).astype(float)
        targets = rng.choice(new, size=m, replace=False,
                             p=weights / weights.sum())
        for j in targets:
            edges.append((new + 1, int(j) + 1))
            degree[[new, j]] += 1
    return EdgeIndicators.from_edges(p, edges)


def graphs_to_params(graphs, main_effect=None, interaction=None):
    """Canonical parameters with fixed values on the diagonal and edges."""
    defaults = _simulation_defaults()
    main_effect = defaults['main_effect'] if main_effect is None \
        else main_effect
    interaction = defaults['interaction'] if interaction is None \
        else interaction
    return [
        CanonicalParams(np.full(graph.p, float(main_effect)),
                        graph.bits * float(interaction))
        for graph in graphs
    ]


@dataclass(eq=False)
class Scenario:
    """True graphs and parameters of a simulation setting."""
    kind: str
    p: int
    q: int
    graphs: list
    params: list
    n_per_group: int = 100
    seed: object = None

    def __post_init__(self):
        if len(self.graphs) != self.q or len(self.params) != self.q:
            raise ConfigError('A scenario needs one graph and one parameter '
                              'set per group.')
        if any(graph.p != self.p for graph in self.graphs):
            raise ConfigError('Scenario graphs do not have p nodes.')

    @property
    def labels(self):
        return [str(x) for x in range(self.q)]

    def distinct_graphs(self):
        return len({graph for graph in self.graphs})

    def check(self):
        """Raise ConfigError unless the graphs follow the kind's pattern."""
        g = self.graphs
        if self.kind == 'A':
            ok = self.distinct_graphs() == 1
        elif self.kind == 'B':
            ok = self.distinct_graphs() == self.q
        elif self.kind == 'C':
            ok = self.q == 4 and g[0] == g[1] and g[2] == g[3] \
                and g[0] != g[2]
        elif self.kind == 'D':
            ok = self.q == 4 and g[0] == g[1] == g[2] and g[0] != g[3]
        else:
            ok = True
        if not ok:
            raise ConfigError(
                f'Graphs do not follow the sharing pattern of kind '
                f'{self.kind}.'
            )


def _distinct_draws(count, p, m, rng, taken=()):
    graphs = list(taken)
    for _ in range(count):
        for _ in range(MAX_RESAMPLES):
            graph = barabasi_albert(p, m, rng)
            if graph not in graphs:
                break
        else:
            raise ConfigError(
                f'Could not draw {count} distinct graphs on p={p} nodes.'
            )
        graphs.append(graph)
    return graphs[len(taken):]


def build_scenario(kind, p, q=4, rng=None, n_per_group=100, attachment=None,
                   main_effect=None, interaction=None):
    """Draw the scale-free graphs of a scenario and their parameters."""
    if kind not in KINDS:
        raise ConfigError(f'Unknown scenario kind {kind!r}.')
    if q < 2:
        raise ConfigError('A scenario needs at least two groups.')
    if kind in ('C', 'D') and q != 4:
        raise ConfigError(f'Scenario {kind} is defined for four groups.')
    m = _simulation_defaults()['attachment'] if attachment is None \
        else attachment
    seed = rng if isinstance(rng, (int, np.integer)) else None
    rng = np.random.default_rng(rng)
    if kind == 'A':
        graphs = [barabasi_albert(p, m, rng)] * q
    elif kind == 'B':
        graphs = _distinct_draws(q, p, m, rng)
    else:
        first, second = _distinct_draws(2, p, m, rng)
        shared = 2 if kind == 'C' else 3
        graphs = [first] * shared + [second] * (q - shared)
    scenario = Scenario(kind, p, q, list(graphs),
                        graphs_to_params(graphs, main_effect, interaction),
                        n_per_group, seed)
    scenario.check()
    logger.debug('Scenario %s on p=%d: %d distinct graphs, %s edges',
                 kind, p, scenario.distinct_graphs(),
                 [graph.count for graph in graphs])
    return scenario


def scenario_from_edges(kind, p, edge_lists, n_per_group=100,
                        main_effect=None, interaction=None):
    """Scenario with user-given 1-based edge lists, one per group.

    Kinds A to D are checked against their sharing pattern; any other
    kind name is accepted as is.
    """
    graphs = [EdgeIndicators.from_edges(p, edges) for edges in edge_lists]
    scenario = Scenario(str(kind), p, len(graphs), graphs,
                        graphs_to_params(graphs, main_effect, interaction),
                        n_per_group)
    scenario.check()
    return scenario


def group_seeds(q, seed):
    """Per-group seed sequences derived from one seed."""
    if isinstance(seed, (list, tuple)):
        if len(seed) != q:
            raise ConfigError(f'Expected {q} per-group seeds.')
        return [
            s if isinstance(s, np.random.SeedSequence)
            else np.random.SeedSequence(s)
            for s in seed
        ]
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(q)


def simulate_dataset(scenario, n_x=None, burn_in=None, thin=None,
                     seed=None):
    """Gibbs-sample every group's data from its canonical parameters.

    ``seed`` is an integer, a SeedSequence, or a list with one seed per
    group; each group is drawn from its own stream.
    """
    defaults = _simulation_defaults()
    n_x = scenario.n_per_group if n_x is None else n_x
    burn_in = defaults['gibbs_burn_in'] if burn_in is None else burn_in
    thin = defaults['gibbs_thin'] if thin is None else thin
    seeds = group_seeds(scenario.q,
                        scenario.seed if seed is None else seed)
    groups = [
        gibbs_sample(params, n_x, burn_in=burn_in, thin=thin, rng=seq,
                     label=label)
        for params, seq, label in zip(scenario.params, seeds,
                                      scenario.labels)
    ]
    return GroupedData(groups)
