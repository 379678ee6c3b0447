from pathlib import Path

from core.exceptions import ConfigError
from core.management.base import MultisingCommand
from dataio.store import read_json, write_grouped, write_json
from simlab.scenarios import (
    KINDS,
    build_scenario,
    scenario_from_edges,
    simulate_dataset,
)


class Command(MultisingCommand):
    """Simulate grouped binary data from scale-free Ising models."""
    help = 'Draw a scenario and Gibbs-sample a grouped data set from it.'

    def add_arguments(self, parser):
        parser.add_argument('--kind', default='A',
                            help=f'Sharing pattern, one of {KINDS}.')
        parser.add_argument('--p', type=int, default=10)
        parser.add_argument('--q', type=int, default=4)
        parser.add_argument('--n', type=int, default=100,
                            help='Observations per group.')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--attachment', type=int, default=None)
        parser.add_argument('--main-effect', type=float, default=None)
        parser.add_argument('--interaction', type=float, default=None)
        parser.add_argument('--gibbs-burn-in', type=int, default=None)
        parser.add_argument('--gibbs-thin', type=int, default=None)
        parser.add_argument('--edges', default=None,
                            help='JSON file with one edge list per group.')
        parser.add_argument('--out', required=True,
                            help='Grouped data CSV to write.')
        parser.add_argument('--truth', default=None,
                            help='JSON file for the true graphs; defaults '
                                 'to <out>.truth.json.')

    def run(self, *args, **options):
        effects = {'main_effect': options['main_effect'],
                   'interaction': options['interaction']}
        if options['edges']:
            edge_lists = read_json(options['edges'])
            if not isinstance(edge_lists, list):
                raise ConfigError('The edges file holds a list of edge '
                                  'lists, one per group.')
            scenario = scenario_from_edges(options['kind'], options['p'],
                                           edge_lists, options['n'],
                                           **effects)
        else:
            scenario = build_scenario(options['kind'], options['p'],
                                      options['q'], options['seed'],
                                      options['n'],
                                      attachment=options['attachment'],
                                      **effects)
        data = simulate_dataset(scenario, burn_in=options['gibbs_burn_in'],
                                thin=options['gibbs_thin'],
                                seed=options['seed'])
        out = write_grouped(data, options['out'])
        truth = Path(options['truth'] or f'{out}.truth.json')
        write_json({
            'kind': scenario.kind,
            'p': scenario.p,
            'q': scenario.q,
            'seed': options['seed'],
            'labels': scenario.labels,
            'columns': list(data.columns),
            'edges': [[list(edge) for edge in graph.edges()]
                      for graph in scenario.graphs],
            'params': [params.vector() for params in scenario.params],
        }, truth)
        self.success(
            f'Simulated scenario {scenario.kind} with p={scenario.p}, '
            f'q={scenario.q}: {out} (truth in {truth})'
        )
