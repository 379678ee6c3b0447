import argparse

from core.exceptions import ConfigError
from core.management.base import MultisingCommand, versions
from dataio.store import read_chain, summary_document, write_json, write_ppi
from graphsel.serializers import QuantileGraphsSerializer
from graphsel.summaries import (
    DEFAULT_LEVELS,
    MEAN,
    quantile_graphs,
    summarize_chains,
    top_models,
)


def _level(value):
    if value == MEAN:
        return MEAN
    try:
        return float(value)
    except ValueError:
        raise ConfigError(f'Quantile level {value!r} is neither a number '
                          f'nor {MEAN!r}.') from None


class Command(MultisingCommand):
    """Recompute the posterior summaries of saved chains."""
    help = ('Select graphs from saved chains at a given burn-in and cutoff; '
            'several chains of one fit are pooled.')

    def add_arguments(self, parser):
        parser.add_argument('chains', nargs='+', help='Chain CSV files.')
        parser.add_argument('--burn-in', type=int, default=None,
                            help="Defaults to the chains' own burn-in.")
        parser.add_argument('--cutoff', type=float, default=0.5)
        parser.add_argument('--fdr-bound', type=float, default=0.5)
        parser.add_argument('--quantiles', nargs='*', default=None,
                            help="Levels such as 0.25 mean 0.75.")
        parser.add_argument('--blocks', type=int, default=None)
        parser.add_argument('--clamp-mean', default=True,
                            action=argparse.BooleanOptionalAction,
                            help='Keep the mean graph between the lowest '
                                 'and highest quantile graphs.')
        parser.add_argument('--top', type=int, default=0,
                            help='Report the most visited graphs.')
        parser.add_argument('--out', required=True,
                            help='Summary JSON file to write.')
        parser.add_argument('--ppi', default=None,
                            help='Optional PPI CSV file to write.')

    def run(self, *args, **options):
        chains = [read_chain(path) for path in options['chains']]
        burn_in = options['burn_in']
        summary = summarize_chains(chains, burn_in, options['cutoff'],
                                   options['fdr_bound'])
        extra = {
            'chains': len(chains),
            'sources': [str(path) for path in options['chains']],
            'meta': {'versions': versions()},
        }
        if options['quantiles'] is not None:
            levels = tuple(_level(value) for value in options['quantiles'])
            graphs = quantile_graphs(chains[0], burn_in,
                                     levels or DEFAULT_LEVELS,
                                     options['cutoff'], options['blocks'],
                                     options['clamp_mean'])
            extra['quantile_graphs'] = QuantileGraphsSerializer(graphs).data
        if options['top']:
            extra['top_models'] = [
                [{'edges': [list(edge) for edge in graph.edges()],
                  'frequency': frequency}
                 for graph, frequency in models]
                for models in top_models(chains[0], burn_in, options['top'])
            ]
        write_json(summary_document(summary, chains[0].columns, **extra),
                   options['out'])
        if options['ppi']:
            write_ppi(summary.ppi, options['ppi'])
        self.success(
            f'Selected {summary.selected.edge_counts()} edges at cutoff '
            f'{options["cutoff"]}; expected FDR {summary.fdr}'
        )
