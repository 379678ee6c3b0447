import argparse
import logging
import time
from pathlib import Path

from django.conf import settings

from core.exceptions import NumericalError
from core.management.base import (
    MultisingCommand,
    load_settings,
    versions,
)
from dataio.store import (
    read_grouped,
    summary_document,
    write_chain,
    write_json,
    write_ppi,
)
from graphsel.metrics import chain_correlation
from graphsel.summaries import ppi, summarize_chains
from sampler.config import ENGINES
from sampler.fb import selected_intervals
from sampler.runner import run_chains
from sampler.serializers import RunConfigSerializer

logger = logging.getLogger(__name__)

# Flags that override the config file when given.
OVERRIDES = ('engine', 'iterations', 'burn_in', 'thin', 'seed', 'sigma',
             'cutoff', 'fdr_bound', 'keep_lambda', 'tune_step_size',
             'log_every')


class Command(MultisingCommand):
    """Fit multiple Ising models to grouped binary data."""
    help = ('Run one or more MCMC chains and write the chains, the PPI '
            'table and the summary document.')

    def add_arguments(self, parser):
        parser.add_argument('data', help='Grouped binary data CSV.')
        parser.add_argument('--out', default=None,
                            help='Output directory; defaults to '
                                 'OUTPUT_ROOT/<data name>.')
        parser.add_argument('--config', default=None,
                            help='JSON file with run settings.')
        parser.add_argument('--engine', choices=ENGINES, default=None)
        parser.add_argument('--iterations', type=int, default=None)
        parser.add_argument('--burn-in', type=int, default=None)
        parser.add_argument('--thin', type=int, default=None)
        parser.add_argument('--seed', type=int, default=None)
        parser.add_argument('--sigma', type=float, default=None,
                            help='MALA step size.')
        parser.add_argument('--cutoff', type=float, default=None)
        parser.add_argument('--fdr-bound', type=float, default=None)
        parser.add_argument('--keep-lambda', default=None,
                            action=argparse.BooleanOptionalAction)
        parser.add_argument('--tune-step-size', default=None,
                            action=argparse.BooleanOptionalAction)
        parser.add_argument('--log-every', type=int, default=None)
        parser.add_argument('--chains', type=int, default=1)
        parser.add_argument('--workers', type=int, default=None)

    def run(self, *args, **options):
        data = read_grouped(options['data'])
        values = load_settings(options['config'])
        values.update({name: options[name] for name in OVERRIDES
                       if options[name] is not None})
        config = self.validated(RunConfigSerializer, values, p=data.p)
        out = Path(options['out'] or Path(
            settings.MULTISING['OUTPUT_ROOT'], Path(options['data']).stem
        ))
        started = time.perf_counter()
        chains = run_chains(data, config, options['chains'],
                            options['workers'])
        wall_time = time.perf_counter() - started
        for i, chain in enumerate(chains, start=1):
            write_chain(chain, out / f'chain_{i}.csv')
        summary = summarize_chains(chains, cutoff=config.cutoff,
                                   fdr_bound=config.fdr_bound)
        write_ppi(summary.ppi, out / 'ppi.csv')
        write_json(summary_document(
            summary, data.columns,
            config=config.as_dict(),
            chains=len(chains),
            meta={
                'data': str(options['data']),
                'seed': config.seed,
                'wall_time': wall_time,
                'chain_wall_time': [chain.meta['wall_time']
                                    for chain in chains],
                'seconds_per_iteration': [
                    chain.meta['seconds_per_iteration'] for chain in chains
                ],
                'acceptance_rates': [chain.meta['acceptance_rates']
                                     for chain in chains],
                'versions': versions(),
            },
            convergence=_convergence(chains, config.burn_in),
            laplace_intervals=_laplace_intervals(data, summary, config),
        ), out / 'summary.json')
        counts = ', '.join(
            f'{label}: {count}' for label, count in
            zip(summary.selected.labels, summary.selected.edge_counts())
        )
        self.success(f'{config.engine} fit of {len(chains)} chain(s) written '
                     f'to {out}; selected edges {counts}')


def _laplace_intervals(data, summary, config):
    """Normal-approximation intervals of lambda under the selected graphs."""
    if not config.exact:
        return None
    try:
        return selected_intervals(data, summary.selected,
                                  config.dy_hyper(data.p))
    except NumericalError as exc:
        logger.warning('No Laplace intervals for the selected graphs: %s',
                       exc)
        return None


def _convergence(chains, burn_in):
    """PPI correlation of every later chain with the first one."""
    if len(chains) < 2:
        return []
    first = ppi(chains[0], burn_in)
    return [chain_correlation(first, ppi(chain, burn_in))
            for chain in chains[1:]]
