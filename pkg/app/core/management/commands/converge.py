from itertools import combinations

from core.exceptions import ConfigError
from core.management.base import MultisingCommand, load_settings
from dataio.store import read_chain, read_grouped, write_json
from graphsel.metrics import chain_correlation
from graphsel.summaries import ppi
from sampler.runner import run_chain
from sampler.serializers import RunConfigSerializer


class Command(MultisingCommand):
    """Compare the PPI tables of independently seeded chains."""
    help = ('Correlate the PPI tables of saved chains, or of chains run on '
            '--data with each of --seeds.')

    def add_arguments(self, parser):
        parser.add_argument('chains', nargs='*', help='Chain CSV files.')
        parser.add_argument('--data', default=None,
                            help='Grouped binary data CSV to fit.')
        parser.add_argument('--seeds', type=int, nargs='+', default=[1, 2])
        parser.add_argument('--config', default=None,
                            help='JSON file with run settings.')
        parser.add_argument('--burn-in', type=int, default=None)
        parser.add_argument('--out', default=None,
                            help='Optional JSON file for the correlations.')

    def run(self, *args, **options):
        if options['chains']:
            chains = [read_chain(path) for path in options['chains']]
            names = list(options['chains'])
        elif options['data']:
            data = read_grouped(options['data'])
            base = load_settings(options['config'])
            chains, names = [], []
            for seed in options['seeds']:
                config = self.validated(RunConfigSerializer,
                                        {**base, 'seed': seed}, p=data.p)
                chains.append(run_chain(data, config))
                names.append(f'seed {seed}')
        else:
            raise ConfigError('Give chain files or --data.')
        if len(chains) < 2:
            raise ConfigError('Convergence needs at least two chains.')
        tables = [ppi(chain, options['burn_in']) for chain in chains]
        pairs = []
        for (a, first), (b, second) in combinations(enumerate(tables), 2):
            value = chain_correlation(first, second)
            pairs.append({'first': names[a], 'second': names[b],
                          'correlation': value})
            shown = f'{value:.4f}' if isinstance(value, float) else value
            self.stdout.write(f'{names[a]} vs {names[b]}: {shown}')
        if options['out']:
            write_json({'pairs': pairs}, options['out'])
        self.success(f'Compared {len(chains)} chains.')
