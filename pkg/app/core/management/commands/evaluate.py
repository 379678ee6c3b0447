import numpy as np

from core.exceptions import DataError
from core.management.base import MultisingCommand
from core.models import EdgeIndicators
from dataio.store import read_chain, read_json, read_selected, write_json
from graphsel.metrics import f1, mcc, per_group_scores
from graphsel.summaries import credible_intervals, interval_coverage


def read_truth(path):
    """True graphs (and parameters when present) of a simulated data set."""
    truth = read_json(path)
    try:
        graphs = [EdgeIndicators.from_edges(truth['p'], edges)
                  for edges in truth['edges']]
    except (KeyError, TypeError, ValueError) as exc:
        raise DataError(f'{path} is not a truth document: {exc}') from exc
    params = truth.get('params')
    return graphs, None if params is None else np.asarray(params)


class Command(MultisingCommand):
    """Score selected graphs against the true graphs of a simulation."""
    help = 'Report MCC and F1 of a summary document against the truth.'

    def add_arguments(self, parser):
        parser.add_argument('summary', help='Summary JSON of a fit.')
        parser.add_argument('--truth', required=True,
                            help='Truth JSON written by simulate.')
        parser.add_argument('--chain', default=None,
                            help='Chain with canonical parameter draws, for '
                                 'credible interval coverage.')
        parser.add_argument('--level', type=float, default=0.9)
        parser.add_argument('--out', default=None,
                            help='Optional JSON file for the scores.')

    def run(self, *args, **options):
        selected, _ = read_selected(options['summary'])
        graphs, params = read_truth(options['truth'])
        if len(graphs) != selected.q or graphs[0].p != selected.p:
            raise DataError('The truth and the summary describe different '
                            'groups or variables.')
        scores = {
            'mcc': mcc(graphs, selected),
            'f1': f1(graphs, selected),
            'groups': per_group_scores(graphs, selected),
        }
        for row in scores['groups']:
            self.stdout.write(
                f"{row['group']}: MCC {row['mcc']:.4f} F1 {row['f1']:.4f} "
                f"(TP {row['tp']}, FP {row['fp']}, FN {row['fn']})"
            )
        if options['chain']:
            if params is None:
                raise DataError('The truth document has no parameters.')
            intervals = credible_intervals(read_chain(options['chain']),
                                           level=options['level'])
            scores['coverage'] = interval_coverage(intervals, params)
            scores['level'] = options['level']
            self.stdout.write(f"Coverage of the {options['level']:.0%} "
                              f"intervals: {scores['coverage']:.3f}")
        if options['out']:
            write_json(scores, options['out'])
        self.success(f"MCC {scores['mcc']:.4f} F1 {scores['f1']:.4f}")
