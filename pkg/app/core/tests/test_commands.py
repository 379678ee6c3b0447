"""
Tests for the management commands.
"""
import json
import os
import tempfile
from io import StringIO
from unittest.mock import patch

from django.core.management import CommandError, call_command
from django.test import SimpleTestCase

from core.exceptions import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_NUMERICAL,
    NumericalError,
)
from dataio.export import read_edgelist
from dataio.store import read_chain, read_grouped, read_json, read_selected

FAST_RUN = {'iterations': 30, 'burn_in': 10, 'thin': 1}


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.directory = tempfile.TemporaryDirectory()
        self.root = self.directory.name

    def tearDown(self):
        self.directory.cleanup()

    def path(self, *parts):
        return os.path.join(self.root, *parts)

    def call(self, *args, **options):
        out = StringIO()
        call_command(*args, stdout=out, **options)
        return out.getvalue()

    def simulate(self, name='data.csv', **options):
        values = dict(kind='B', p=3, q=2, n=40, seed=4, gibbs_burn_in=20,
                      gibbs_thin=1, out=self.path(name))
        values.update(options)
        self.call('simulate', **values)
        return self.path(name)

    def fit(self, data, out='fit', **options):
        values = dict(FAST_RUN, engine='fbs', out=self.path(out))
        values.update(options)
        return self.call('fit', data, **values)


class SimulateCommandTests(CommandTestCase):
    def test_writes_data_and_truth(self):
        data_path = self.simulate(p=4, q=3)
        data = read_grouped(data_path)
        self.assertEqual((data.q, data.p), (3, 4))
        self.assertEqual(data[0].n, 40)
        truth = read_json(data_path + '.truth.json')
        self.assertEqual(truth['kind'], 'B')
        self.assertEqual(len(truth['edges']), 3)
        self.assertEqual(len(truth['params'][0]), 4 + 6)

    def test_edges_file(self):
        with open(self.path('edges.json'), 'w') as stream:
            json.dump([[[2, 1]], [[3, 2]]], stream)
        data_path = self.simulate(kind='chain', edges=self.path('edges.json'),
                                  truth=self.path('truth.json'))
        truth = read_json(self.path('truth.json'))
        self.assertEqual(truth['edges'], [[[2, 1]], [[3, 2]]])
        self.assertEqual(read_grouped(data_path).q, 2)

    def test_invalid_scenario(self):
        with self.assertRaises(CommandError) as ctx:
            self.simulate(kind='C', q=3)
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)


class FitCommandTests(CommandTestCase):
    def test_artifacts(self):
        data = self.simulate()
        output = self.fit(data)
        self.assertIn('selected edges', output)
        for name in ('chain_1.csv', 'chain_1.csv.json', 'ppi.csv',
                     'summary.json'):
            self.assertTrue(os.path.exists(self.path('fit', name)), name)
        summary = read_json(self.path('fit', 'summary.json'))
        self.assertEqual(summary['config']['engine'], 'fbs')
        self.assertEqual(summary['config']['burn_in'], 10)
        self.assertEqual(summary['p'], 3)
        self.assertEqual(summary['summary']['ppi']['retained'], 20)
        self.assertIn('numpy', summary['meta']['versions'])
        self.assertGreater(summary['meta']['wall_time'], 0)
        self.assertEqual(read_chain(self.path('fit', 'chain_1.csv')).draws,
                         30)
        intervals = summary['laplace_intervals']
        self.assertEqual(len(intervals), 2)
        for entry in intervals:
            self.assertEqual(len(entry['lower']), 3 + 3)
            self.assertTrue(all(low <= high for low, high in
                                zip(entry['lower'], entry['upper'])))

    def test_rerun_identical_ppi(self):
        data = self.simulate()
        self.fit(data, out='first', seed=9)
        self.fit(data, out='second', seed=9)
        with open(self.path('first', 'ppi.csv'), 'rb') as a, \
                open(self.path('second', 'ppi.csv'), 'rb') as b:
            self.assertEqual(a.read(), b.read())

    def test_config_file_and_flags(self):
        data = self.simulate()
        with open(self.path('run.json'), 'w') as stream:
            json.dump({'engine': 'abs', 'iterations': 20, 'burn_in': 5,
                       'sigma': 0.3}, stream)
        self.call('fit', data, config=self.path('run.json'), iterations=25,
                  out=self.path('fit'))
        config = read_json(self.path('fit', 'summary.json'))['config']
        self.assertEqual(config['engine'], 'abs')
        self.assertEqual(config['iterations'], 25)
        self.assertEqual(config['sigma'], 0.3)

    def test_boolean_flags_switch_off_settings(self):
        """Test --no-keep-lambda overrides the keep_lambda default."""
        data = self.simulate()
        self.call('fit', data, '--no-keep-lambda', '--no-tune-step-size',
                  engine='abs', out=self.path('fit'), **FAST_RUN)
        config = read_json(self.path('fit', 'summary.json'))['config']
        self.assertFalse(config['keep_lambda'])
        self.assertFalse(config['tune_step_size'])
        self.assertIsNone(read_chain(self.path('fit', 'chain_1.csv')).lam)
        summary = read_json(self.path('fit', 'summary.json'))
        self.assertIsNone(summary['laplace_intervals'])

    def test_two_chains(self):
        data = self.simulate()
        self.fit(data, chains=2, workers=1)
        summary = read_json(self.path('fit', 'summary.json'))
        self.assertEqual(summary['chains'], 2)
        self.assertEqual(len(summary['convergence']), 1)
        self.assertEqual(summary['summary']['ppi']['retained'], 40)
        self.assertTrue(os.path.exists(self.path('fit', 'chain_2.csv')))

    def test_invalid_config(self):
        data = self.simulate()
        with self.assertRaises(CommandError) as ctx:
            self.fit(data, burn_in=30)
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)
        self.assertIn('iterations', str(ctx.exception))

    def test_exact_engine_dimension_limit(self):
        columns = ','.join(f'z{r}' for r in range(1, 22))
        with open(self.path('wide.csv'), 'w') as stream:
            stream.write(f'group,{columns}\n')
            for group in ('0', '1'):
                stream.write(group + ',0' * 21 + '\n')
        with self.assertRaises(CommandError) as ctx:
            self.fit(self.path('wide.csv'), engine='fb')
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)
        self.assertIn('ab or abs', str(ctx.exception))

    def test_missing_data(self):
        with self.assertRaises(CommandError) as ctx:
            self.fit(self.path('absent.csv'))
        self.assertEqual(ctx.exception.returncode, EXIT_DATA)

    def test_numerical_failure(self):
        data = self.simulate()
        with patch('core.management.commands.fit.run_chains') as run:
            run.side_effect = NumericalError('Laplace failures')
            with self.assertRaises(CommandError) as ctx:
                self.fit(data, engine='fb')
        self.assertEqual(ctx.exception.returncode, EXIT_NUMERICAL)


class SummaryCommandTests(CommandTestCase):
    def setUp(self):
        super().setUp()
        self.data = self.simulate()
        self.fit(self.data, engine='abs', keep_lambda=True)
        self.chain = self.path('fit', 'chain_1.csv')

    def test_select(self):
        self.call('select', self.chain, burn_in=15, cutoff=0.4,
                  quantiles=['0.25', 'mean', '0.75'], blocks=5, top=2,
                  out=self.path('select.json'), ppi=self.path('ppi.csv'))
        document = read_json(self.path('select.json'))
        self.assertEqual(document['summary']['ppi']['burn_in'], 15)
        self.assertEqual(document['summary']['selected']['cutoff'], 0.4)
        self.assertEqual(document['quantile_graphs']['levels'],
                         ['0.25', 'mean', '0.75'])
        self.assertLessEqual(len(document['top_models'][0]), 2)
        self.assertTrue(os.path.exists(self.path('ppi.csv')))

    def test_select_bad_level(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('select', self.chain, quantiles=['median'],
                      out=self.path('select.json'))
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)

    def test_evaluate(self):
        output = self.call('evaluate', self.path('fit', 'summary.json'),
                           truth=self.data + '.truth.json',
                           chain=self.chain, level=0.9,
                           out=self.path('scores.json'))
        scores = read_json(self.path('scores.json'))
        self.assertTrue(-1 <= scores['mcc'] <= 1)
        self.assertEqual([row['group'] for row in scores['groups']],
                         ['0', '1'])
        self.assertTrue(0 <= scores['coverage'] <= 1)
        self.assertIn('Coverage', output)

    def test_evaluate_mismatched_truth(self):
        other = self.simulate('other.csv', p=4)
        with self.assertRaises(CommandError) as ctx:
            self.call('evaluate', self.path('fit', 'summary.json'),
                      truth=other + '.truth.json')
        self.assertEqual(ctx.exception.returncode, EXIT_DATA)

    def test_export(self):
        self.call('export', self.path('fit', 'summary.json'),
                  format='dot', out=self.path('graphs'))
        names = sorted(os.listdir(self.path('graphs')))
        self.assertEqual(names, ['graph_0.dot', 'graph_1.dot',
                                 'graph_combined.dot'])

    def test_export_round_trip(self):
        self.call('export', self.path('fit', 'summary.json'),
                  out=self.path('graphs'))
        selected, columns = read_selected(self.path('fit', 'summary.json'))
        for label, graph in zip(selected.labels, selected):
            path = self.path('graphs', f'graph_{label}.tsv')
            self.assertEqual(read_edgelist(path, columns), graph)


class ConvergeCommandTests(CommandTestCase):
    def test_two_seeds(self):
        data = self.simulate()
        with open(self.path('run.json'), 'w') as stream:
            json.dump(dict(FAST_RUN, engine='fbs'), stream)
        output = self.call('converge', data=data, seeds=[1, 2],
                           config=self.path('run.json'),
                           out=self.path('converge.json'))
        self.assertIn('seed 1 vs seed 2', output)
        pairs = read_json(self.path('converge.json'))['pairs']
        self.assertEqual(len(pairs), 1)

    def test_saved_chains(self):
        data = self.simulate()
        self.fit(data, chains=3, workers=1)
        chains = [self.path('fit', f'chain_{i}.csv') for i in (1, 2, 3)]
        output = self.call('converge', *chains)
        self.assertEqual(output.count(' vs '), 3)

    def test_needs_two_chains(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('converge')
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)


class IngestCommandTests(CommandTestCase):
    def write_survey(self):
        answers = ('A great deal', 'Only some', 'Hardly any')
        with open(self.path('gss.csv'), 'w') as stream:
            stream.write('confinan,conbus,wwwhr\n')
            for i in range(30):
                stream.write(f'{answers[i % 3]},{answers[(i + 1) % 3]},'
                             f'{i}\n')
            stream.write('IAP,Hardly any,3\n')
        return self.path('gss.csv')

    def write_spec(self, **overrides):
        spec = {
            'variables': {name: {'ones': ['Hardly any']}
                          for name in ('confinan', 'conbus')},
            'group': 'wwwhr',
            'quantiles': 3,
            'missing': ['IAP'],
        }
        spec.update(overrides)
        spec = {key: value for key, value in spec.items() if value is not None}
        with open(self.path('spec.json'), 'w') as stream:
            json.dump(spec, stream)
        return self.path('spec.json')

    def test_ingest(self):
        output = self.call('ingest', self.write_survey(),
                           spec=self.write_spec(), out=self.path('data.csv'),
                           report=self.path('report.json'))
        self.assertIn('1 dropped', output)
        data = read_grouped(self.path('data.csv'))
        self.assertEqual(data.q, 3)
        self.assertEqual(data.columns, ('confinan', 'conbus'))
        report = read_json(self.path('report.json'))
        self.assertEqual(sum(report['group_sizes'].values()), 30)

    def test_invalid_spec(self):
        with self.assertRaises(CommandError) as ctx:
            self.call('ingest', self.write_survey(),
                      spec=self.write_spec(thresholds=[3, 1]),
                      out=self.path('data.csv'))
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)

    def test_empty_group(self):
        spec = self.write_spec(thresholds=[100], quantiles=None)
        with self.assertRaises(CommandError) as ctx:
            self.call('ingest', self.write_survey(), spec=spec,
                      out=self.path('data.csv'))
        self.assertEqual(ctx.exception.returncode, EXIT_DATA)


class StudyCommandTests(CommandTestCase):
    def test_small_study(self):
        with open(self.path('study.json'), 'w') as stream:
            json.dump({'kinds': ['A'], 'methods': ['fbs'], 'p': 3, 'q': 2,
                       'n_per_group': 30, 'iterations': 10, 'burn_in': 2,
                       'thin': 1, 'gibbs_burn_in': 5, 'gibbs_thin': 1},
                      stream)
        self.call('study', config=self.path('study.json'), replicates=2,
                  out=self.path('study'))
        report = read_json(self.path('study', 'study.json'))
        self.assertEqual(report['replicates'], 2)
        self.assertEqual(report['table'][0]['scenario'], 'A')
        for name in ('records.csv', 'table.csv'):
            self.assertTrue(os.path.exists(self.path('study', name)))

    @patch('core.management.commands.study.replicate_study')
    def test_invalid_study(self, replicate_study):
        with self.assertRaises(CommandError) as ctx:
            self.call('study', replicates=1, out=self.path('study'))
        self.assertEqual(ctx.exception.returncode, EXIT_CONFIG)
        replicate_study.assert_not_called()
