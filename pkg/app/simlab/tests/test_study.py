from unittest.mock import patch

import numpy as np
from django.test import SimpleTestCase, tag

from core.exceptions import ConfigError

from simlab.serializers import StudyConfigSerializer, StudyReportSerializer
from simlab.study import StudyConfig, replicate_seeds, replicate_study


def small_config(**overrides):
    values = dict(kinds=('A',), methods=('fbs', 'abs'), replicates=2, p=3,
                  q=2, n_per_group=60, iterations=20, burn_in=5, thin=1,
                  seed=1, gibbs_burn_in=20, gibbs_thin=1)
    values.update(overrides)
    return StudyConfig(**values)


class StudyConfigTests(SimpleTestCase):
    def test_needs_two_replicates(self):
        with self.assertRaises(ConfigError):
            small_config(replicates=1).check()

    def test_exact_method_dimension_limit(self):
        with self.assertRaises(ConfigError):
            small_config(p=21, methods=('fb',)).check()

    def test_run_config_forwards_overrides(self):
        config = small_config(run={'sigma': 0.3, 'iterations': 5})
        run = config.run_config('ab')
        self.assertEqual(run.engine, 'ab')
        self.assertEqual(run.sigma, 0.3)
        self.assertEqual(run.iterations, 20)

    def test_replicate_seeds_distinct(self):
        seeds = replicate_seeds(0, ('A', 'B'), 3)
        states = {tuple(seq.generate_state(2)) for seq in seeds.values()}
        self.assertEqual(len(states), 6)


class ReplicateStudyTests(SimpleTestCase):
    def test_report_table(self):
        report = replicate_study(small_config())
        self.assertEqual(len(report.records), 4)
        self.assertEqual(list(report.table.index),
                         [('A', 'fbs'), ('A', 'abs')])
        mean, se = report.score('A', 'fbs')
        self.assertTrue(-1.0 <= mean <= 1.0)
        self.assertGreaterEqual(se, 0.0)
        self.assertTrue((report.table['replicates'] == 2).all())

    def test_reproducible(self):
        first = replicate_study(small_config())
        second = replicate_study(small_config())
        np.testing.assert_array_equal(first.records['mcc'].to_numpy(),
                                      second.records['mcc'].to_numpy())

    def test_parallel_pool(self):
        with patch('simlab.study.ProcessPoolExecutor') as pool:
            pool.return_value.__enter__.return_value.map.return_value = [
                [{'scenario': 'A', 'method': 'fbs', 'replicate': i,
                  'mcc': 1.0, 'f1': 1.0, 'seconds': 0.1}]
                for i in range(2)
            ]
            report = replicate_study(small_config(methods=('fbs',)),
                                     workers=3)
        pool.assert_called_once_with(max_workers=3)
        self.assertEqual(report.score('A', 'fbs', 'f1'), (1.0, 0.0))

    def test_report_serializes(self):
        report = replicate_study(small_config(methods=('abs',)))
        data = StudyReportSerializer(report).data
        self.assertEqual(data['replicates'], 2)
        self.assertEqual(data['table'][0]['method'], 'abs')
        self.assertIn('mcc_se', data['table'][0])
        self.assertEqual(data['config']['kinds'], ['A'])

    @tag('slow')
    def test_easy_instance_recovered(self):
        """Test strong edges and many rows give MCC near 1."""
        config = small_config(
            methods=('fb', 'ab', 'fbs', 'abs'), n_per_group=2000,
            interaction=3.0, iterations=400, burn_in=100, thin=5,
            gibbs_burn_in=200, gibbs_thin=5,
        )
        report = replicate_study(config)
        for method in config.methods:
            mean, _ = report.score('A', method)
            self.assertGreater(mean, 0.9)

    @tag('slow', 'full_scale')
    def test_low_dimensional_scenario_a(self):
        """Test FB and AB accuracy on the low-dimensional shared graph."""
        config = StudyConfig(kinds=('A',), methods=('fb', 'ab'),
                             replicates=3, iterations=10000, burn_in=2000,
                             seed=2024)
        report = replicate_study(config)
        fb, _ = report.score('A', 'fb')
        ab, _ = report.score('A', 'ab')
        self.assertAlmostEqual(fb, 0.858, delta=0.12)
        self.assertAlmostEqual(ab, 0.814, delta=0.12)
        self.assertGreaterEqual(fb, ab - 0.05)

    @tag('slow', 'full_scale')
    def test_distinct_graphs_joint_no_worse_than_separate(self):
        config = StudyConfig(kinds=('B',), methods=('fb', 'fbs', 'ab', 'abs'),
                             replicates=3, iterations=10000, burn_in=2000,
                             seed=2025)
        report = replicate_study(config)
        score = {method: report.score('B', method)[0]
                 for method in config.methods}
        self.assertGreaterEqual(score['fb'], score['fbs'] - 0.1)
        self.assertGreaterEqual(score['ab'], score['abs'] - 0.1)


class StudyConfigSerializerTests(SimpleTestCase):
    def test_valid_study(self):
        serializer = StudyConfigSerializer(data={
            'kinds': ['A', 'C'], 'methods': ['ab'], 'replicates': 3,
            'p': 30, 'run': {'sigma': 0.2},
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        config = serializer.save()
        self.assertEqual(config.kinds, ('A', 'C'))
        self.assertEqual(config.run, {'sigma': 0.2})

    def test_c_requires_four_groups(self):
        serializer = StudyConfigSerializer(data={'kinds': ['C'], 'q': 3})
        self.assertFalse(serializer.is_valid())
        self.assertIn('kinds', serializer.errors)

    def test_exact_engine_rejected_for_large_p(self):
        serializer = StudyConfigSerializer(data={'p': 50})
        self.assertFalse(serializer.is_valid())
        self.assertIn('methods', serializer.errors)

    def test_single_replicate_rejected(self):
        serializer = StudyConfigSerializer(data={'replicates': 1})
        self.assertFalse(serializer.is_valid())
        self.assertIn('replicates', serializer.errors)

    def test_unknown_method(self):
        serializer = StudyConfigSerializer(data={'methods': ['sl']})
        self.assertFalse(serializer.is_valid())
        self.assertIn('methods', serializer.errors)
