import networkx as nx
import numpy as np
from django.test import SimpleTestCase, tag

from core.exceptions import ConfigError
from core.ising import exact_cell_probs
from core.models import CanonicalParams, EdgeIndicators

from simlab.scenarios import (
    barabasi_albert,
    build_scenario,
    graphs_to_params,
    scenario_from_edges,
    simulate_dataset,
)


def as_networkx(graph):
    out = nx.Graph()
    out.add_nodes_from(range(1, graph.p + 1))
    out.add_edges_from(graph.edges())
    return out


def uniform_attachment_tree(p, rng):
    edges = [(new + 1, int(rng.integers(new)) + 1) for new in range(1, p)]
    return EdgeIndicators.from_edges(p, edges)


class BarabasiAlbertTests(SimpleTestCase):
    def test_two_nodes(self):
        graph = barabasi_albert(2, 1, rng=0)
        self.assertEqual(graph.edges(), [(2, 1)])

    def test_single_attachment_gives_tree(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            graph = as_networkx(barabasi_albert(10, 1, rng))
            self.assertEqual(graph.number_of_edges(), 9)
            self.assertTrue(nx.is_tree(graph))

    def test_edge_count_for_larger_attachment(self):
        graph = barabasi_albert(12, 3, rng=1)
        self.assertEqual(graph.count, 6 + 3 * (12 - 4))

    def test_invalid_attachment(self):
        with self.assertRaises(ConfigError):
            barabasi_albert(5, 5)
        with self.assertRaises(ConfigError):
            barabasi_albert(1, 1)

    def test_heavier_hubs_than_uniform_attachment(self):
        """Test the mean maximum degree exceeds uniform attachment trees."""
        rng = np.random.default_rng(2)
        preferential, uniform = [], []
        for _ in range(1000):
            preferential.append(
                barabasi_albert(50, 1, rng).adjacency().sum(axis=0).max()
            )
            uniform.append(
                uniform_attachment_tree(50, rng).adjacency().sum(axis=0).max()
            )
        self.assertGreater(np.mean(preferential), np.mean(uniform))


class ScenarioTests(SimpleTestCase):
    def test_kind_a_identical(self):
        scenario = build_scenario('A', 10, 4, rng=0)
        bits = np.stack([graph.bits for graph in scenario.graphs])
        self.assertTrue((bits == bits[0]).all())

    def test_kind_b_distinct(self):
        scenario = build_scenario('B', 10, 4, rng=1)
        self.assertEqual(scenario.distinct_graphs(), 4)

    def test_kind_c_pairs(self):
        scenario = build_scenario('C', 10, 4, rng=2)
        g = scenario.graphs
        self.assertEqual(scenario.distinct_graphs(), 2)
        self.assertEqual(g[0], g[1])
        self.assertEqual(g[2], g[3])

    def test_kind_d_pattern(self):
        scenario = build_scenario('D', 10, 4, rng=3)
        g = scenario.graphs
        self.assertTrue(g[0] == g[1] == g[2])
        self.assertNotEqual(g[0], g[3])

    def test_kind_c_requires_four_groups(self):
        with self.assertRaises(ConfigError):
            build_scenario('C', 10, 3, rng=0)

    def test_resampling_failure(self):
        with self.assertRaises(ConfigError):
            build_scenario('B', 2, 3, rng=0)

    def test_same_seed_same_scenario(self):
        first = build_scenario('B', 8, 3, rng=5)
        second = build_scenario('B', 8, 3, rng=5)
        self.assertEqual(first.graphs, second.graphs)
        self.assertEqual(first.seed, 5)

    def test_from_edges_checks_pattern(self):
        scenario = scenario_from_edges('A', 4, [[(2, 1), (3, 2)]] * 2)
        self.assertEqual(scenario.q, 2)
        with self.assertRaises(ConfigError):
            scenario_from_edges('A', 4, [[(2, 1)], [(3, 2)]])
        chain = scenario_from_edges('chain', 4, [[(2, 1)], [(3, 2)]])
        self.assertEqual(chain.distinct_graphs(), 2)


class GraphsToParamsTests(SimpleTestCase):
    def test_empty_graph(self):
        (params,) = graphs_to_params([EdgeIndicators.empty(4)])
        np.testing.assert_array_equal(params.main, -1.0)
        np.testing.assert_array_equal(params.inter, 0.0)

    def test_defaults_and_inverse(self):
        graph = EdgeIndicators.from_edges(4, [(2, 1), (4, 3)])
        (params,) = graphs_to_params([graph])
        self.assertEqual(set(params.inter[graph.bits == 1]), {1.5})
        recovered = EdgeIndicators((np.abs(params.inter) > 0).astype(int))
        self.assertEqual(recovered, graph)

    def test_custom_values(self):
        graph = EdgeIndicators.from_edges(3, [(3, 1)])
        (params,) = graphs_to_params([graph], main_effect=0.5,
                                     interaction=-2.0)
        np.testing.assert_array_equal(params.main, 0.5)
        np.testing.assert_array_equal(params.inter, [0.0, -2.0, 0.0])


class SimulateDatasetTests(SimpleTestCase):
    def test_zero_params_balanced(self):
        scenario = scenario_from_edges('free', 3, [[], []])
        scenario.params = [CanonicalParams.zeros(3)] * 2
        data = simulate_dataset(scenario, n_x=4000, burn_in=10, thin=1,
                                seed=0)
        for group in data:
            np.testing.assert_allclose(group.rows.mean(axis=0), 0.5,
                                       atol=0.04)

    def test_same_seed_same_data(self):
        scenario = build_scenario('A', 5, 2, rng=0)
        first = simulate_dataset(scenario, n_x=30, burn_in=20, thin=2,
                                 seed=7)
        second = simulate_dataset(scenario, n_x=30, burn_in=20, thin=2,
                                  seed=7)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.rows, b.rows)
        self.assertEqual(first.labels, ['0', '1'])

    def test_group_permutation(self):
        """Test permuting groups with their seeds permutes the data."""
        scenario = build_scenario('B', 6, 3, rng=4)
        seeds = np.random.SeedSequence(11).spawn(3)
        data = simulate_dataset(scenario, n_x=20, burn_in=5, thin=1,
                                seed=seeds)
        order = [2, 0, 1]
        permuted = scenario_from_edges(
            'B', 6, [scenario.graphs[x].edges() for x in order]
        )
        shuffled = simulate_dataset(
            permuted, n_x=20, burn_in=5, thin=1,
            seed=[np.random.SeedSequence(11).spawn(3)[x] for x in order],
        )
        for x, source in enumerate(order):
            np.testing.assert_array_equal(shuffled[x].rows,
                                          data[source].rows)

    @tag('slow')
    def test_cell_frequencies_match_enumeration(self):
        """Test p=3 scenario data against the exact cell probabilities."""
        graph = EdgeIndicators.from_edges(3, [(2, 1), (3, 2)])
        scenario = scenario_from_edges('A', 3, [graph.edges()] * 2)
        data = simulate_dataset(scenario, n_x=50000, burn_in=200, thin=5,
                                seed=3)
        exact = exact_cell_probs(scenario.params[0])
        weights = 1 << np.arange(3)
        for group in data:
            cells = np.bincount(group.rows @ weights, minlength=8)
            tv = 0.5 * np.abs(cells / group.n - exact).sum()
            self.assertLess(tv, 0.03)
