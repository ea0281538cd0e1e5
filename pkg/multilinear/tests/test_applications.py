import random
from fractions import Fraction
from pathlib import Path

from django.test import SimpleTestCase

from multilinear.algebra import RingSpec
from multilinear.applications import (
	Graph,
	MatchInstance,
	count_kpaths,
	count_ktrees,
	count_mdmatchings,
	count_tdomsets,
	count_tree_copies,
	dominating_sets,
	enumerate_kpaths,
	enumerate_matchings,
	has_kpath,
	kpath_abp,
	kpath_circuit,
	ktree_normalization,
	parse_graph,
	parse_matching,
	parse_tree,
	random_graph,
	random_matching,
	witnessed_dominations,
)
from multilinear.circuit import brute_expand
from multilinear.exceptions import CircuitParseError, InvalidInstance
from multilinear.solvers import MmdConfig

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'
FIELD = RingSpec.prime_field(1000003)


def fixture(name):
	return (FIXTURES / name).read_text()


class GraphParseTests(SimpleTestCase):
	def test_fixture(self):
		g = parse_graph(fixture('k4.g'))
		self.assertEqual(g.n, 4)
		self.assertFalse(g.directed)
		self.assertEqual(len(g.edges()), 6)
		self.assertEqual(g.neighbors(1), [2, 3, 4])
		self.assertEqual(g.closed_neighborhood(2), [1, 2, 3, 4])

	def test_errors(self):
		with self.assertRaises(CircuitParseError):
			parse_graph('graph 3 2 undirected\n1 2\n')
		with self.assertRaises(CircuitParseError):
			parse_graph('graph 3 1 mixed\n1 2\n')
		with self.assertRaises(CircuitParseError):
			parse_graph('edges 3\n')
		with self.assertRaises(InvalidInstance):
			parse_graph('graph 2 1 directed\n1 3\n')

	def test_tree_checks(self):
		self.assertEqual(parse_tree(fixture('path3.t')).n, 3)
		with self.assertRaises(InvalidInstance):
			parse_tree('graph 3 3 undirected\n1 2\n2 3\n3 1\n')
		with self.assertRaises(InvalidInstance):
			parse_tree('graph 4 2 undirected\n1 2\n3 4\n')
		directed = parse_tree('graph 2 1 directed\n1 2\n')
		self.assertFalse(directed.directed)
		self.assertEqual(directed.neighbors(2), [1])


class KPathTests(SimpleTestCase):
	def test_complete_graph(self):
		count = count_kpaths(parse_graph(fixture('k4.g')), 3)
		self.assertEqual(count.to_dict(), {'ordered': 24, 'undirected': 12})

	def test_single_arc(self):
		g = Graph.from_edges(2, [(1, 2)], directed=True)
		self.assertEqual(count_kpaths(g, 2).to_dict(), {'ordered': 1, 'undirected': None})
		self.assertEqual(count_kpaths(g, 1).ordered, 2)

	def test_abp_walks(self):
		g = Graph.from_edges(3, [(1, 2), (2, 3)])
		poly = kpath_abp(g, 3).expand()
		self.assertEqual(poly.multilinear_sum(3), 2)
		self.assertEqual(poly.degrees(), {3})

	def test_against_depth_first_search(self):
		rng = random.Random(40)
		for _ in range(8):
			directed = rng.random() < 0.5
			g = random_graph(5, 0.5, rng, directed=directed)
			for k in (2, 3, 4):
				count = count_kpaths(g, k, ring=FIELD)
				self.assertEqual(count.ordered, enumerate_kpaths(g, k) % FIELD.modulus)

	def test_detection(self):
		cfg = MmdConfig(error=0.5, seed=3)
		self.assertTrue(has_kpath(parse_graph(fixture('k4.g')), 3, cfg).found)
		matching = Graph.from_edges(4, [(1, 2), (3, 4)])
		self.assertFalse(has_kpath(matching, 3, cfg).found)

	def test_argument_checks(self):
		with self.assertRaises(InvalidInstance):
			count_kpaths(Graph.from_edges(2, [(1, 1)]), 1)
		with self.assertRaises(InvalidInstance):
			count_kpaths(Graph.complete(3), 4)


class KTreeTests(SimpleTestCase):
	def test_single_node_counts_vertices(self):
		tree = Graph.from_edges(1, [])
		report = count_ktrees(Graph.complete(4), tree)
		self.assertEqual((report.raw, report.normalized), (4, 4))

	def test_edge_on_triangle(self):
		tree = Graph.from_edges(2, [(1, 2)])
		report = count_ktrees(Graph.complete(3), tree)
		self.assertEqual(report.raw, 12)
		self.assertEqual(report.normalized, 3)
		self.assertEqual(report.to_dict(), {'raw': 12, 'normalized': '3', 'constant': '4'})

	def test_constant_is_size_times_automorphisms(self):
		self.assertEqual(ktree_normalization(parse_tree(fixture('path3.t'))), Fraction(6))
		star = Graph.from_edges(4, [(1, 2), (1, 3), (1, 4)])
		self.assertEqual(ktree_normalization(star), Fraction(24))

	def test_against_subgraph_matching(self):
		rng = random.Random(41)
		trees = [parse_tree(fixture('path3.t')), Graph.from_edges(4, [(1, 2), (1, 3), (1, 4)])]
		for _ in range(4):
			g = random_graph(5, 0.6, rng)
			for tree in trees:
				report = count_ktrees(g, tree, ring=FIELD)
				self.assertEqual(report.normalized, count_tree_copies(g, tree))

	def test_tree_larger_than_graph(self):
		self.assertEqual(count_ktrees(Graph.complete(2), parse_tree(fixture('path3.t'))).raw, 0)

	def test_rejects_directed_host(self):
		with self.assertRaises(InvalidInstance):
			count_ktrees(Graph.from_edges(2, [(1, 2)], directed=True), Graph.from_edges(1, []))


class DominatingSetTests(SimpleTestCase):
	def test_star_center_dominates(self):
		report = count_tdomsets(parse_graph(fixture('star4.g')), 1, 4, ring=FIELD)
		self.assertTrue(report.dominating)
		self.assertEqual(report.normalized, 1)
		self.assertEqual(dominating_sets(parse_graph(fixture('star4.g')), 1, 4), 1)

	def test_edgeless_graph(self):
		report = count_tdomsets(Graph.from_edges(3, []), 1, 2)
		self.assertEqual(report.raw, 0)
		self.assertFalse(report.to_dict()['dominating'])

	def test_against_enumeration(self):
		g = Graph.from_edges(3, [(1, 2), (2, 3)])
		for k in (1, 2):
			for t in (1, 2, 3):
				report = count_tdomsets(g, k, t, ring=FIELD)
				self.assertEqual(report.raw, witnessed_dominations(g, k, t), msg=f'k={k} t={t}')
				self.assertEqual(report.dominating, dominating_sets(g, k, t) > 0, msg=f'k={k} t={t}')

	def test_single_vertex_sets_match_subset_count(self):
		rng = random.Random(43)
		for _ in range(10):
			g = random_graph(5, 0.5, rng)
			for t in range(0, 6):
				report = count_tdomsets(g, 1, t, ring=FIELD)
				self.assertEqual(report.normalized, dominating_sets(g, 1, t), msg=f'{g.edges()} t={t}')

	def test_larger_sets_have_no_uniform_weight(self):
		# Both graphs have exactly one dominating 2-set for t=2.
		apart = count_tdomsets(Graph.from_edges(2, []), 2, 2)
		joined = count_tdomsets(Graph.complete(2), 2, 2)
		self.assertEqual((apart.raw, joined.raw), (2, 16))
		self.assertIsNone(apart.normalized)
		self.assertEqual(joined.to_dict(), {'raw': 16, 'normalized': None, 'dominating': True})

	def test_trivial_thresholds(self):
		g = Graph.from_edges(4, [(1, 2)])
		self.assertEqual(count_tdomsets(g, 2, 0).normalized, 6)
		report = count_tdomsets(g, 2, 4)
		self.assertEqual((report.normalized, report.dominating), (0, False))
		self.assertEqual(dominating_sets(g, 2, 4), 0)

	def test_random_graphs_against_subset_oracle(self):
		rng = random.Random(44)
		for _ in range(10):
			g = random_graph(5, 0.5, rng)
			for t in (2, 3, 4):
				report = count_tdomsets(g, 2, t, ring=FIELD)
				expected = dominating_sets(g, 2, t)
				self.assertEqual(report.dominating, expected > 0, msg=f'{g.edges()} t={t}')
				self.assertIn(report.normalized, (None, expected))

	def test_argument_checks(self):
		with self.assertRaises(InvalidInstance):
			count_tdomsets(Graph.complete(3), 4, 1)
		with self.assertRaises(InvalidInstance):
			count_tdomsets(Graph.complete(3), 1, 4)


class MatchingTests(SimpleTestCase):
	def test_disjoint_fixture(self):
		inst = parse_matching(fixture('disjoint.mdm'))
		self.assertEqual(count_mdmatchings(inst, 2), 1)
		self.assertEqual(count_mdmatchings(inst, 1), 2)
		self.assertEqual(count_mdmatchings(inst, 0), 1)

	def test_shared_element(self):
		inst = MatchInstance(2, (2, 2), ((1, 1), (2, 1)))
		self.assertEqual(count_mdmatchings(inst, 2), 0)

	def test_same_first_coordinate(self):
		inst = MatchInstance(2, (2, 2), ((1, 1), (1, 2)))
		self.assertEqual(count_mdmatchings(inst, 1), 2)
		self.assertEqual(count_mdmatchings(inst, 2), 0)

	def test_against_enumeration(self):
		rng = random.Random(42)
		for _ in range(5):
			inst = random_matching(3, 3, 5, rng)
			for k in (1, 2, 3):
				self.assertEqual(count_mdmatchings(inst, k, ring=FIELD), enumerate_matchings(inst, k), msg=f'{inst.tuples} k={k}')

	def test_instance_checks(self):
		with self.assertRaises(InvalidInstance):
			MatchInstance(1, (2,), ((1,),))
		with self.assertRaises(InvalidInstance):
			MatchInstance(2, (2, 2), ((1, 3),))
		with self.assertRaises(InvalidInstance):
			parse_matching('mdm 2\nuniverse 1 2\ntuple 1 1\n')
		with self.assertRaises(CircuitParseError):
			parse_matching('universe 1 2\n')
		with self.assertRaises(InvalidInstance):
			count_mdmatchings(parse_matching(fixture('disjoint.mdm')), 3)


class OracleConsistencyTests(SimpleTestCase):
	def test_witnessed_dominations_on_a_star(self):
		star = Graph.from_edges(3, [(1, 2), (1, 3)])
		self.assertEqual(witnessed_dominations(star, 2, 2), 62)

	def test_kpath_abp_agrees_with_expansion(self):
		g = Graph.complete(3)
		self.assertEqual(kpath_abp(g, 2).expand(), brute_expand(kpath_circuit(g, 2)))
