"""Counting problems reduced to sums of multilinear coefficients."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import networkx as nx
import networkx.algorithms.isomorphism as iso
import numpy as np

from multilinear.abp import (
	Abp,
	Layer,
	abp_product,
	abp_sum,
	constant_abp,
	homogenize_abp,
	zcoeff_abp,
)
from multilinear.algebra import RingSpec
from multilinear.circuit import Circuit, CircuitBuilder
from multilinear.exceptions import CircuitParseError, InvalidInstance
from multilinear.solvers import MmdConfig, MmdResult, mlc_count, mmd

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Graph:
	"""Nodes 1..n; undirected edges are stored as two arcs."""

	n: int
	directed: bool
	digraph: nx.DiGraph

	@classmethod
	def from_edges(cls, n, edges, directed=False):
		digraph = nx.DiGraph()
		digraph.add_nodes_from(range(1, n + 1))
		for u, v in edges:
			if not (1 <= u <= n and 1 <= v <= n):
				raise InvalidInstance(f'edge ({u}, {v}) uses a node outside 1..{n}')
			digraph.add_edge(u, v)
			if not directed:
				digraph.add_edge(v, u)
		return cls(n, directed, digraph)

	@classmethod
	def complete(cls, n):
		return cls.from_edges(n, itertools.combinations(range(1, n + 1), 2))

	def arc(self, u, v):
		return 1 if self.digraph.has_edge(u, v) else 0

	def neighbors(self, v):
		return sorted(self.digraph.successors(v))

	def closed_neighborhood(self, v):
		return sorted({v, *self.digraph.successors(v)})

	def has_self_loops(self):
		return nx.number_of_selfloops(self.digraph) > 0

	def undirected(self) -> nx.Graph:
		return self.digraph.to_undirected(as_view=False)

	def edges(self):
		if self.directed:
			return sorted(self.digraph.edges())
		return sorted((u, v) for u, v in self.digraph.edges() if u <= v)


def parse_graph(text) -> Graph:
	"""`graph <n> <m> <directed|undirected>` then m lines `u v`."""
	rows = [(i, line.split('#', 1)[0].split()) for i, line in enumerate(text.splitlines(), start=1)]
	rows = [(i, tokens) for i, tokens in rows if tokens]
	if not rows or rows[0][1][0] != 'graph' or len(rows[0][1]) != 4:
		raise CircuitParseError('file must start with graph <n> <m> <directed|undirected>', rows[0][0] if rows else None)
	_, (_, n, m, kind) = rows[0]
	if kind not in ('directed', 'undirected'):
		raise CircuitParseError(f'unknown graph kind {kind!r}', rows[0][0])
	try:
		n, m = int(n), int(m)
		edges = []
		for number, tokens in rows[1:]:
			if len(tokens) != 2:
				raise CircuitParseError('edge lines hold two node ids', number)
			edges.append((int(tokens[0]), int(tokens[1])))
	except ValueError as exc:
		raise CircuitParseError(f'non-integer value: {exc}') from None
	if len(edges) != m:
		raise CircuitParseError(f'header declares {m} edges, found {len(edges)}')
	return Graph.from_edges(n, edges, kind == 'directed')


def parse_tree(text) -> Graph:
	tree = parse_graph(text)
	if tree.n == 0 or not nx.is_tree(tree.undirected()):
		raise InvalidInstance('tree file must describe a connected acyclic graph')
	if tree.directed:
		tree = Graph.from_edges(tree.n, tree.edges())
	return tree


# k-paths


def kpath_abp(g: Graph, k) -> Abp:
	"""C_G = 1^T B^(k-1) y with B[i, j] = A[i, j] y_i, as a k-layer ABP of width n."""
	n = g.n
	if k == 1:
		return Abp(n, (Layer(np.zeros((1, 1), dtype=object), {i: [[1]] for i in range(1, n + 1)}),), homogeneous=True)
	zeros = np.zeros((1, n), dtype=object)
	first = {}
	middle = {}
	for i in range(1, n + 1):
		row = np.zeros((1, n), dtype=object)
		block = np.zeros((n, n), dtype=object)
		for j in g.neighbors(i):
			row[0, j - 1] = 1
			block[i - 1, j - 1] = 1
		first[i] = row
		middle[i] = block
	last = {}
	for j in range(1, n + 1):
		column = np.zeros((n, 1), dtype=object)
		column[j - 1, 0] = 1
		last[j] = column
	layers = [Layer(zeros, first)]
	layers += [Layer(np.zeros((n, n), dtype=object), middle) for _ in range(k - 2)]
	layers.append(Layer(np.zeros((n, 1), dtype=object), last))
	return Abp(n, tuple(layers), homogeneous=True)


def kpath_circuit(g: Graph, k) -> Circuit:
	builder = CircuitBuilder(g.n)
	y = {i: builder.input(i) for i in range(1, g.n + 1)}
	if k == 1:
		return builder.build(builder.sum(list(y.values())))
	current = {j: builder.sum([y[i] for i in range(1, g.n + 1) if g.arc(i, j)]) for j in y}
	for _ in range(k - 2):
		current = {
			j: builder.sum([builder.mul(current[i], y[i]) for i in range(1, g.n + 1) if g.arc(i, j)])
			for j in y
		}
	return builder.build(builder.sum([builder.mul(current[j], y[j]) for j in y])).pruned()


def _check_paths(g: Graph, k):
	if g.has_self_loops():
		raise InvalidInstance('path counting needs a graph without self-loops')
	if not 1 <= k <= g.n:
		raise InvalidInstance(f'need 1 <= k <= n, got k={k}, n={g.n}')


@dataclass
class KPathCount:
	ordered: int
	undirected: int | None

	def to_dict(self):
		return {'ordered': self.ordered, 'undirected': self.undirected}


def count_kpaths(g: Graph, k, ring: RingSpec | None = None, algo='halves') -> KPathCount:
	"""Directed k-vertex paths; for undirected input also the count of undirected paths."""
	_check_paths(g, k)
	ordered = mlc_count(kpath_abp(g, k), g.n, k, algo=algo, ring=ring)
	undirected = None
	if not g.directed:
		undirected = ordered // 2 if k >= 2 else ordered
	return KPathCount(ordered, undirected)


def has_kpath(g: Graph, k, cfg: MmdConfig | None = None, ring: RingSpec | None = None) -> MmdResult:
	_check_paths(g, k)
	return mmd(kpath_circuit(g, k), g.n, k, cfg, ring)


def enumerate_kpaths(g: Graph, k):
	"""Ordered k-vertex paths by depth-first search."""
	def extend(path):
		if len(path) == k:
			return 1
		return sum(extend(path + [v]) for v in g.neighbors(path[-1]) if v not in path)
	return sum(extend([v]) for v in range(1, g.n + 1))


# k-trees


def ktree_circuit(g: Graph, tree: Graph) -> Circuit:
	"""Q = sum over tree roots r and graph vertices j of C(r, j).

	C(r, j) = x_j times, for every subtree hanging off r, the sum of that
	subtree's C over the neighbors of j.
	"""
	builder = CircuitBuilder(g.n)
	memo = {}

	def rooted(node, parent, vertex):
		key = (node, parent, vertex)
		if key not in memo:
			factors = [builder.input(vertex)]
			for child in tree.neighbors(node):
				if child == parent:
					continue
				factors.append(builder.sum([rooted(child, node, w) for w in g.neighbors(vertex)]))
			memo[key] = builder.product(factors)
		return memo[key]

	roots = [rooted(r, None, j) for r in range(1, tree.n + 1) for j in range(1, g.n + 1)]
	return builder.build(builder.sum(roots)).pruned()


def count_tree_copies(g: Graph, tree: Graph):
	"""Copies of the tree in g (not necessarily induced), by subgraph monomorphisms over automorphisms."""
	host, pattern = g.undirected(), tree.undirected()
	embeddings = sum(1 for _ in iso.GraphMatcher(host, pattern).subgraph_monomorphisms_iter())
	automorphisms = sum(1 for _ in iso.GraphMatcher(pattern, pattern).isomorphisms_iter())
	return embeddings // automorphisms


@lru_cache(maxsize=64)
def _ktree_constant(k, edges):
	tree = Graph.from_edges(k, edges)
	host = Graph.complete(k)
	raw = mlc_count(ktree_circuit(host, tree), k, k)
	copies = count_tree_copies(host, tree)
	constant = Fraction(raw, copies)
	logger.debug('k-tree normalization for %s calibrated at %s', edges, constant)
	return constant


def ktree_normalization(tree: Graph) -> Fraction:
	"""Ratio of the raw count to the number of copies, calibrated on the complete graph K_k."""
	return _ktree_constant(tree.n, tuple(tree.edges()))


@dataclass
class CountReport:
	raw: int
	normalized: Fraction
	constant: Fraction

	def to_dict(self):
		return {'raw': self.raw, 'normalized': str(self.normalized), 'constant': str(self.constant)}


def count_ktrees(g: Graph, tree: Graph, ring: RingSpec | None = None, algo='halves') -> CountReport:
	if g.directed:
		raise InvalidInstance('k-tree counting needs an undirected graph')
	if tree.n == 0 or not nx.is_tree(tree.undirected()):
		raise InvalidInstance('pattern is not a tree')
	k = tree.n
	if k > g.n:
		return CountReport(0, Fraction(0), ktree_normalization(tree))
	raw = mlc_count(ktree_circuit(g, tree), g.n, k, algo=algo, ring=ring)
	constant = ktree_normalization(tree)
	return CountReport(raw, Fraction(raw) / constant, constant)


# t-dominating sets


def _gadget_layers(var, z):
	"""Two layers whose product is 1 + z * x_var."""
	first = Layer(np.array([[1, 0]], dtype=object), {z: np.array([[0, 1]], dtype=object)})
	second = Layer(np.array([[1], [0]], dtype=object), {var: np.array([[0], [1]], dtype=object)})
	return [first, second]


def domset_abp(g: Graph, k) -> Abp:
	"""(sum_i prod_{j in N[i]} (1 + z x_j))^k over x_1..x_n and z = x_{n+1}."""
	n, z = g.n, g.n + 1
	longest = max(len(g.closed_neighborhood(i)) for i in range(1, n + 1))
	one = Layer(np.ones((1, 1), dtype=object))
	chains = []
	for i in range(1, n + 1):
		layers = []
		for j in g.closed_neighborhood(i):
			layers += _gadget_layers(j, z)
		layers += [one] * (2 * (longest - len(g.closed_neighborhood(i))))
		chains.append(Abp(n + 1, tuple(layers)))
	total = abp_sum(chains)
	return abp_product(*([total] * k))


def witnessed_dominations(g: Graph, k, t):
	"""Ordered k-tuples of vertices with disjoint A_r within N[v_r] of total size t, by enumeration."""
	count = 0
	for vertices in itertools.product(range(1, g.n + 1), repeat=k):
		cover = [0] * (g.n + 1)
		for v in vertices:
			for u in g.closed_neighborhood(v):
				cover[u] += 1
		for chosen in itertools.combinations(range(1, g.n + 1), t):
			count += math.prod(cover[u] for u in chosen)
	return count


def dominating_sets(g: Graph, k, t):
	"""k-sets whose closed neighborhood has at least t nodes."""
	return sum(
		1 for subset in itertools.combinations(range(1, g.n + 1), k)
		if len(set().union(*(g.closed_neighborhood(v) for v in subset))) >= t
	)


def _domset_raw(g, k, t, ring, algo):
	if t > g.n:
		return 0
	P = domset_abp(g, k)
	if t > sum(1 for layer in P.layers if g.n + 1 in layer.coeffs):
		return 0
	Q = zcoeff_abp(P, t)
	return mlc_count(homogenize_abp(Q, t), g.n, t, algo=algo, ring=ring)


def _at_least_from_moments(moments, t):
	"""#{v : s_v >= t} from a_j = sum_v C(s_v, j) for j >= t, by binomial inversion."""
	return sum((-1) ** (j - t) * math.comb(j - 1, t - 1) * a for j, a in moments.items() if j >= t)


@dataclass
class DomsetReport:
	"""normalized is the number of dominating k-sets, or None when the raw sum cannot be converted.

	A k-set S dominating the nodes N[S] enters the raw sum once per way of
	splitting a t-subset of N[S] among the members of S, so for k >= 2 the
	weight depends on how the neighborhoods in S overlap and no constant
	divides it out. For k = 1 every weight is 1 and the raw sums over
	t, t+1, .. invert to the exact count.
	"""
	raw: int
	normalized: int | None
	dominating: bool

	def to_dict(self):
		return {'raw': self.raw, 'normalized': self.normalized, 'dominating': self.dominating}


def count_tdomsets(g: Graph, k, t, ring: RingSpec | None = None, algo='halves') -> DomsetReport:
	"""Raw coefficient sum of [z^t] P; positive exactly when some k vertices dominate at least t nodes."""
	if not 1 <= k <= g.n or not 0 <= t <= g.n:
		raise InvalidInstance(f'need 1 <= k <= n and 0 <= t <= n, got k={k}, t={t}, n={g.n}')
	raw = _domset_raw(g, k, t, ring, algo)
	if raw == 0:
		normalized = 0
	elif t == 0:
		normalized = math.comb(g.n, k)
	elif k > 1:
		normalized = None
	else:
		widest = max(len(g.closed_neighborhood(v)) for v in range(1, g.n + 1))
		moments = {j: _domset_raw(g, 1, j, ring, algo) for j in range(t + 1, widest + 1)}
		moments[t] = raw
		normalized = _at_least_from_moments(moments, t)
	if normalized is not None and ring is not None and ring.is_field:
		normalized %= ring.modulus
	logger.debug('dominating sets k=%d t=%d: raw %s, normalized %s', k, t, raw, normalized)
	return DomsetReport(raw, normalized, raw > 0)


# m-dimensional matchings


@dataclass(frozen=True)
class MatchInstance:
	m: int
	sizes: tuple[int, ...]
	tuples: tuple[tuple[int, ...], ...]

	def __post_init__(self):
		if self.m < 2:
			raise InvalidInstance('matchings need arity m >= 2')
		if len(self.sizes) != self.m:
			raise InvalidInstance(f'expected {self.m} universes, got {len(self.sizes)}')
		for tup in self.tuples:
			if len(tup) != self.m:
				raise InvalidInstance(f'tuple {tup} has arity {len(tup)}, expected {self.m}')
			for coordinate, (element, size) in enumerate(zip(tup, self.sizes), start=1):
				if not 1 <= element <= size:
					raise InvalidInstance(f'element {element} outside universe {coordinate} of size {size}')

	@property
	def nvars(self):
		"""One variable per element of U_2 .. U_m."""
		return sum(self.sizes[1:])

	def variable(self, coordinate, element):
		return sum(self.sizes[1:coordinate - 1]) + element

	def groups(self):
		"""Tuples grouped by their first coordinate."""
		grouped = {}
		for tup in self.tuples:
			grouped.setdefault(tup[0], []).append(tup)
		return [grouped[key] for key in sorted(grouped)]


def parse_matching(text) -> MatchInstance:
	"""`mdm <m>`, then `universe <i> <size>` and `tuple e_1 ... e_m` lines."""
	m = None
	sizes = {}
	tuples = []
	for number, raw in enumerate(text.splitlines(), start=1):
		tokens = raw.split('#', 1)[0].split()
		if not tokens:
			continue
		try:
			values = [int(x) for x in tokens[1:]]
		except ValueError:
			raise CircuitParseError('non-integer value', number) from None
		if tokens[0] == 'mdm' and len(values) == 1 and m is None:
			m = values[0]
		elif m is None:
			raise CircuitParseError('file must start with mdm <m>', number)
		elif tokens[0] == 'universe' and len(values) == 2:
			sizes[values[0]] = values[1]
		elif tokens[0] == 'tuple':
			tuples.append(tuple(values))
		else:
			raise CircuitParseError(f'unexpected line {raw.strip()!r}', number)
	if m is None:
		raise CircuitParseError('empty matching file')
	if sorted(sizes) != list(range(1, m + 1)):
		raise InvalidInstance(f'need universe sizes for 1..{m}')
	return MatchInstance(m, tuple(sizes[i] for i in range(1, m + 1)), tuple(tuples))


def matching_abp(inst: MatchInstance) -> Abp:
	"""prod over first-coordinate groups of (1 + sum_t z * x_u2 ... x_um), z the last variable."""
	nvars = inst.nvars + 1
	z = nvars
	one = Layer(np.ones((1, 1), dtype=object))
	factors = []
	for group in inst.groups():
		paths = [Abp(nvars, tuple([one] * inst.m))]
		for tup in group:
			layers = [Layer(np.zeros((1, 1), dtype=object), {z: [[1]]})]
			for coordinate in range(2, inst.m + 1):
				layers.append(Layer(np.zeros((1, 1), dtype=object), {inst.variable(coordinate, tup[coordinate - 1]): [[1]]}))
			paths.append(Abp(nvars, tuple(layers)))
		factors.append(abp_sum(paths))
	if not factors:
		return constant_abp(nvars, 1)
	return abp_product(*factors)


def count_mdmatchings(inst: MatchInstance, k, ring: RingSpec | None = None, algo='halves') -> int:
	"""Sub-collections of k pairwise disjoint tuples; every one contributes coefficient exactly 1."""
	if k < 0 or k > inst.sizes[0]:
		raise InvalidInstance(f'need 0 <= k <= |U_1| = {inst.sizes[0]}, got {k}')
	if k == 0:
		return 1
	P = matching_abp(inst)
	degree = (inst.m - 1) * k
	if k > P.degree // inst.m or degree > inst.nvars:
		return 0
	Q = zcoeff_abp(P, k)
	return mlc_count(homogenize_abp(Q, degree), inst.nvars, degree, algo=algo, ring=ring)


def enumerate_matchings(inst: MatchInstance, k):
	count = 0
	for chosen in itertools.combinations(inst.tuples, k):
		if all(len({tup[c] for tup in chosen}) == k for c in range(inst.m)):
			count += 1
	return count


def random_graph(n, p, rng, directed=False) -> Graph:
	pairs = itertools.permutations(range(1, n + 1), 2) if directed else itertools.combinations(range(1, n + 1), 2)
	return Graph.from_edges(n, [pair for pair in pairs if rng.random() < p], directed)


def random_matching(m, size, ntuples, rng) -> MatchInstance:
	tuples = {tuple(rng.randint(1, size) for _ in range(m)) for _ in range(ntuples)}
	return MatchInstance(m, (size,) * m, tuple(sorted(tuples)))
