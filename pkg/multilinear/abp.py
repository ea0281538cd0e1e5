"""Algebraic branching programs.

An Abp is a list of layers; layer r is a rows x cols matrix of linear forms,
stored as one integer matrix for the constant part plus one integer matrix
per variable. The computed polynomial is entry (0, last) of the product of
the layers. A degree-0 Abp has no layers and computes `constant`.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import reduce
from typing import Sequence

import numpy as np

from multilinear.algebra import MonomialKey, RingSpec, RingValue
from multilinear.circuit import (
	Circuit,
	GateKind,
	LinearForm,
	SparsePoly,
	brute_expand,
	homogenize,
	normalize_assignment,
)
from multilinear.conf import get_setting
from multilinear.exceptions import (
	AbpShapeError,
	CircuitParseError,
	InvalidInstance,
	NonHomogeneousError,
	TermExplosion,
	WidthCapExceeded,
)

logger = logging.getLogger(__name__)


def _zeros(rows, cols):
	return np.zeros((rows, cols), dtype=object)


def _nonzero(matrix):
	return bool(np.any(matrix != 0))


class Layer:
	__slots__ = ('constant', 'coeffs')

	def __init__(self, constant, coeffs=None):
		self.constant = np.asarray(constant, dtype=object)
		if self.constant.ndim != 2:
			raise AbpShapeError('layer matrices must be two-dimensional')
		self.coeffs = {}
		for var, matrix in sorted((coeffs or {}).items()):
			matrix = np.asarray(matrix, dtype=object)
			if matrix.shape != self.constant.shape:
				raise AbpShapeError(f'coefficient matrix for x{var} has shape {matrix.shape}, expected {self.shape}')
			if _nonzero(matrix):
				self.coeffs[var] = matrix

	@classmethod
	def zeros(cls, rows, cols):
		return cls(_zeros(rows, cols))

	@classmethod
	def from_forms(cls, grid: Sequence[Sequence[LinearForm]]):
		rows, cols = len(grid), len(grid[0])
		constant = _zeros(rows, cols)
		coeffs = {}
		for p, row in enumerate(grid):
			for q, form in enumerate(row):
				constant[p, q] = form.constant
				for var, coef in form.coeffs:
					coeffs.setdefault(var, _zeros(rows, cols))[p, q] = coef
		return cls(constant, coeffs)

	@property
	def shape(self):
		return self.constant.shape

	@property
	def rows(self):
		return self.constant.shape[0]

	@property
	def cols(self):
		return self.constant.shape[1]

	@property
	def homogeneous(self):
		return not _nonzero(self.constant)

	@property
	def variables(self):
		return tuple(self.coeffs)

	def entry(self, p, q) -> LinearForm:
		return LinearForm.from_dict({v: m[p, q] for v, m in self.coeffs.items()}, self.constant[p, q])

	def support(self):
		mask = self.constant != 0
		for matrix in self.coeffs.values():
			mask = mask | (matrix != 0)
		return mask.astype(bool)

	def restrict(self, rows, cols):
		index = np.ix_(list(rows), list(cols))
		return Layer(self.constant[index], {v: m[index] for v, m in self.coeffs.items()})

	def scaled(self, c):
		return Layer(self.constant * c, {v: m * c for v, m in self.coeffs.items()})

	def left_multiply(self, matrix):
		return Layer(np.dot(matrix, self.constant), {v: np.dot(matrix, m) for v, m in self.coeffs.items()})

	def right_multiply(self, matrix):
		return Layer(np.dot(self.constant, matrix), {v: np.dot(m, matrix) for v, m in self.coeffs.items()})

	def evaluate(self, point: Sequence[int]):
		result = self.constant.copy()
		for var, matrix in self.coeffs.items():
			result = result + matrix * point[var - 1]
		return result

	def __add__(self, other):
		coeffs = dict(self.coeffs)
		for var, matrix in other.coeffs.items():
			coeffs[var] = coeffs[var] + matrix if var in coeffs else matrix
		return Layer(self.constant + other.constant, coeffs)


def _combine(layers, stack):
	variables = sorted({v for layer in layers for v in layer.coeffs})
	constant = stack([layer.constant for layer in layers])
	coeffs = {}
	for var in variables:
		coeffs[var] = stack([layer.coeffs.get(var, _zeros(*layer.shape)) for layer in layers])
	return Layer(constant, coeffs)


def _block_diag(matrices):
	rows = sum(m.shape[0] for m in matrices)
	cols = sum(m.shape[1] for m in matrices)
	out = _zeros(rows, cols)
	r = c = 0
	for m in matrices:
		out[r:r + m.shape[0], c:c + m.shape[1]] = m
		r += m.shape[0]
		c += m.shape[1]
	return out


@dataclass(frozen=True, eq=False)
class Abp:
	nvars: int
	layers: tuple[Layer, ...] = ()
	constant: int = 1
	homogeneous: bool = False

	@property
	def degree(self):
		return len(self.layers)

	@property
	def widths(self):
		if not self.layers:
			return [1]
		return [self.layers[0].rows] + [layer.cols for layer in self.layers]

	@property
	def max_width(self):
		return max(self.widths)

	@property
	def size(self):
		return sum(layer.rows * layer.cols for layer in self.layers)

	def is_homogeneous(self):
		return all(layer.homogeneous for layer in self.layers)

	def entry(self, layer, p, q) -> LinearForm:
		return self.layers[layer].entry(p, q)

	def expand(self, ring: RingSpec | None = None) -> SparsePoly:
		"""Explicit polynomial; desk-scale only."""
		if not self.layers:
			return SparsePoly.constant(self.constant, ring)
		row = [SparsePoly.constant(1, ring)] + [SparsePoly({}, ring) for _ in range(self.layers[0].rows - 1)]
		for layer in self.layers:
			nxt = []
			for q in range(layer.cols):
				acc = SparsePoly({}, ring)
				for p, poly in enumerate(row):
					form = layer.entry(p, q)
					if poly.terms and not form.is_zero:
						acc = acc.add(poly.mul(form.to_poly(ring)))
				nxt.append(acc)
			row = nxt
		return row[-1]


def check_width(a: Abp, cap=None):
	if cap is None:
		cap = get_setting('ABP_WIDTH_CAP')
	if a.max_width > cap:
		logger.warning('ABP width %d exceeds cap %d', a.max_width, cap)
		raise WidthCapExceeded(a.max_width, cap)
	return a


def zero_abp(nvars, degree) -> Abp:
	if degree == 0:
		return Abp(nvars, (), constant=0, homogeneous=True)
	return Abp(nvars, tuple(Layer.zeros(1, 1) for _ in range(degree)), homogeneous=True)


def constant_abp(nvars, value) -> Abp:
	return Abp(nvars, (), constant=int(value), homogeneous=True)


def linear_abp(nvars, form: LinearForm) -> Abp:
	return Abp(nvars, (Layer.from_forms([[form]]),), homogeneous=form.homogeneous)


def validate_abp(a: Abp) -> Abp:
	for index, layer in enumerate(a.layers):
		if layer.rows < 1 or layer.cols < 1:
			raise AbpShapeError(f'layer {index + 1} has empty shape {layer.shape}')
		if index and a.layers[index - 1].cols != layer.rows:
			raise AbpShapeError(
				f'layer {index} has {a.layers[index - 1].cols} columns but layer {index + 1} has {layer.rows} rows'
			)
		for var in layer.coeffs:
			if not 1 <= var <= a.nvars:
				raise AbpShapeError(f'layer {index + 1} uses x{var} outside 1..{a.nvars}')
		if a.homogeneous and not layer.homogeneous:
			raise NonHomogeneousError(f'layer {index + 1} has constant entries but the ABP is flagged homogeneous')
	return a


def abp_eval(a: Abp, point, ring: RingSpec | None = None) -> RingValue:
	"""Substitute the point into every form and multiply the layers in order."""
	values, ring, dim = normalize_assignment(point, a.nvars, ring)
	if not a.layers:
		return ring.lift(a.constant, dim)
	d = max(dim, 1)
	payloads = [
		v.payload.astype(object) if v.is_matrix else np.array([[v.payload]], dtype=object)
		for v in values
	]
	identity = np.identity(d, dtype=object)
	acc = None
	for layer in a.layers:
		block = _zeros(layer.rows * d, layer.cols * d)
		for p in range(layer.rows):
			for q in range(layer.cols):
				cell = identity * layer.constant[p, q]
				for var, matrix in layer.coeffs.items():
					if matrix[p, q]:
						cell = cell + payloads[var - 1] * matrix[p, q]
				block[p * d:(p + 1) * d, q * d:(q + 1) * d] = cell
		if acc is None:
			acc = ring.reduce(block[0:d, :])
		else:
			acc = ring.reduce(np.dot(acc, block))
	cols = a.layers[-1].cols
	corner = acc[:, (cols - 1) * d:cols * d]
	if dim == 0:
		return ring.scalar(corner[0, 0])
	return RingValue(ring, ring.array(corner, d))


def trim_abp(a: Abp) -> Abp:
	"""Drop states not reachable from the source or not co-reachable to the sink."""
	if not a.layers:
		return a
	supports = [layer.support() for layer in a.layers]
	forward = [np.zeros(a.layers[0].rows, dtype=bool)]
	forward[0][0] = True
	for supp in supports:
		forward.append(np.any(supp[forward[-1]], axis=0))
	backward = [None] * (len(supports) + 1)
	backward[-1] = np.zeros(a.layers[-1].cols, dtype=bool)
	backward[-1][-1] = True
	for index in range(len(supports) - 1, -1, -1):
		backward[index] = np.any(supports[index][:, backward[index + 1]], axis=1)
	keep = [np.flatnonzero(f & b) for f, b in zip(forward, backward)]
	if any(len(states) == 0 for states in keep):
		return zero_abp(a.nvars, a.degree)
	# The source and sink stay at row 0 and the last column.
	layers = tuple(layer.restrict(keep[i], keep[i + 1]) for i, layer in enumerate(a.layers))
	return Abp(a.nvars, layers, homogeneous=a.homogeneous)


def abp_scale(a: Abp, c) -> Abp:
	if not a.layers:
		return Abp(a.nvars, (), constant=a.constant * c, homogeneous=True)
	return Abp(a.nvars, (a.layers[0].scaled(c),) + a.layers[1:], homogeneous=a.homogeneous)


def _product2(a: Abp, b: Abp) -> Abp:
	if not a.layers:
		return abp_scale(b, a.constant)
	if not b.layers:
		return abp_scale(a, b.constant)
	left = a.layers[-1].restrict(range(a.layers[-1].rows), [a.layers[-1].cols - 1])
	right = b.layers[0].restrict([0], range(b.layers[0].cols))
	return Abp(
		max(a.nvars, b.nvars),
		a.layers[:-1] + (left, right) + b.layers[1:],
		homogeneous=a.homogeneous and b.homogeneous,
	)


def abp_product(*abps: Abp, width_cap=None) -> Abp:
	"""Series composition: computes the product of the given ABPs in order."""
	return check_width(reduce(_product2, abps), width_cap)


def abp_sum(abps: Sequence[Abp], width_cap=None) -> Abp:
	"""Parallel composition of ABPs of equal degree."""
	if not abps:
		raise AbpShapeError('sum of no ABPs')
	degree = abps[0].degree
	if any(a.degree != degree for a in abps):
		raise AbpShapeError('parallel composition needs equal degrees')
	nvars = max(a.nvars for a in abps)
	homogeneous = all(a.homogeneous for a in abps)
	if len(abps) == 1:
		return abps[0]
	if degree == 0:
		return Abp(nvars, (), constant=sum(a.constant for a in abps), homogeneous=True)
	if degree == 1:
		cells = [a.layers[0].restrict([0], [a.layers[0].cols - 1]) for a in abps]
		return Abp(nvars, (reduce(Layer.__add__, cells),), homogeneous=homogeneous)
	first = _combine([a.layers[0].restrict([0], range(a.layers[0].cols)) for a in abps], np.hstack)
	middle = []
	for index in range(1, degree - 1):
		group = [a.layers[index] for a in abps]
		variables = sorted({v for layer in group for v in layer.coeffs})
		middle.append(Layer(
			_block_diag([layer.constant for layer in group]),
			{v: _block_diag([layer.coeffs.get(v, _zeros(*layer.shape)) for layer in group]) for v in variables},
		))
	last = _combine([a.layers[-1].restrict(range(a.layers[-1].rows), [a.layers[-1].cols - 1]) for a in abps], np.vstack)
	return check_width(Abp(nvars, (first, *middle, last), homogeneous=homogeneous), width_cap)


def elementary_symmetric_abp(n, k) -> Abp:
	"""S_{n,k}: n layers of width k+1; the state counts variables picked so far."""
	if k < 0 or k > n:
		raise ValueError(f'need 0 <= k <= n, got n={n}, k={k}')
	if n == 0:
		return constant_abp(0, 1)
	layers = []
	for i in range(1, n + 1):
		shift = _zeros(k + 1, k + 1)
		for j in range(k):
			shift[j, j + 1] = 1
		layers.append(Layer(np.identity(k + 1, dtype=object), {i: shift}))
	return Abp(n, tuple(layers))


def abp_from_poly(poly: SparsePoly, nvars, k) -> Abp:
	"""Trie ABP over the sorted-variable words of a homogeneous degree-k polynomial."""
	if k == 0:
		return constant_abp(nvars, poly.coefficient(MonomialKey()))
	words = sorted((mono.word(), coef) for mono, coef in poly.terms.items())
	if not words:
		return zero_abp(nvars, k)
	levels = [{(): 0}] + [{} for _ in range(k - 1)]
	for word, _ in words:
		for t in range(1, k):
			levels[t].setdefault(word[:t], len(levels[t]))
	layers = []
	for t in range(1, k + 1):
		rows = len(levels[t - 1])
		cols = len(levels[t]) if t < k else 1
		coeffs = {}
		for word, coef in words:
			matrix = coeffs.setdefault(word[t - 1], _zeros(rows, cols))
			row = levels[t - 1][word[:t - 1]]
			if t < k:
				matrix[row, levels[t][word[:t]]] = 1
			else:
				matrix[row, 0] += coef
		layers.append(Layer(_zeros(rows, cols), coeffs))
	return Abp(nvars, tuple(layers), homogeneous=True)


# Circuit to ABP by degree halving


@dataclass
class _Node:
	kind: str
	degree: int
	form: LinearForm | None = None
	terms: tuple = ()
	big: int = -1
	small: int = -1


def _normalize(h: Circuit):
	"""Fold a homogeneous circuit into lin/add/mul nodes; refs are (coef, node) with node -1 for constants."""
	nodes: list[_Node] = []
	refs = []

	def degree(ref):
		return 0 if ref[1] < 0 else nodes[ref[1]].degree

	def new(node):
		nodes.append(node)
		return (1, len(nodes) - 1)

	for gate in h.gates:
		if gate.kind is GateKind.INPUT:
			ref = new(_Node('lin', 1, form=LinearForm.variable(gate.args[0])))
		elif gate.kind is GateKind.CONST:
			ref = (gate.args[0], -1) if gate.args[0] else None
		else:
			a, b = refs[gate.args[0]], refs[gate.args[1]]
			if a is None or b is None:
				ref = None if gate.kind is GateKind.MUL else (a if b is None else b)
			elif gate.kind is GateKind.ADD:
				da, db = degree(a), degree(b)
				if da != db:
					raise NonHomogeneousError(f'sum of degrees {da} and {db}')
				if da == 0 or a[1] == b[1]:
					total = a[0] + b[0]
					ref = (total, a[1]) if total else None
				elif da == 1:
					form = nodes[a[1]].form.scale(a[0]) + nodes[b[1]].form.scale(b[0])
					ref = None if form.is_zero else new(_Node('lin', 1, form=form))
				else:
					ref = new(_Node('add', da, terms=(a, b)))
			else:
				da, db = degree(a), degree(b)
				if da == 0:
					ref = (a[0] * b[0], b[1])
				elif db == 0:
					ref = (a[0] * b[0], a[1])
				else:
					big, small = (a, b) if da >= db else (b, a)
					coef, index = new(_Node('mul', da + db, big=big[1], small=small[1]))
					ref = (a[0] * b[0], index)
		refs.append(ref)
	return nodes, refs[h.output]


class _DegreeHalving:
	"""Homogeneous circuit to ABP by repeatedly splitting at the middle degree."""

	def __init__(self, nodes, nvars, width_cap):
		self.nodes = nodes
		self.nvars = nvars
		self.width_cap = width_cap
		self.desc = []
		for index, node in enumerate(nodes):
			mask = 1 << index
			if node.kind == 'add':
				for _, child in node.terms:
					mask |= self.desc[child]
			elif node.kind == 'mul':
				mask |= self.desc[node.big] | self.desc[node.small]
			self.desc.append(mask)
		self.mul_nodes = [i for i, node in enumerate(nodes) if node.kind == 'mul']
		self._pure = {}
		self._quot = {}
		self._scalar = {}
		self._linear = {}

	def _below(self, v, w):
		return (self.desc[v] >> w) & 1

	def _product(self, *parts):
		return abp_product(*parts, width_cap=self.width_cap)

	def _sum(self, pieces):
		if not pieces:
			return None
		return trim_abp(abp_sum(pieces, width_cap=self.width_cap))

	def pure(self, v):
		if v in self._pure:
			return self._pure[v]
		node = self.nodes[v]
		if node.degree == 1:
			result = linear_abp(self.nvars, node.form)
		else:
			m = node.degree // 2
			pieces = []
			for t in self.mul_nodes:
				tn = self.nodes[t]
				if not self._below(v, t) or tn.degree <= m or self.nodes[tn.big].degree > m:
					continue
				q = self.quotient(v, t)
				if q is None:
					continue
				pieces.append(self._product(q, self.pure(tn.big), self.pure(tn.small)))
			result = self._sum(pieces)
		self._pure[v] = result
		return result

	def quotient(self, v, w):
		key = (v, w)
		if key in self._quot:
			return self._quot[key]
		result = None
		gap = self.nodes[v].degree - self.nodes[w].degree
		if self._below(v, w) and gap >= 0:
			if gap == 0:
				c = self.scalar_quotient(v, w)
				result = constant_abp(self.nvars, c) if c else None
			elif gap == 1:
				form = self.linear_quotient(v, w)
				result = None if form.is_zero else linear_abp(self.nvars, form)
			else:
				m = (self.nodes[v].degree + self.nodes[w].degree) // 2
				pieces = []
				for t in self.mul_nodes:
					tn = self.nodes[t]
					if not self._below(v, t) or not self._below(tn.big, w):
						continue
					if tn.degree <= m or self.nodes[tn.big].degree > m:
						continue
					q = self.quotient(v, t)
					r = self.quotient(tn.big, w)
					if q is None or r is None:
						continue
					pieces.append(self._product(q, r, self.pure(tn.small)))
				result = self._sum(pieces)
		self._quot[key] = result
		return result

	def scalar_quotient(self, v, w):
		if v == w:
			return 1
		key = (v, w)
		if key not in self._scalar:
			node = self.nodes[v]
			total = 0
			if node.kind == 'add':
				for coef, child in node.terms:
					if self._below(child, w):
						total += coef * self.scalar_quotient(child, w)
			self._scalar[key] = total
		return self._scalar[key]

	def linear_quotient(self, v, w) -> LinearForm:
		key = (v, w)
		if key not in self._linear:
			node = self.nodes[v]
			form = LinearForm()
			if node.kind == 'add':
				for coef, child in node.terms:
					if self._below(child, w):
						form = form + self.linear_quotient(child, w).scale(coef)
			elif node.kind == 'mul':
				small = self.nodes[node.small]
				if small.degree == 1 and self.nodes[node.big].degree == self.nodes[w].degree:
					c = self.scalar_quotient(node.big, w) if self._below(node.big, w) else 0
					form = small.form.scale(c)
			self._linear[key] = form
		return self._linear[key]


def _halving_abp(h: Circuit, k, width_cap):
	nodes, out = _normalize(h)
	if out is None:
		return zero_abp(h.nvars, k)
	coef, index = out
	if index < 0:
		return constant_abp(h.nvars, coef)
	abp = _DegreeHalving(nodes, h.nvars, width_cap).pure(index)
	if abp is None:
		return zero_abp(h.nvars, k)
	return abp_scale(abp, coef)


def circuit_to_abp(c: Circuit, k, method='auto', width_cap=None) -> Abp:
	"""Homogeneous k-layer ABP for the degree-k part of c.

	method: 'vsbr' for degree halving, 'sparse' for a trie over the expanded
	terms, 'auto' for sparse when the expansion is small enough, else halving.
	"""
	if width_cap is None:
		width_cap = get_setting('ABP_WIDTH_CAP')
	h = homogenize(c, k)
	abp = None
	if method in ('auto', 'sparse'):
		cap = width_cap if method == 'auto' else get_setting('ORACLE_TERM_CAP')
		try:
			poly = brute_expand(h, degree_cap=k, term_cap=cap).homogeneous_part(k)
			abp = abp_from_poly(poly, c.nvars, k)
		except TermExplosion:
			if method == 'sparse':
				raise
			logger.debug('expansion exceeds %d terms, switching to degree halving', cap)
	elif method != 'vsbr':
		raise ValueError(f'unknown conversion method {method!r}')
	if abp is None:
		abp = _halving_abp(h, k, width_cap)
	abp = trim_abp(abp)
	logger.debug('circuit of %d gates -> ABP degree %d, widths %s', c.size, k, abp.widths)
	return validate_abp(check_width(abp, width_cap))


# Degree bookkeeping on ABPs with affine entries


def _split_constant_layers(a: Abp):
	"""Fold layers without variables into their neighbors; returns (layers, value when nothing is left)."""
	result = []
	pending = None
	for layer in a.layers:
		if pending is not None:
			layer = layer.left_multiply(pending)
			pending = None
		if not layer.coeffs:
			pending = layer.constant
			continue
		result.append(layer)
	if pending is not None:
		if result:
			result[-1] = result[-1].right_multiply(pending)
		else:
			return [], int(pending[0, -1])
	return result, None


def homogenize_abp(a: Abp, t) -> Abp:
	"""Homogeneous degree-t ABP for the degree-t part of an ABP with affine entries.

	States are pairs (position of the last layer that contributed a variable,
	state of the original ABP). Runs of constant edges become products of
	constant matrices.
	"""
	if t < 0:
		raise ValueError('degree must be non-negative')
	if not a.layers:
		return constant_abp(a.nvars, a.constant if t == 0 else 0)
	layers, value = _split_constant_layers(a)
	if not layers:
		return constant_abp(a.nvars, value if t == 0 else 0)
	K = len(layers)
	if t > K:
		return zero_abp(a.nvars, t)
	# chains[r][r2] = C_{r+1} ... C_{r2-1}; position 0 is the source, restricted to row 0.
	chains = []
	for r in range(K + 1):
		if r == 0:
			cur = _zeros(1, layers[0].rows)
			cur[0, 0] = 1
		else:
			cur = np.identity(layers[r - 1].cols, dtype=object)
		row = {}
		for r2 in range(r + 1, K + 2):
			row[r2] = cur
			if r2 <= K:
				cur = np.dot(cur, layers[r2 - 1].constant)
		chains.append(row)
	if t == 0:
		return constant_abp(a.nvars, int(chains[0][K + 1][0, -1]))

	def width(r):
		return 1 if r == 0 else layers[r - 1].cols

	def positions(d):
		if d == 0:
			return [0]
		return list(range(d, K - t + d + 1))

	variables = sorted({v for layer in layers for v in layer.coeffs})
	sink = {r: chains[r][K + 1][:, -1:] for r in range(K + 1)}
	out_layers = []
	for d in range(1, t + 1):
		sources = positions(d - 1)
		offsets_in = np.cumsum([0] + [width(r) for r in sources])
		if d < t:
			targets = positions(d)
			offsets_out = np.cumsum([0] + [width(r) for r in targets])
			cols = int(offsets_out[-1])
		else:
			cols = 1
		rows = int(offsets_in[-1])
		coeffs = {v: _zeros(rows, cols) for v in variables}
		for i, r in enumerate(sources):
			rs = slice(int(offsets_in[i]), int(offsets_in[i + 1]))
			if d < t:
				for j, r2 in enumerate(targets):
					if r2 <= r:
						continue
					cs = slice(int(offsets_out[j]), int(offsets_out[j + 1]))
					for var, matrix in layers[r2 - 1].coeffs.items():
						coeffs[var][rs, cs] += np.dot(chains[r][r2], matrix)
			else:
				for r2 in range(r + 1, K + 1):
					for var, matrix in layers[r2 - 1].coeffs.items():
						coeffs[var][rs, 0:1] += np.dot(np.dot(chains[r][r2], matrix), sink[r2])
		out_layers.append(Layer(_zeros(rows, cols), coeffs))
	return validate_abp(trim_abp(Abp(a.nvars, tuple(out_layers), homogeneous=True)))


def zcoeff_abp(a: Abp, t, z=None) -> Abp:
	"""ABP for the coefficient of z^t, by tracking the z-degree (t+1 is a dead state)."""
	if z is None:
		z = a.nvars
	bound = sum(1 for layer in a.layers if z in layer.coeffs)
	if t < 0 or t > bound:
		raise InvalidInstance(f'z-degree {t} exceeds the bound {bound} of this ABP')
	nvars = a.nvars - 1 if z == a.nvars else a.nvars
	if not a.layers:
		return constant_abp(nvars, a.constant)
	states = t + 2
	layers = []
	for layer in a.layers:
		rows, cols = layer.shape
		alpha = layer.coeffs.get(z, _zeros(rows, cols))
		rest = {v: m for v, m in layer.coeffs.items() if v != z}
		constant = _zeros(states * rows, states * cols)
		coeffs = {v: _zeros(states * rows, states * cols) for v in rest}
		for e in range(states):
			rs = slice(e * rows, (e + 1) * rows)
			cs = slice(e * cols, (e + 1) * cols)
			constant[rs, cs] = layer.constant
			for v, matrix in rest.items():
				coeffs[v][rs, cs] = matrix
			nxt = min(e + 1, states - 1)
			constant[rs, nxt * cols:(nxt + 1) * cols] += alpha
		layers.append(Layer(constant, coeffs))
	first = layers[0]
	layers[0] = first.restrict([0], range(first.cols))
	last = layers[-1]
	sink = t * a.layers[-1].cols + a.layers[-1].cols - 1
	layers[-1] = last.restrict(range(last.rows), [sink])
	if len(layers) == 1:
		layers[0] = first.restrict([0], [sink])
	return trim_abp(Abp(nvars, tuple(layers)))


# Block superdiagonal transfer matrices


@dataclass(frozen=True)
class TransferMatrices:
	dim: int
	width: int
	degree: int
	mats: tuple[RingValue, ...] = field(repr=False)

	@property
	def read_entry(self):
		return (0, self.dim - 1)

	def read(self, value: RingValue) -> RingValue:
		return value.entry(*self.read_entry)


def transfer_matrices(a: Abp, ring: RingSpec, scale=None) -> TransferMatrices:
	"""A_i carries the x_i coefficients of every layer on the block superdiagonal.

	The read entry of A_{i1} ... A_{ik} is the coefficient of the word
	y_{i1} ... y_{ik}; products of any other length read 0. With `scale`,
	A_i is multiplied by scale[i-1].
	"""
	if not a.layers:
		raise AbpShapeError('transfer matrices need at least one layer')
	if not a.is_homogeneous():
		raise NonHomogeneousError('transfer matrices need homogeneous entries')
	k = a.degree
	w = a.max_width
	dim = (k + 1) * w
	mats = []
	for var in range(1, a.nvars + 1):
		matrix = _zeros(dim, dim)
		for position, layer in enumerate(a.layers):
			coef = layer.coeffs.get(var)
			if coef is None:
				continue
			rows, cols = layer.shape
			# The sink column of the last layer sits at the far right.
			shift = w - cols if position == k - 1 else 0
			top = position * w
			left = (position + 1) * w + shift
			matrix[top:top + rows, left:left + cols] = coef
		if scale is not None:
			matrix = matrix * int(scale[var - 1])
		mats.append(RingValue(ring, ring.array(matrix, dim)))
	logger.debug('transfer matrices: degree %d, width %d, dimension %d', k, w, dim)
	return TransferMatrices(dim, w, k, tuple(mats))


# File format


def _parse_entry(line, number, nvars):
	coeffs = {}
	constant = 0
	for token in line.split():
		var, sep, coef = token.partition(':')
		if not sep:
			raise CircuitParseError(f'expected var:coeff, got {token!r}', number)
		try:
			value = int(coef)
			if var == 'const':
				constant += value
				continue
			var = int(var)
		except ValueError:
			raise CircuitParseError(f'bad entry token {token!r}', number) from None
		if not 1 <= var <= nvars:
			raise CircuitParseError(f'variable {var} outside 1..{nvars}', number)
		coeffs[var] = coeffs.get(var, 0) + value
	return LinearForm.from_dict(coeffs, constant)


def parse_abp(text) -> Abp:
	"""`abp <n> <k>`, then per layer `layer <rows> <cols>` and rows*cols entry lines (empty = zero)."""
	lines = [raw.split('#', 1)[0].rstrip() for raw in text.splitlines()]
	number = 0
	header = None
	layers = []
	constant = 1
	while number < len(lines):
		line = lines[number].strip()
		number += 1
		if not line:
			continue
		tokens = line.split()
		if header is None:
			if tokens[0] != 'abp' or len(tokens) != 3:
				raise CircuitParseError('file must start with abp <n> <k>', number)
			header = (int(tokens[1]), int(tokens[2]))
		elif tokens[0] == 'layer' and len(tokens) == 3:
			rows, cols = int(tokens[1]), int(tokens[2])
			# splitlines() drops empty (zero) entries at the very end of the file.
			lines += [''] * (number + rows * cols - len(lines))
			grid = []
			for _ in range(rows):
				row = []
				for _ in range(cols):
					number += 1
					row.append(_parse_entry(lines[number - 1], number, header[0]))
				grid.append(row)
			layers.append(Layer.from_forms(grid))
		elif tokens[0] == 'constant' and len(tokens) == 2:
			constant = int(tokens[1])
		else:
			raise CircuitParseError(f'unexpected line {line!r}', number)
	if header is None:
		raise CircuitParseError('empty ABP file')
	if len(layers) != header[1]:
		raise AbpShapeError(f'header declares {header[1]} layers, found {len(layers)}')
	abp = Abp(header[0], tuple(layers), constant=constant)
	return validate_abp(Abp(abp.nvars, abp.layers, abp.constant, homogeneous=abp.is_homogeneous()))


def format_abp(a: Abp) -> str:
	lines = [f'abp {a.nvars} {a.degree}']
	if not a.layers:
		lines.append(f'constant {a.constant}')
	for layer in a.layers:
		lines.append(f'layer {layer.rows} {layer.cols}')
		for p in range(layer.rows):
			for q in range(layer.cols):
				form = layer.entry(p, q)
				tokens = [f'{v}:{c}' for v, c in form.coeffs]
				if form.constant:
					tokens.append(f'const:{form.constant}')
				lines.append(' '.join(tokens))
	return '\n'.join(lines) + '\n'
