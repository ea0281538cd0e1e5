"""Rectangular permanents over noncommutative rings.

rper(A) for a k x n matrix A sums, over injections s: [k] -> [n], the
row-ordered products a[0][s(0)] * ... * a[k-1][s(k-1)]. Entries may be
matrices, so the row order of every product is kept.
"""
from __future__ import annotations

import itertools
import logging
import math
import random
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from multilinear.algebra import RingSpec, RingValue
from multilinear.conf import get_setting
from multilinear.exceptions import BudgetExceeded, CircuitParseError, DimensionMismatch, RingMismatch

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RectMatrix:
	entries: tuple[tuple[RingValue, ...], ...]
	ring: RingSpec
	n: int

	@classmethod
	def from_rows(cls, rows: Sequence[Sequence[RingValue]], ring: RingSpec | None = None, n=None):
		rows = tuple(tuple(row) for row in rows)
		if ring is None:
			if not rows or not rows[0]:
				raise DimensionMismatch('cannot infer the ring of an empty matrix')
			ring = rows[0][0].ring
		if n is None:
			n = len(rows[0]) if rows else 0
		values = []
		for row in rows:
			if len(row) != n:
				raise DimensionMismatch(f'every row needs {n} entries')
			values.append(tuple(v if isinstance(v, RingValue) else ring.scalar(v) for v in row))
		matrix = cls(tuple(values), ring, n)
		matrix.check()
		return matrix

	@property
	def k(self):
		return len(self.entries)

	@property
	def dim(self):
		return self.entries[0][0].dim if self.entries else 0

	def check(self):
		if self.k > self.n:
			raise DimensionMismatch(f'rectangular permanent needs k <= n, got k={self.k}, n={self.n}')
		dims = {v.dim for row in self.entries for v in row}
		if len(dims) > 1:
			raise DimensionMismatch(f'mixed entry dimensions {sorted(dims)}')
		if any(v.ring != self.ring for row in self.entries for v in row):
			raise RingMismatch('entries from different rings')

	def swap_rows(self, i, j):
		rows = list(self.entries)
		rows[i], rows[j] = rows[j], rows[i]
		return RectMatrix(tuple(rows), self.ring, self.n)


class _Values:
	"""Ring values, or boundary vectors when only entry `corner` of the result is wanted."""

	def __init__(self, ring: RingSpec, dim, corner):
		if corner is not None and dim == 0:
			raise DimensionMismatch('corner evaluation needs matrix entries')
		self.ring = ring
		self.dim = dim
		self.corner = corner

	def add(self, a, b):
		if a is None:
			return b
		if self.corner is None:
			return a + b
		return self.ring.add_vectors(a, b)

	def scale(self, a, c):
		if self.corner is None:
			return a.scale(c)
		return self.ring.scale_vector(a, c)

	def identity(self, side='left'):
		if self.corner is None:
			return self.ring.one(self.dim)
		return self.ring.unit_vector(self.dim, self.corner[0] if side == 'left' else self.corner[1])

	def product(self, entries, side='left'):
		"""Row-ordered product; on the right side it is a column vector built from the end."""
		if self.corner is None:
			if not entries:
				return self.identity()
			acc = entries[0]
			for entry in entries[1:]:
				acc = acc * entry
			return acc
		vec = self.identity(side)
		if side == 'left':
			for entry in entries:
				vec = self.ring.row_times(vec, entry)
		else:
			for entry in reversed(entries):
				vec = self.ring.times_column(entry, vec)
		return vec

	def extend(self, acc, entry):
		if self.corner is None:
			return entry if acc is None else acc * entry
		return self.ring.row_times(self.identity() if acc is None else acc, entry)

	def pair(self, left, right):
		if self.corner is None:
			return left * right
		return self.ring.dot(left, right)

	def finish(self, value):
		if value is None:
			return self.ring.zero(0 if self.corner is not None else self.dim)
		if self.corner is None or isinstance(value, RingValue):
			return value
		return self.ring.scalar(int(value[self.corner[1]]))


def _empty_permanent(values: _Values):
	if values.corner is None:
		return values.ring.one(values.dim)
	return values.ring.scalar(1 if values.corner[0] == values.corner[1] else 0)


def rper_brute(a: RectMatrix, corner=None, budget=None) -> RingValue:
	"""The defining sum over all injections, with shared row prefixes."""
	k, n = a.k, a.n
	values = _Values(a.ring, a.dim, corner)
	if k == 0:
		return _empty_permanent(values)
	if budget is None:
		budget = get_setting('RPER_BRUTE_BUDGET')
	if n ** k > budget:
		logger.warning('brute-force permanent needs %d injections, budget %d', n ** k, budget)
		raise BudgetExceeded(f'{n}^{k} injections exceed the brute-force budget {budget}', 'use rect_ryser')
	total = None
	stack = [(0, None, frozenset())]
	while stack:
		row, acc, used = stack.pop()
		for col in range(n):
			if col in used:
				continue
			nxt = values.extend(acc, a.entries[row][col])
			if row + 1 == k:
				total = values.add(total, nxt)
			else:
				stack.append((row + 1, nxt, used | {col}))
	return values.finish(total)


def ryser_coefficient(n, k, size):
	return (-1) ** (k - size) * math.comb(n - size, k - size)


def coefficient_identity_holds(max_n=8):
	"""Check that sum over U containing V of (-1)^(k-|U|) C(n-|U|, k-|U|) is 1 when |V| = k and 0 otherwise."""
	for n in range(max_n + 1):
		for k in range(n + 1):
			for v in range(k + 1):
				total = sum(math.comb(n - v, u - v) * ryser_coefficient(n, k, u) for u in range(v, k + 1))
				if total != (1 if v == k else 0):
					return False
	return True


def rper_rect_ryser(a: RectMatrix, corner=None, budget=None) -> RingValue:
	"""Inclusion-exclusion over column subsets of size at most k."""
	k, n = a.k, a.n
	values = _Values(a.ring, a.dim, corner)
	if k == 0:
		return _empty_permanent(values)
	if budget is None:
		budget = get_setting('RPER_RYSER_BUDGET')
	subsets = sum(math.comb(n, u) for u in range(1, k + 1))
	if subsets > budget:
		logger.warning('rectangular Ryser needs %d subsets, budget %d', subsets, budget)
		raise BudgetExceeded(f'{subsets} column subsets exceed the Ryser budget {budget}')
	total = None
	for size in range(1, k + 1):
		coef = ryser_coefficient(n, k, size)
		if a.ring.reduce(coef) == 0:
			continue
		for subset in itertools.combinations(range(n), size):
			sums = []
			for row in a.entries:
				acc = row[subset[0]]
				for col in subset[1:]:
					acc = acc + row[col]
				sums.append(acc)
			total = values.add(total, values.scale(values.product(sums), coef))
	return values.finish(total)


def colex_rank(subset: Sequence[int]):
	"""Rank of a sorted subset among the subsets of the same size, in colexicographic order."""
	return sum(math.comb(c, i) for i, c in enumerate(subset, start=1))


def rper_halves(a: RectMatrix, corner=None, budget=None) -> RingValue:
	"""Meet in the middle over the first ceil(k/2) and last floor(k/2) rows.

	F_r(U) sums the row words of half r that cover U exactly. G_r(W) sums
	F_r over supersets U of W. Disjointness of the two halves is enforced
	by inclusion-exclusion over W: rper = sum (-1)^|W| G_1(W) G_2(W).
	"""
	k, n = a.k, a.n
	values = _Values(a.ring, a.dim, corner)
	if k == 0:
		return _empty_permanent(values)
	h1 = (k + 1) // 2
	h2 = k // 2
	if budget is None:
		budget = get_setting('RPER_TABLE_BUDGET')
	table = 2 * sum(math.comb(n, s) for s in range(h2 + 1))
	if table > budget:
		logger.warning('halves tables need %d entries, budget %d', table, budget)
		raise BudgetExceeded(f'{table} table entries exceed the halves budget {budget}', 'use rect_ryser')
	halves = ((a.entries[:h1], h1, 'left'), (a.entries[h1:], h2, 'right'))
	tables = []
	for rows, h, side in halves:
		g = [[None] * math.comb(n, s) for s in range(h2 + 1)]
		for cover in itertools.combinations(range(n), h):
			f = _exact_cover(rows, cover, h, side, values)
			if f is None:
				continue
			for size in range(min(h, h2) + 1):
				for w in itertools.combinations(cover, size):
					rank = colex_rank(w)
					g[size][rank] = values.add(g[size][rank], f)
		tables.append(g)
	logger.debug('halves: k=%d n=%d, table sizes %s', k, n, [len(level) for level in tables[0]])
	total = None
	for size in range(h2 + 1):
		left, right = tables[0][size], tables[1][size]
		for rank in range(len(left)):
			if left[rank] is None or right[rank] is None:
				continue
			term = values.pair(left[rank], right[rank])
			if size % 2:
				term = -term
			total = term if total is None else total + term
	return values.finish(total)


def _exact_cover(rows, cover, h, side, values: _Values):
	"""Sum over V within cover of (-1)^(h-|V|) times the ordered product of the row sums over V."""
	if h == 0:
		return values.identity(side)
	result = None
	for size in range(1, h + 1):
		sign = -1 if (h - size) % 2 else 1
		for subset in itertools.combinations(cover, size):
			sums = []
			for row in rows:
				acc = row[subset[0]]
				for col in subset[1:]:
					acc = acc + row[col]
				sums.append(acc)
			term = values.product(sums, side)
			result = values.add(result, term if sign == 1 else values.scale(term, -1))
	return result


RPER_ALGORITHMS = {
	'brute': rper_brute,
	'oracle': rper_brute,
	'ryser': rper_rect_ryser,
	'rect_ryser': rper_rect_ryser,
	'halves': rper_halves,
}


def rper(a: RectMatrix, algo='halves', corner=None) -> RingValue:
	try:
		algorithm = RPER_ALGORITHMS[algo]
	except KeyError:
		raise ValueError(f'unknown permanent algorithm {algo!r}') from None
	return algorithm(a, corner=corner)


def s_star_eval(mats: Sequence[RingValue], k, algo='halves', corner=None) -> RingValue:
	"""Symmetrized S_{n,k} at (M_1, ..., M_n): the permanent of k identical rows (M_1 ... M_n)."""
	if not mats:
		raise DimensionMismatch('need at least one matrix')
	row = tuple(mats)
	matrix = RectMatrix(tuple(row for _ in range(k)), row[0].ring, len(row))
	matrix.check()
	return rper(matrix, algo, corner)


def random_rect_matrix(k, n, dim, ring: RingSpec, rng: random.Random, bound=5) -> RectMatrix:
	def draw():
		if dim == 0:
			return ring.random_scalar(rng, bound)
		return ring.random_matrix(dim, rng, bound)
	return RectMatrix(tuple(tuple(draw() for _ in range(n)) for _ in range(k)), ring, n)


def parse_rect_matrix(text, ring: RingSpec) -> RectMatrix:
	"""`rect <k> <n> <d>`, then k*n entries row by row, each d lines of d integers (one integer when d = 0)."""
	lines = [(i, line.split('#', 1)[0].split()) for i, line in enumerate(text.splitlines(), start=1)]
	lines = [(i, tokens) for i, tokens in lines if tokens]
	if not lines or lines[0][1][0] != 'rect' or len(lines[0][1]) != 4:
		raise CircuitParseError('file must start with rect <k> <n> <d>', lines[0][0] if lines else None)
	try:
		k, n, d = (int(x) for x in lines[0][1][1:])
		numbers = [(i, int(x)) for i, tokens in lines[1:] for x in tokens]
	except ValueError as exc:
		raise CircuitParseError(f'non-integer value: {exc}') from None
	per_entry = d * d if d else 1
	if len(numbers) != k * n * per_entry:
		raise CircuitParseError(f'expected {k * n * per_entry} numbers, found {len(numbers)}')
	flat = [x for _, x in numbers]
	rows = []
	for i in range(k):
		row = []
		for j in range(n):
			chunk = flat[(i * n + j) * per_entry:(i * n + j + 1) * per_entry]
			if d == 0:
				row.append(ring.scalar(chunk[0]))
			else:
				row.append(ring.matrix(np.array(chunk, dtype=object).reshape(d, d)))
		rows.append(tuple(row))
	return RectMatrix.from_rows(rows, ring, n)
