"""Scaled Hadamard products against product-of-sums polynomials and S_{n,k}.

For a homogeneous product f = L_1 ... L_k, the symmetrization f* (the sum of
the ordered products L_s(1) ... L_s(k) over all permutations s) is the
permanent of the k x k matrix with identical rows, so Ryser's formula
writes it as a signed sum of 2^k powers (L_S)^k. Each power is a width-1
ABP, and evaluating g on its transfer matrices reads off one term of
(f o_s g)(a).
"""
from __future__ import annotations

import contextvars
import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Iterator

from multilinear.abp import Abp, Layer, circuit_to_abp, homogenize_abp, transfer_matrices
from multilinear.algebra import MonomialKey, RingSpec, RingValue
from multilinear.circuit import Circuit, LinearForm, PiSigma, brute_expand, eval_circuit
from multilinear.conf import get_setting
from multilinear.exceptions import DimensionMismatch
from multilinear.rper import s_star_eval

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RyserTerm:
	sign: int
	subset: tuple[int, ...]
	form: LinearForm
	degree: int
	nvars: int

	@cached_property
	def forms_product(self) -> Abp:
		"""(L_S)^k as a width-1 ABP of k layers."""
		layer = Layer.from_forms([[self.form]])
		return Abp(self.nvars, tuple(layer for _ in range(self.degree)), homogeneous=True)


def symmetrize_pisigma_terms(f: PiSigma) -> Iterator[RyserTerm]:
	"""Yield the 2^k signed Ryser terms of f*, walking subsets in Gray-code order from the empty set."""
	f.check_homogeneous()
	k = f.degree
	subset = set()
	form = LinearForm()
	previous = 0
	for step in range(1 << k):
		gray = step ^ (step >> 1)
		if step:
			bit = (gray ^ previous).bit_length() - 1
			if gray & (1 << bit):
				subset.add(bit)
				form = form + f.forms[bit]
			else:
				subset.discard(bit)
				form = form + f.forms[bit].scale(-1)
		previous = gray
		sign = -1 if (k - len(subset)) % 2 else 1
		yield RyserTerm(sign, tuple(sorted(subset)), form, k, f.nvars)


def _term_value(g: Circuit, term: RyserTerm, point, ring: RingSpec) -> RingValue:
	tm = transfer_matrices(term.forms_product, ring, scale=point)
	value = tm.read(eval_circuit(g, tm.mats, ring, dim=tm.dim))
	return -value if term.sign < 0 else value


def hadamard_pisigma_eval(g: Circuit, f: PiSigma, point, ring: RingSpec, threads=1) -> RingValue:
	"""(f o_s g)(point) = sum over monomials m of m! [m]f [m]g m(point).

	g is not homogenized: products of other than k transfer matrices read 0.
	Terms are streamed in batches, so memory does not grow with 2^k.
	"""
	if g.nvars != f.nvars:
		raise DimensionMismatch(f'circuit has {g.nvars} variables, product has {f.nvars}')
	if len(point) != g.nvars:
		raise DimensionMismatch(f'expected a point with {g.nvars} coordinates, got {len(point)}')
	point = [int(ring.reduce(int(a))) for a in point]
	f.check_homogeneous()
	if f.degree == 0:
		return eval_circuit(g, [0] * g.nvars, ring)
	terms = symmetrize_pisigma_terms(f)
	total = ring.zero()
	if threads <= 1:
		for term in terms:
			total = total + _term_value(g, term, point, ring)
		return total
	batch = threads * 4
	with ThreadPoolExecutor(max_workers=threads) as executor:
		while True:
			futures = []
			for term in terms:
				ctx = contextvars.copy_context()
				futures.append(executor.submit(ctx.run, _term_value, g, term, point, ring))
				if len(futures) == batch:
					break
			if not futures:
				break
			# Summed in term order so the result does not depend on scheduling.
			for future in futures:
				total = total + future.result()
	return total


def scaled_hadamard_oracle(g: Circuit, f: PiSigma, point, ring: RingSpec):
	"""Explicit sum of m! [m]f [m]g m(point) over the degree-k monomials of f."""
	fpoly = f.expand()
	gpoly = brute_expand(g, degree_cap=f.degree)
	total = 0
	for mono, coef in fpoly.terms.items():
		other = gpoly.coefficient(mono)
		if other:
			total += mono.factorial() * coef * other * mono.evaluate(point, ring)
	return int(ring.reduce(total))


def source_abp(g: Circuit | Abp, k, method='auto') -> Abp:
	"""The homogeneous degree-k ABP whose transfer matrices feed the permanent."""
	if isinstance(g, Abp):
		return g if g.homogeneous and g.degree == k else homogenize_abp(g, k)
	abp = circuit_to_abp(g, k, method=method)
	return abp if abp.homogeneous else replace(abp, homogeneous=True)


def multilinear_part_sum(g: Circuit | Abp, n, k, ring: RingSpec, algo='halves', method='auto') -> RingValue:
	"""(g o_s S_{n,k})(1) = sum of the coefficients of the degree-k multilinear monomials of g."""
	if g.nvars != n:
		raise DimensionMismatch(f'polynomial has {g.nvars} variables, expected {n}')
	abp = source_abp(g, k, method)
	if k == 0:
		return ring.scalar(abp.constant)
	tm = transfer_matrices(abp, ring)
	logger.debug('S*_{%d,%d} over %d matrices of dimension %d', n, k, n, tm.dim)
	return s_star_eval(tm.mats, k, algo=algo, corner=tm.read_entry)


def default_threads():
	return max(1, int(get_setting('THREADS')))


def symmetrization_matches(f: PiSigma, ring: RingSpec) -> bool:
	"""Every word coefficient of the signed Ryser sum equals m! [m]f for the word's monomial m."""
	expected = f.expand(ring)
	terms = list(symmetrize_pisigma_terms(f))
	for word in itertools.product(range(1, f.nvars + 1), repeat=f.degree):
		total = sum(t.sign * math.prod(t.form.coefficient(v) for v in word) for t in terms)
		mono = MonomialKey.from_variables(word)
		if ring.reduce(total) != ring.reduce(mono.factorial() * expected.coefficient(mono)):
			return False
	return True
