import random
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase, override_settings

from multilinear.abp import (
	Abp,
	Layer,
	abp_eval,
	abp_product,
	abp_scale,
	abp_sum,
	circuit_to_abp,
	elementary_symmetric_abp,
	format_abp,
	homogenize_abp,
	linear_abp,
	parse_abp,
	transfer_matrices,
	trim_abp,
	validate_abp,
	zcoeff_abp,
)
from multilinear.algebra import MonomialKey, RingSpec
from multilinear.circuit import LinearForm, brute_expand, build_elementary_symmetric, eval_circuit, random_circuit
from multilinear.exceptions import AbpShapeError, InvalidInstance, NonHomogeneousError, WidthCapExceeded

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'


def mono(*variables):
	return MonomialKey.from_variables(variables)


def affine(nvars, var, z):
	"""1 + x_z * x_var as a two-layer ABP."""
	first = Layer(np.array([[1, 0]], dtype=object), {z: np.array([[0, 1]], dtype=object)})
	second = Layer(np.array([[1], [0]], dtype=object), {var: np.array([[0], [1]], dtype=object)})
	return Abp(nvars, (first, second))


class LayerAndParseTests(SimpleTestCase):
	def test_fixture(self):
		a = parse_abp((FIXTURES / 'square.abp').read_text())
		self.assertEqual(a.degree, 2)
		self.assertTrue(a.homogeneous)
		self.assertEqual(a.expand().terms, {mono(1, 1): 1, mono(1, 2): 2, mono(2, 2): 1})
		self.assertEqual(parse_abp(format_abp(a)).expand(), a.expand())

	def test_shape_errors(self):
		with self.assertRaises(AbpShapeError):
			parse_abp('abp 1 2\nlayer 1 1\n1:1\n')
		with self.assertRaises(AbpShapeError):
			Layer(np.zeros((1, 2), dtype=object), {1: np.zeros((2, 1), dtype=object)})

	def test_trailing_zero_entry(self):
		body = 'abp 2 2\nlayer 1 2\n1:1\n2:1\nlayer 2 1\n2:1\n'
		for text in (body, body + '\n', body.rstrip('\n')):
			a = parse_abp(text)
			self.assertEqual(a.widths, [1, 2, 1])
			self.assertEqual(a.expand().terms, {mono(1, 2): 1})

	def test_constant_entries_and_degree_zero(self):
		a = parse_abp('abp 1 1\nlayer 1 1\n1:2 const:3\n')
		self.assertFalse(a.homogeneous)
		self.assertEqual(int(abp_eval(a, [5])), 13)
		self.assertEqual(parse_abp('abp 2 0\nconstant 4\n').constant, 4)


class EvalTests(SimpleTestCase):
	def test_elementary_symmetric(self):
		a = elementary_symmetric_abp(4, 2)
		self.assertEqual(int(abp_eval(a, [1, 1, 1, 1])), 6)
		self.assertEqual(a.expand(), brute_expand(build_elementary_symmetric(4, 2)))

	def test_matrix_point(self):
		ring = RingSpec.prime_field(101)
		a = parse_abp((FIXTURES / 'square.abp').read_text())
		x, y = ring.matrix([[1, 2], [0, 1]]), ring.matrix([[0, 1], [1, 0]])
		self.assertEqual(abp_eval(a, [x, y], ring), (x + y) * (x + y))


class CompositionTests(SimpleTestCase):
	def test_product_and_sum(self):
		x1 = linear_abp(2, LinearForm.variable(1))
		x2 = linear_abp(2, LinearForm.variable(2))
		self.assertEqual(abp_product(x1, x2).expand().terms, {mono(1, 2): 1})
		total = abp_sum([abp_product(x1, x1), abp_product(x2, x2)])
		self.assertEqual(total.expand().terms, {mono(1, 1): 1, mono(2, 2): 1})
		with self.assertRaises(AbpShapeError):
			abp_sum([x1, abp_product(x1, x2)])

	def test_width_cap(self):
		parts = [elementary_symmetric_abp(4, 2)] * 3
		with self.assertRaises(WidthCapExceeded):
			abp_sum(parts, width_cap=4)

	def test_trim_drops_dead_states(self):
		layer = Layer(np.zeros((1, 3), dtype=object), {1: np.array([[1, 0, 0]], dtype=object)})
		last = Layer(np.zeros((3, 1), dtype=object), {2: np.array([[1], [1], [0]], dtype=object)})
		a = trim_abp(Abp(2, (layer, last), homogeneous=True))
		self.assertEqual(a.widths, [1, 1, 1])
		self.assertEqual(a.expand().terms, {mono(1, 2): 1})


class CircuitToAbpTests(SimpleTestCase):
	def test_methods_agree_with_expansion(self):
		rng = random.Random(3)
		for _ in range(15):
			c = random_circuit(4, 12, rng)
			for k in range(1, 4):
				expected = brute_expand(c, degree_cap=k).homogeneous_part(k)
				for method in ('vsbr', 'sparse'):
					a = circuit_to_abp(c, k, method=method)
					self.assertTrue(a.is_homogeneous())
					self.assertEqual(a.degree, k)
					self.assertEqual(a.expand(), expected, msg=f'{method} k={k}')

	@override_settings(MULTILINEAR={'ABP_WIDTH_CAP': 1})
	def test_width_cap_from_settings(self):
		with self.assertRaises(WidthCapExceeded):
			circuit_to_abp(build_elementary_symmetric(4, 2), 2, method='vsbr')

	def test_unknown_method(self):
		with self.assertRaises(ValueError):
			circuit_to_abp(build_elementary_symmetric(2, 1), 1, method='magic')


class HomogenizeAbpTests(SimpleTestCase):
	def test_degree_parts_of_affine_product(self):
		a = abp_product(affine(3, 1, 3), affine(3, 2, 3))
		poly = a.expand()
		for t in range(5):
			self.assertEqual(homogenize_abp(a, t).expand(), poly.homogeneous_part(t))

	def test_constant_layers_fold_in(self):
		one = Layer(np.ones((1, 1), dtype=object))
		a = Abp(2, (one, Layer(np.zeros((1, 1), dtype=object), {1: [[2]]}), one))
		self.assertEqual(homogenize_abp(a, 1).expand().terms, {mono(1): 2})
		self.assertEqual(homogenize_abp(a, 0).constant, 0)
		self.assertEqual(homogenize_abp(a, 2).expand().terms, {})


class ZcoeffTests(SimpleTestCase):
	def test_single_factor(self):
		a = affine(2, 1, 2)
		self.assertEqual(zcoeff_abp(a, 1).expand().terms, {mono(1): 1})
		self.assertEqual(zcoeff_abp(a, 0).expand().terms, {mono(): 1})

	def test_product_gives_elementary_symmetric(self):
		a = abp_product(*(affine(4, j, 4) for j in range(1, 4)))
		q = zcoeff_abp(a, 2)
		self.assertEqual(q.nvars, 3)
		self.assertEqual(q.expand(), brute_expand(build_elementary_symmetric(3, 2)))

	def test_degree_bound(self):
		with self.assertRaises(InvalidInstance):
			zcoeff_abp(affine(2, 1, 2), 2)


class TransferMatrixTests(SimpleTestCase):
	def test_word_products_read_coefficients(self):
		ring = RingSpec.integer()
		a = parse_abp('abp 2 2\nlayer 1 2\n1:1\n2:3\nlayer 2 1\n2:5\n1:7\n')
		tm = transfer_matrices(a, ring)
		m1, m2 = tm.mats
		self.assertEqual(tm.read(m1 * m2), 5)
		self.assertEqual(tm.read(m2 * m1), 21)
		self.assertEqual(tm.read(m1 * m1), 0)
		self.assertEqual(tm.read(m1), 0)
		self.assertEqual(tm.read(m1 * m2 * m1), 0)

	def test_scaled_transfer_matrices_evaluate_circuits(self):
		ring = RingSpec.prime_field(1000003)
		a = elementary_symmetric_abp(3, 2)
		tm = transfer_matrices(homogenize_abp(a, 2), ring, scale=[2, 3, 5])
		total = eval_circuit(build_elementary_symmetric(3, 1), tm.mats, ring)
		self.assertEqual(tm.read(total * total), 2 * 3 + 2 * 5 + 3 * 5)

	def test_rejects_affine_abp(self):
		with self.assertRaises(NonHomogeneousError):
			transfer_matrices(affine(2, 1, 2), RingSpec.integer())


class ValidateTests(SimpleTestCase):
	def test_variable_outside_range(self):
		with self.assertRaises(AbpShapeError):
			validate_abp(Abp(1, (Layer(np.zeros((1, 1), dtype=object), {2: [[1]]}),)))

	def test_scale(self):
		a = abp_scale(linear_abp(2, LinearForm.variable(1)), 3)
		self.assertEqual(a.expand().terms, {mono(1): 3})
