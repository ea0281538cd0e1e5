import random
import tracemalloc

from django.test import SimpleTestCase

from multilinear.abp import elementary_symmetric_abp
from multilinear.algebra import RingSpec
from multilinear.circuit import LinearForm, PiSigma, build_elementary_symmetric, parse_circuit, random_circuit, random_pisigma
from multilinear.exceptions import DimensionMismatch, NonHomogeneousError
from multilinear.hadamard import (
	hadamard_pisigma_eval,
	multilinear_part_sum,
	scaled_hadamard_oracle,
	symmetrization_matches,
	symmetrize_pisigma_terms,
)


class SymmetrizationTests(SimpleTestCase):
	def test_gray_code_walk_visits_every_subset(self):
		f = random_pisigma(3, 4, random.Random(0))
		terms = list(symmetrize_pisigma_terms(f))
		self.assertEqual(len(terms), 16)
		self.assertEqual(len({t.subset for t in terms}), 16)
		for term in terms:
			self.assertEqual(term.sign, -1 if (4 - len(term.subset)) % 2 else 1)
			expected = LinearForm()
			for index in term.subset:
				expected = expected + f.forms[index]
			self.assertEqual(term.form, expected)

	def test_word_coefficients_match(self):
		rng = random.Random(5)
		for ring in (RingSpec.integer(), RingSpec.prime_field(7)):
			for _ in range(10):
				f = random_pisigma(3, rng.randint(1, 3), rng)
				self.assertTrue(symmetrization_matches(f, ring))

	def test_rejects_affine_forms(self):
		f = PiSigma(2, (LinearForm.from_dict({1: 1}, 1),))
		with self.assertRaises(NonHomogeneousError):
			list(symmetrize_pisigma_terms(f))


class HadamardEvalTests(SimpleTestCase):
	def test_against_oracle(self):
		rng = random.Random(8)
		ring = RingSpec.prime_field(1000003)
		for _ in range(15):
			n = rng.randint(2, 4)
			k = rng.randint(1, 3)
			g = random_circuit(n, 10, rng)
			f = random_pisigma(n, k, rng)
			point = [rng.randrange(50) for _ in range(n)]
			expected = scaled_hadamard_oracle(g, f, point, ring)
			self.assertEqual(hadamard_pisigma_eval(g, f, point, ring), expected)

	def test_squares_double_the_cross_term(self):
		# (x1 + x2)^2 against itself at (2, 3): x1^2, x2^2 and x1*x2 terms.
		g = parse_circuit('ninputs 2\na = input 1\nb = input 2\ns = add a b\np = mul s s\noutput p\n')
		f = PiSigma(2, (LinearForm.from_dict({1: 1, 2: 1}),) * 2)
		ring = RingSpec.integer()
		self.assertEqual(hadamard_pisigma_eval(g, f, [2, 3], ring), 2 * 4 + 2 * 9 + 4 * 6)

	def test_threads_give_the_same_value(self):
		rng = random.Random(3)
		ring = RingSpec.prime_field(1000003)
		g = random_circuit(4, 12, rng)
		f = random_pisigma(4, 4, rng)
		point = [rng.randrange(100) for _ in range(4)]
		serial = hadamard_pisigma_eval(g, f, point, ring)
		self.assertEqual(hadamard_pisigma_eval(g, f, point, ring, threads=3), serial)

	def test_degree_zero_product(self):
		g = parse_circuit('ninputs 1\nc = const 5\na = input 1\ns = add a c\noutput s\n')
		self.assertEqual(hadamard_pisigma_eval(g, PiSigma(1, ()), [9], RingSpec.integer()), 5)

	def test_dimension_checks(self):
		g = build_elementary_symmetric(3, 2)
		with self.assertRaises(DimensionMismatch):
			hadamard_pisigma_eval(g, random_pisigma(2, 2, random.Random(0)), [1, 1], RingSpec.integer())
		with self.assertRaises(DimensionMismatch):
			hadamard_pisigma_eval(g, random_pisigma(3, 2, random.Random(0)), [1, 1], RingSpec.integer())

	def test_memory_does_not_grow_with_term_count(self):
		ring = RingSpec.prime_field(1000003)
		rng = random.Random(4)
		n = 10

		def peak(k):
			f = random_pisigma(n, k, rng)
			g = build_elementary_symmetric(n, k)
			tracemalloc.start()
			hadamard_pisigma_eval(g, f, [1] * n, ring)
			_, top = tracemalloc.get_traced_memory()
			tracemalloc.stop()
			return top

		small, large = peak(6), peak(8)
		# Four times the terms; only the per-term working set may grow.
		self.assertLess(large, 3 * small)


class MultilinearPartTests(SimpleTestCase):
	def test_circuit_and_abp_inputs(self):
		ring = RingSpec.integer()
		self.assertEqual(multilinear_part_sum(build_elementary_symmetric(5, 2), 5, 2, ring), 10)
		self.assertEqual(multilinear_part_sum(elementary_symmetric_abp(5, 3), 5, 3, ring), 10)

	def test_variable_count_checked(self):
		with self.assertRaises(DimensionMismatch):
			multilinear_part_sum(build_elementary_symmetric(3, 2), 4, 2, RingSpec.integer())
