import itertools
import math
import random
from pathlib import Path

from django.test import SimpleTestCase

from multilinear.algebra import RingSpec, count_ring_ops
from multilinear.exceptions import BudgetExceeded, CircuitParseError, DimensionMismatch
from multilinear.rper import (
	RectMatrix,
	coefficient_identity_holds,
	colex_rank,
	parse_rect_matrix,
	random_rect_matrix,
	rper,
	rper_brute,
	rper_halves,
	rper_rect_ryser,
	s_star_eval,
)

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'
ALGORITHMS = (rper_brute, rper_rect_ryser, rper_halves)


class SmallPermanentTests(SimpleTestCase):
	def test_square_two_by_two(self):
		a = parse_rect_matrix((FIXTURES / 'rect22.rect').read_text(), RingSpec.integer())
		for algorithm in ALGORITHMS:
			self.assertEqual(algorithm(a), 10)

	def test_single_row_sums_entries(self):
		a = RectMatrix.from_rows([[2, 3, 4]], RingSpec.integer())
		for algorithm in ALGORITHMS:
			self.assertEqual(algorithm(a), 9)

	def test_empty_matrix(self):
		ring = RingSpec.prime_field(7)
		a = RectMatrix((), ring, 3)
		for algorithm in ALGORITHMS:
			self.assertEqual(algorithm(a), 1)

	def test_matrix_entries_keep_row_order(self):
		ring = RingSpec.integer()
		x = ring.matrix([[0, 1], [0, 0]])
		y = ring.matrix([[0, 0], [1, 0]])
		zero = ring.zero(2)
		a = RectMatrix.from_rows([[x, zero], [zero, y]])
		for algorithm in ALGORITHMS:
			self.assertEqual(algorithm(a), x * y)


class AgreementTests(SimpleTestCase):
	def test_coefficient_identity(self):
		self.assertTrue(coefficient_identity_holds(8))

	def test_algorithms_agree(self):
		rng = random.Random(7)
		for ring in (RingSpec.prime_field(2), RingSpec.prime_field(7), RingSpec.integer()):
			for _ in range(25):
				n = rng.randint(1, 7)
				k = rng.randint(1, min(4, n))
				a = random_rect_matrix(k, n, rng.choice([0, 2]), ring, rng)
				brute = rper_brute(a)
				self.assertEqual(rper_rect_ryser(a), brute, msg=f'ryser k={k} n={n} {ring}')
				self.assertEqual(rper_halves(a), brute, msg=f'halves k={k} n={n} {ring}')

	def test_corner_mode_reads_one_entry(self):
		rng = random.Random(9)
		ring = RingSpec.prime_field(101)
		a = random_rect_matrix(3, 5, 3, ring, rng)
		full = rper_brute(a)
		for corner in itertools.product(range(3), repeat=2):
			for algorithm in ALGORITHMS:
				self.assertEqual(algorithm(a, corner=corner), full.entry(*corner))

	def test_swap_rows_changes_noncommutative_value(self):
		ring = RingSpec.integer()
		x = ring.matrix([[0, 1], [0, 0]])
		y = ring.matrix([[0, 0], [1, 0]])
		zero = ring.zero(2)
		a = RectMatrix.from_rows([[x, zero], [zero, y]])
		self.assertEqual(rper(a.swap_rows(0, 1), 'halves'), y * x)
		self.assertNotEqual(rper(a, 'halves'), rper(a.swap_rows(0, 1), 'halves'))


class SymmetricPolynomialTests(SimpleTestCase):
	def test_s_star_on_scalars(self):
		ring = RingSpec.integer()
		mats = [ring.scalar(v) for v in (1, 2, 3, 4)]
		# Ordered pairs of distinct indices: 2 * e_2(1, 2, 3, 4).
		for algo in ('halves', 'ryser', 'brute'):
			self.assertEqual(s_star_eval(mats, 2, algo=algo), 2 * 35)

	def test_equal_matrices_give_scaled_power(self):
		rng = random.Random(31)
		n = 5
		for ring in (RingSpec.prime_field(101), RingSpec.integer()):
			m = ring.random_matrix(2, rng)
			for k in range(1, 5):
				expected = math.factorial(k) * math.comb(n, k) * (m ** k)
				for algo in ('halves', 'ryser', 'brute'):
					self.assertEqual(s_star_eval([m] * n, k, algo=algo), expected, msg=f'{ring} k={k} {algo}')


class BudgetTests(SimpleTestCase):
	def test_brute_budget(self):
		a = random_rect_matrix(3, 6, 0, RingSpec.prime_field(7), random.Random(0))
		with self.assertRaises(BudgetExceeded) as ctx:
			rper_brute(a, budget=100)
		self.assertEqual(ctx.exception.suggestion, 'use rect_ryser')

	def test_ryser_and_halves_budgets(self):
		a = random_rect_matrix(3, 6, 0, RingSpec.prime_field(7), random.Random(0))
		with self.assertRaises(BudgetExceeded):
			rper_rect_ryser(a, budget=10)
		with self.assertRaises(BudgetExceeded):
			rper_halves(a, budget=4)

	def test_operation_counts_stay_within_bounds(self):
		ring = RingSpec.prime_field(1000003)
		rng = random.Random(1)
		n, k = 9, 4
		a = random_rect_matrix(k, n, 0, ring, rng)
		with count_ring_ops() as halves:
			rper_halves(a)
		with count_ring_ops() as ryser:
			rper_rect_ryser(a)
		h = (k + 1) // 2
		subsets = sum(math.comb(n, i) for i in range(k + 1))
		self.assertLessEqual(halves.ops, 4 * math.comb(n, h) * 2**h * k * n)
		self.assertLessEqual(ryser.ops, 4 * subsets * k * n)


class ShapeTests(SimpleTestCase):
	def test_k_larger_than_n(self):
		with self.assertRaises(DimensionMismatch):
			RectMatrix.from_rows([[1], [2]], RingSpec.integer())

	def test_parse_errors(self):
		with self.assertRaises(CircuitParseError):
			parse_rect_matrix('rect 1 2 0\n1\n', RingSpec.integer())

	def test_parse_matrix_entries(self):
		a = parse_rect_matrix('rect 1 2 2\n1 0\n0 1\n0 1\n1 0\n', RingSpec.integer())
		self.assertEqual(a.dim, 2)
		self.assertEqual(rper(a, 'ryser').tolist(), [[1, 1], [1, 1]])

	def test_colex_rank_is_dense(self):
		ranks = sorted(colex_rank(s) for s in itertools.combinations(range(5), 2))
		self.assertEqual(ranks, list(range(10)))
