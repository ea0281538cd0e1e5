"""Exact ring arithmetic: prime fields, big integers and square matrices over either."""
from __future__ import annotations

import contextvars
import logging
import math
import random
import threading
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from sympy import isprime

from multilinear.exceptions import DimensionMismatch, PrimeSearchExhausted, RingMismatch

logger = logging.getLogger(__name__)

MAX_MODULUS = 2**62
_INT64_MAX = 2**63 - 1


class OpCounter:
	"""Counts ring operations performed while it is the active counter."""

	def __init__(self):
		self.ops = 0
		self._lock = threading.Lock()

	def tick(self, amount=1):
		with self._lock:
			self.ops += amount


_active_counter = contextvars.ContextVar('multilinear_op_counter', default=None)


@contextmanager
def count_ring_ops():
	counter = OpCounter()
	token = _active_counter.set(counter)
	try:
		yield counter
	finally:
		_active_counter.reset(token)


def _tick():
	counter = _active_counter.get()
	if counter is not None:
		counter.tick()


@dataclass(frozen=True)
class RingSpec:
	"""Coefficient domain: F_p for a prime p < 2^62, or the integers when modulus is None."""

	modulus: int | None = None

	def __post_init__(self):
		if self.modulus is None:
			return
		if not 2 <= self.modulus < MAX_MODULUS:
			raise ValueError(f'modulus {self.modulus} outside [2, 2^62)')
		if not isprime(self.modulus):
			raise ValueError(f'modulus {self.modulus} is not prime')

	@classmethod
	def prime_field(cls, p):
		return cls(int(p))

	@classmethod
	def integer(cls):
		return cls(None)

	@property
	def is_field(self):
		return self.modulus is not None

	@property
	def characteristic(self):
		return self.modulus or 0

	def __str__(self):
		return f'F_{self.modulus}' if self.modulus else 'ZZ'

	def reduce(self, x):
		if self.modulus is None:
			return x
		return x % self.modulus

	def dtype(self, dim):
		# int64 is exact as long as a length-dim dot product of reduced values fits.
		if self.modulus is not None and (self.modulus - 1) ** 2 * max(dim, 1) <= _INT64_MAX:
			return np.int64
		return object

	def array(self, data, dim=None):
		arr = np.array(data, dtype=object)
		if dim is None:
			dim = max(arr.shape) if arr.ndim else 1
		return self.reduce(arr).astype(self.dtype(dim))

	def scalar(self, value):
		return RingValue(self, int(self.reduce(int(value))))

	def zero(self, dim=0):
		return self.lift(0, dim)

	def one(self, dim=0):
		return self.lift(1, dim)

	def identity(self, dim):
		return self.lift(1, dim)

	def lift(self, value, dim=0):
		"""Map an integer into the ring; dim > 0 gives value times the identity matrix."""
		value = int(self.reduce(int(value)))
		if dim == 0:
			return RingValue(self, value)
		payload = np.zeros((dim, dim), dtype=self.dtype(dim))
		np.fill_diagonal(payload, value)
		return RingValue(self, payload)

	def matrix(self, rows):
		arr = np.array(rows, dtype=object)
		if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
			raise DimensionMismatch(f'matrix payload must be square and non-empty, got shape {arr.shape}')
		return RingValue(self, self.array(arr, arr.shape[0]))

	def random_scalar(self, rng: random.Random, bound=10):
		if self.modulus is None:
			return RingValue(self, rng.randint(-bound, bound))
		return RingValue(self, rng.randrange(self.modulus))

	def random_matrix(self, dim, rng: random.Random, bound=10):
		if self.modulus is None:
			rows = [[rng.randint(-bound, bound) for _ in range(dim)] for _ in range(dim)]
		else:
			rows = [[rng.randrange(self.modulus) for _ in range(dim)] for _ in range(dim)]
		return self.matrix(rows)

	# Boundary-vector products. Used when only a single entry of a matrix
	# expression is needed, so full matrix products can be avoided.

	def unit_vector(self, dim, index):
		vec = np.zeros(dim, dtype=self.dtype(dim))
		vec[index] = 1
		return vec

	def row_times(self, vec, value: RingValue):
		_tick()
		return self.reduce(vec @ value.payload)

	def times_column(self, value: RingValue, vec):
		_tick()
		return self.reduce(value.payload @ vec)

	def add_vectors(self, u, v):
		_tick()
		return self.reduce(u + v)

	def scale_vector(self, vec, c):
		_tick()
		return self.reduce(vec * int(self.reduce(int(c))))

	def dot(self, u, v):
		_tick()
		return RingValue(self, int(self.reduce(int(u @ v))))


class RingValue:
	"""A scalar or a square matrix over a RingSpec. Immutable once built."""

	__slots__ = ('ring', 'payload')

	def __init__(self, ring: RingSpec, payload):
		self.ring = ring
		self.payload = payload

	@property
	def is_matrix(self):
		return isinstance(self.payload, np.ndarray)

	@property
	def dim(self):
		"""Matrix dimension, or 0 for scalars."""
		return self.payload.shape[0] if self.is_matrix else 0

	def _coerce(self, other):
		if isinstance(other, RingValue):
			if other.ring != self.ring:
				raise RingMismatch(f'{self.ring} vs {other.ring}')
			if other.dim != self.dim:
				raise DimensionMismatch(f'dimension {self.dim} vs {other.dim}')
			return other
		if isinstance(other, (int, np.integer)):
			return self.ring.lift(int(other), self.dim)
		return NotImplemented

	def __add__(self, other):
		other = self._coerce(other)
		if other is NotImplemented:
			return other
		_tick()
		return RingValue(self.ring, self.ring.reduce(self.payload + other.payload))

	__radd__ = __add__

	def __sub__(self, other):
		other = self._coerce(other)
		if other is NotImplemented:
			return other
		_tick()
		return RingValue(self.ring, self.ring.reduce(self.payload - other.payload))

	def __rsub__(self, other):
		other = self._coerce(other)
		if other is NotImplemented:
			return other
		return other - self

	def __neg__(self):
		_tick()
		return RingValue(self.ring, self.ring.reduce(-self.payload))

	def __mul__(self, other):
		if isinstance(other, (int, np.integer)):
			return self.scale(other)
		other = self._coerce(other)
		if other is NotImplemented:
			return other
		_tick()
		if self.is_matrix:
			return RingValue(self.ring, self.ring.reduce(self.payload @ other.payload))
		return RingValue(self.ring, self.ring.reduce(self.payload * other.payload))

	def __rmul__(self, other):
		if isinstance(other, (int, np.integer)):
			return self.scale(other)
		return NotImplemented

	def scale(self, c):
		"""Multiply by an integer mapped into the ring."""
		_tick()
		c = int(self.ring.reduce(int(c)))
		return RingValue(self.ring, self.ring.reduce(self.payload * c))

	def __pow__(self, exponent):
		result = self.ring.one(self.dim)
		for _ in range(exponent):
			result = result * self
		return result

	def is_zero(self):
		if self.is_matrix:
			return not np.any(self.payload != 0)
		return self.payload == 0

	def entry(self, row, col):
		return RingValue(self.ring, int(self.payload[row, col]))

	def __int__(self):
		if self.is_matrix:
			raise TypeError('matrix value has no integer form')
		return int(self.payload)

	def __eq__(self, other):
		if isinstance(other, (int, np.integer)) and not self.is_matrix:
			return self.payload == self.ring.reduce(int(other))
		if not isinstance(other, RingValue):
			return NotImplemented
		if self.ring != other.ring or self.dim != other.dim:
			return False
		if self.is_matrix:
			return bool(np.array_equal(self.payload, other.payload))
		return self.payload == other.payload

	__hash__ = None

	def tolist(self):
		if self.is_matrix:
			return [[int(x) for x in row] for row in self.payload]
		return int(self.payload)

	def __repr__(self):
		return f'RingValue({self.ring}, {self.tolist()!r})'


def ring_arithmetic(a: RingValue, b: RingValue, op: str) -> RingValue:
	if op == 'add':
		return a + b
	if op == 'sub':
		return a - b
	if op == 'mul':
		return a * b
	raise ValueError(f'unknown ring operation {op!r}')


def random_prime(bits, rng_seed, max_rejections=10_000):
	"""Uniformly sample a prime with exactly `bits` bits, by rejection."""
	if not 16 <= bits <= 62:
		raise ValueError(f'prime size must be between 16 and 62 bits, got {bits}')
	rng = random.Random(rng_seed)
	for _ in range(max_rejections):
		candidate = rng.getrandbits(bits) | (1 << (bits - 1)) | 1
		if isprime(candidate):
			logger.debug('drew %d-bit prime %d', bits, candidate)
			return candidate
	raise PrimeSearchExhausted(f'no {bits}-bit prime after {max_rejections} rejections')


@dataclass(frozen=True, order=True)
class MonomialKey:
	"""A commutative monomial as sorted (variable, exponent) pairs, zero exponents omitted."""

	exponents: tuple[tuple[int, int], ...] = ()

	@classmethod
	def from_variables(cls, variables: Iterable[int]):
		counts = {}
		for var in variables:
			counts[var] = counts.get(var, 0) + 1
		return cls(tuple(sorted(counts.items())))

	@classmethod
	def from_exponents(cls, exponents):
		return cls(tuple(sorted((v, e) for v, e in dict(exponents).items() if e)))

	@property
	def total_degree(self):
		return sum(e for _, e in self.exponents)

	@property
	def is_multilinear(self):
		return all(e == 1 for _, e in self.exponents)

	@property
	def variables(self):
		return tuple(v for v, _ in self.exponents)

	def word(self):
		"""Variables in sorted order, repeated by exponent."""
		return tuple(v for v, e in self.exponents for _ in range(e))

	def factorial(self):
		"""m! = product of e_i! over the exponents."""
		return math.prod(math.factorial(e) for _, e in self.exponents)

	def __mul__(self, other):
		merged = dict(self.exponents)
		for var, e in other.exponents:
			merged[var] = merged.get(var, 0) + e
		return MonomialKey(tuple(sorted(merged.items())))

	def evaluate(self, point, ring: RingSpec):
		value = 1
		for var, e in self.exponents:
			value = ring.reduce(value * pow(int(point[var - 1]), e))
		return int(value)

	def __str__(self):
		if not self.exponents:
			return '1'
		return '*'.join(f'x{v}' if e == 1 else f'x{v}^{e}' for v, e in self.exponents)
