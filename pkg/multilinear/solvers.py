"""Top-level counters and detectors for degree-k multilinear monomials."""
from __future__ import annotations

import logging
import math
import random
from dataclasses import asdict, dataclass, field, replace

from multilinear.abp import Abp, homogenize_abp
from multilinear.algebra import RingSpec, random_prime
from multilinear.circuit import (
	Circuit,
	CircuitBuilder,
	Depth3,
	LinearForm,
	PiSigma,
	brute_expand,
	build_elementary_symmetric,
	eval_circuit,
)
from multilinear.conf import get_setting
from multilinear.exceptions import DimensionMismatch, FieldTooSmall, InvalidInstance
from multilinear.hadamard import hadamard_pisigma_eval, multilinear_part_sum, symmetrize_pisigma_terms

logger = logging.getLogger(__name__)

MLC_ALGORITHMS = ('halves', 'ryser', 'oracle')
MMD_SCHEMES = ('basic', 'fast')


def _check_degree(nvars, n, k):
	if n is None:
		n = nvars
	if nvars != n:
		raise DimensionMismatch(f'polynomial has {nvars} variables, expected {n}')
	if not 0 <= k <= n:
		raise InvalidInstance(f'need 0 <= k <= n, got k={k}, n={n}')
	return n


def mlc_count(g: Circuit | Abp, n=None, k=0, algo='halves', ring: RingSpec | None = None, method='auto') -> int:
	"""Sum of the coefficients of the degree-k multilinear monomials of g."""
	if algo not in MLC_ALGORITHMS:
		raise ValueError(f'unknown algorithm {algo!r}, choose from {", ".join(MLC_ALGORITHMS)}')
	ring = ring or RingSpec.integer()
	n = _check_degree(g.nvars, n, k)
	if k == 0:
		if isinstance(g, Abp):
			return int(ring.reduce(homogenize_abp(g, 0).constant))
		return int(eval_circuit(g, [0] * n, ring))
	rper_algo = 'brute' if algo == 'oracle' else algo
	value = multilinear_part_sum(g, n, k, ring, algo=rper_algo, method=method)
	logger.debug('mlc n=%d k=%d algo=%s over %s -> %s', n, k, algo, ring, int(value))
	return int(value)


def mlc_oracle(g: Circuit, k, ring: RingSpec | None = None) -> int:
	return brute_expand(g, degree_cap=k, ring=ring).multilinear_sum(k)


@dataclass(frozen=True)
class Coloring:
	colors: tuple[int, ...]
	ncolors: int
	seed: str

	@classmethod
	def draw(cls, n, ncolors, seed):
		rng = random.Random(seed)
		return cls(tuple(rng.randint(1, ncolors) for _ in range(n)), ncolors, str(seed))

	def color_of(self, var):
		return self.colors[var - 1]

	def classes(self):
		groups = [[] for _ in range(self.ncolors)]
		for var, color in enumerate(self.colors, start=1):
			groups[color - 1].append(var)
		return groups

	def sieve(self, nvars, pad_offset=None) -> PiSigma:
		"""Product over colors j of the sum of x_l with color j (plus z_j at pad_offset + j)."""
		forms = []
		for j, group in enumerate(self.classes(), start=1):
			coeffs = {var: 1 for var in group}
			if pad_offset is not None:
				coeffs[pad_offset + j] = 1
			forms.append(LinearForm.from_dict(coeffs))
		return PiSigma(nvars, tuple(forms))


def coverage_probability(ncolors, k):
	"""Chance that k fixed variables receive pairwise distinct colors."""
	if k > ncolors:
		return 0.0
	return math.perm(ncolors, k) / ncolors ** k


@dataclass
class MmdConfig:
	scheme: str = 'basic'
	error: float = 0.05
	seed: int | str = 0
	point_set_size: int | None = None
	prime_bits: int = field(default_factory=lambda: get_setting('PRIME_BITS'))
	threads: int = 1

	def __post_init__(self):
		if self.scheme not in MMD_SCHEMES:
			raise ValueError(f'unknown scheme {self.scheme!r}')
		if not 0 < self.error < 1:
			raise ValueError('error budget must lie in (0, 1)')

	def ncolors(self, k):
		"""k colors for the basic scheme, ceil(1.3k) for the fast one."""
		return k if self.scheme == 'basic' else -(-13 * k // 10)

	def trials(self, k):
		rate = math.e if self.scheme == 'basic' else 1.752
		return max(1, math.ceil(rate ** k * math.log(3 / self.error)))


@dataclass
class MmdResult:
	found: bool
	scheme: str
	k: int
	colors: int
	trials_planned: int
	trials_run: int
	coverage_probability: float
	witness_trial: int | None = None
	witness_value: int | None = None
	ring: str = ''

	@property
	def verdict(self):
		return 'found' if self.found else 'not_found'

	def to_dict(self):
		data = asdict(self)
		data['verdict'] = self.verdict
		return data


def _pad_circuit(g: Circuit, ncolors, pad) -> Circuit:
	"""g * S_{c,d}(z_1..z_c) over n + c variables, g first."""
	n = g.nvars
	builder = CircuitBuilder(n + ncolors)
	left = builder.embed(g)
	right = builder.embed(build_elementary_symmetric(ncolors, pad), {i: n + i for i in range(1, ncolors + 1)})
	return builder.build(builder.mul(left, right)).pruned()


def mmd(g: Circuit, n=None, k=0, cfg: MmdConfig | None = None, ring: RingSpec | None = None) -> MmdResult:
	"""Color-coding detector with one-sided error.

	A 'found' verdict is always correct. With integer coefficients (ring
	None or ZZ) every trial works modulo a fresh random prime.
	"""
	cfg = cfg or MmdConfig()
	ring = ring or RingSpec.integer()
	n = _check_degree(g.nvars, n, k)
	c = cfg.ncolors(k)
	pad = c - k
	planned = cfg.trials(k)
	probability = coverage_probability(c, k) if k else 1.0
	result = MmdResult(False, cfg.scheme, k, c, planned, 0, probability, ring=str(ring))
	# Integer mode draws points below the smallest prime of prime_bits bits.
	limit = ring.modulus if ring.is_field else 2 ** (cfg.prime_bits - 1)
	points = min(cfg.point_set_size or limit, limit)
	if points <= 10 * max(k, 1) / cfg.error:
		raise FieldTooSmall(f'{points} evaluation points is too few for k={k}, error {cfg.error}; need > {10 * max(k, 1) / cfg.error:g}')
	if k == 0:
		value = int(eval_circuit(g, [0] * n, ring if ring.is_field else RingSpec.integer()))
		result.trials_run = result.trials_planned = 1
		if value:
			result.found, result.witness_trial, result.witness_value = True, 0, value
		return result
	target = _pad_circuit(g, c, pad) if cfg.scheme == 'fast' else g
	logger.debug('mmd %s: k=%d colors=%d trials=%d', cfg.scheme, k, c, planned)
	for trial in range(planned):
		trial_seed = f'{cfg.seed}:{trial}'
		rng = random.Random(trial_seed)
		if ring.is_field:
			trial_ring = ring
		else:
			trial_ring = RingSpec.prime_field(random_prime(cfg.prime_bits, f'{trial_seed}:prime'))
		size = min(cfg.point_set_size or trial_ring.modulus, trial_ring.modulus)
		point = [rng.randrange(size) for _ in range(n)]
		coloring = Coloring.draw(n, c, f'{trial_seed}:coloring')
		if cfg.scheme == 'fast':
			sieve = coloring.sieve(n + c, pad_offset=n)
			point = point + [1] * c
		else:
			sieve = coloring.sieve(n)
		value = hadamard_pisigma_eval(target, sieve, point, trial_ring, threads=cfg.threads)
		result.trials_run = trial + 1
		if not value.is_zero():
			result.found = True
			result.witness_trial = trial
			result.witness_value = int(value)
			logger.debug('mmd witness at trial %d', trial)
			break
	return result


def mmd_basic(g: Circuit, n=None, k=0, cfg: MmdConfig | None = None, ring: RingSpec | None = None) -> MmdResult:
	return mmd(g, n, k, replace(cfg or MmdConfig(), scheme='basic'), ring)


def mmd_fast(g: Circuit, n=None, k=0, cfg: MmdConfig | None = None, ring: RingSpec | None = None) -> MmdResult:
	return mmd(g, n, k, replace(cfg or MmdConfig(), scheme='fast'), ring)


def _check_depth3(f: Depth3, n, k):
	n = _check_degree(f.nvars, n, f.degree if k is None else k)
	if k is not None and k != f.degree:
		raise InvalidInstance(f'terms have degree {f.degree}, asked for k={k}')
	for _, term in f.terms:
		term.check_homogeneous()
	return n


def depth3_mlc(f: Depth3, n=None, k=None, ring: RingSpec | None = None, threads=1) -> int:
	"""Sum over terms of c_i (T_i o_s S_{n,k})(1), each term by Ryser symmetrization."""
	ring = ring or RingSpec.integer()
	n = _check_depth3(f, n, k)
	snk = build_elementary_symmetric(n, f.degree)
	ones = [1] * n
	total = ring.zero()
	for coef, term in f.terms:
		total = total + hadamard_pisigma_eval(snk, term, ones, ring, threads=threads).scale(coef)
	return int(total)


@dataclass
class Depth3MmdResult:
	found: bool
	value: int

	@property
	def verdict(self):
		return 'found' if self.found else 'not_found'

	def to_dict(self):
		return {'found': self.found, 'verdict': self.verdict, 'value': self.value}


def depth3_mmd_int(f: Depth3, n=None, k=None, ring: RingSpec | None = None, threads=1) -> Depth3MmdResult:
	"""Sum of squares of the multilinear coefficients; positive exactly when one is nonzero."""
	if ring is not None and ring.is_field:
		raise InvalidInstance('the sum-of-squares test needs integer coefficients, not a finite field')
	ring = RingSpec.integer()
	n = _check_depth3(f, n, k)
	k = f.degree
	snk = build_elementary_symmetric(n, k)
	ones = [1] * n
	total = 0
	for coef, term in f.terms:
		for ryser in symmetrize_pisigma_terms(term):
			if k and not ryser.subset:
				continue
			for coef2, other in f.terms:
				product = PiSigma(n, tuple(ryser.form.hadamard(form) for form in other.forms))
				value = int(hadamard_pisigma_eval(snk, product, ones, ring, threads=threads))
				total += ryser.sign * coef * coef2 * value
	logger.debug('depth-3 sum of squares over %d terms: %d', len(f.terms), total)
	return Depth3MmdResult(total > 0, total)
