"""Oracle-equivalence suites behind the `selftest` command."""
from __future__ import annotations

import logging
import random
import time
from dataclasses import dataclass, field

from multilinear.algebra import RingSpec
from multilinear.applications import (
	Graph,
	count_kpaths,
	count_ktrees,
	count_mdmatchings,
	count_tdomsets,
	count_tree_copies,
	dominating_sets,
	enumerate_kpaths,
	enumerate_matchings,
	random_graph,
	random_matching,
)
from multilinear.circuit import planted_circuit, random_circuit, random_depth3, random_pisigma
from multilinear.hadamard import hadamard_pisigma_eval, scaled_hadamard_oracle, symmetrization_matches
from multilinear.rper import coefficient_identity_holds, random_rect_matrix, rper_brute, rper_halves, rper_rect_ryser
from multilinear.solvers import MmdConfig, depth3_mmd_int, mlc_count, mlc_oracle, mmd

logger = logging.getLogger(__name__)

RINGS = (RingSpec.prime_field(2), RingSpec.prime_field(7), RingSpec.integer())


@dataclass
class SuiteResult:
	name: str
	checked: int = 0
	failures: list[str] = field(default_factory=list)
	seconds: float = 0.0

	@property
	def passed(self):
		return not self.failures

	def fail(self, detail):
		logger.warning('selftest %s: %s', self.name, detail)
		self.failures.append(detail)

	def to_dict(self):
		return {
			'suite': self.name,
			'passed': self.passed,
			'checked': self.checked,
			'failures': self.failures,
			'seconds': round(self.seconds, 3),
		}


def coefficient_identity(result, rng, instances):
	result.checked = 1
	if not coefficient_identity_holds(8):
		result.fail('rectangular Ryser coefficient identity fails for some n <= 8')


def rper_agreement(result, rng, instances):
	for index in range(instances):
		ring = RINGS[index % len(RINGS)]
		n = rng.randint(1, 6)
		k = rng.randint(1, min(4, n))
		matrix = random_rect_matrix(k, n, rng.choice([0, 2]), ring, rng)
		brute = rper_brute(matrix)
		if not brute == rper_rect_ryser(matrix) == rper_halves(matrix):
			result.fail(f'k={k} n={n} over {ring}: algorithms disagree')
		result.checked += 1


def symmetrization(result, rng, instances):
	ring = RingSpec.prime_field(7)
	for _ in range(instances):
		f = random_pisigma(rng.randint(1, 3), rng.randint(1, 3), rng)
		if not symmetrization_matches(f, ring):
			result.fail(f'word coefficients of f* disagree for {f}')
		result.checked += 1


def scaled_hadamard(result, rng, instances):
	ring = RingSpec.prime_field(1000003)
	for _ in range(instances):
		n = rng.randint(1, 4)
		g = random_circuit(n, rng.randint(n + 1, n + 10), rng)
		f = random_pisigma(n, rng.randint(1, 3), rng)
		point = [rng.randrange(ring.modulus) for _ in range(n)]
		if int(hadamard_pisigma_eval(g, f, point, ring)) != scaled_hadamard_oracle(g, f, point, ring):
			result.fail(f'n={n} k={f.degree}: scaled Hadamard value differs from the oracle')
		result.checked += 1


def mlc(result, rng, instances):
	for index in range(instances):
		ring = RINGS[index % len(RINGS)]
		n = rng.randint(1, 6)
		g = random_circuit(n, rng.randint(n + 1, n + 12), rng)
		k = rng.randint(0, min(3, n))
		expected = mlc_oracle(g, k, ring)
		for algo in ('halves', 'ryser', 'oracle'):
			got = mlc_count(g, n, k, algo=algo, ring=ring)
			if got != expected:
				result.fail(f'{algo} over {ring}, n={n} k={k}: {got} != {expected}')
		result.checked += 1


def mmd_one_sided(result, rng, instances):
	for index in range(instances):
		g = planted_circuit(8, 3, rng, plant=False)
		for scheme in ('basic', 'fast'):
			verdict = mmd(g, 8, 3, MmdConfig(scheme=scheme, error=0.1, seed=f'selftest:{index}'))
			if verdict.found:
				result.fail(f'{scheme} reported a multilinear monomial in a negative instance')
		result.checked += 1


def depth3_squares(result, rng, instances):
	for _ in range(instances):
		k = rng.randint(1, 3)
		f = random_depth3(rng.randint(k, 4), k, rng.randint(1, 3), rng)
		expected = sum(c * c for m, c in f.expand().terms.items() if m.is_multilinear)
		got = depth3_mmd_int(f).value
		if got != expected:
			result.fail(f'sum of squares {got} != {expected}')
		result.checked += 1


def applications(result, rng, instances):
	for _ in range(instances):
		g = random_graph(rng.randint(2, 6), 0.5, rng, directed=rng.random() < 0.3)
		k = rng.randint(1, min(4, g.n))
		if count_kpaths(g, k).ordered != enumerate_kpaths(g, k):
			result.fail(f'k-path count differs on n={g.n} k={k}')
		inst = random_matching(rng.randint(2, 3), 3, rng.randint(1, 6), rng)
		k = rng.randint(0, 2)
		if count_mdmatchings(inst, k) != enumerate_matchings(inst, k):
			result.fail(f'matching count differs for k={k}')
		h = random_graph(rng.randint(2, 5), 0.5, rng)
		k, t = rng.randint(1, min(2, h.n)), rng.randint(0, min(3, h.n))
		report, expected = count_tdomsets(h, k, t), dominating_sets(h, k, t)
		if report.dominating != (expected > 0) or report.normalized not in (None, expected):
			result.fail(f'dominating sets differ for k={k} t={t}: {report.normalized} vs {expected}')
		path = Graph.from_edges(3, [(1, 2), (2, 3)])
		if h.n >= 3 and count_ktrees(h, path).normalized != count_tree_copies(h, path):
			result.fail('3-path tree copies differ from the embedding oracle')
		result.checked += 1


SUITES = {
	'coefficient_identity': coefficient_identity,
	'rper': rper_agreement,
	'symmetrization': symmetrization,
	'scaled_hadamard': scaled_hadamard,
	'mlc': mlc,
	'mmd_one_sided': mmd_one_sided,
	'depth3_squares': depth3_squares,
	'applications': applications,
}


def run_selftest(seed=0, instances=10, suites=None) -> list[SuiteResult]:
	results = []
	for name in suites or SUITES:
		if name not in SUITES:
			raise ValueError(f'unknown suite {name!r}, choose from {", ".join(SUITES)}')
		result = SuiteResult(name)
		start = time.perf_counter()
		SUITES[name](result, random.Random(f'{seed}:{name}'), instances)
		result.seconds = time.perf_counter() - start
		results.append(result)
	return results
