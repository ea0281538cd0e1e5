"""
Ring-operation benchmarks for the permanent algorithms and the depth-3 counter.

Runs every algorithm over an (n, k) grid, records ring-operation counts and
wall times, saves them to a timestamped CSV and fits the constant against
each algorithm's operation bound.
"""
import csv
import glob
import math
import random
import statistics
import time
from datetime import datetime
from pathlib import Path
from typing import Any, Dict, List

from multilinear.algebra import RingSpec, count_ring_ops
from multilinear.circuit import Depth3, random_pisigma
from multilinear.conf import get_setting
from multilinear.rper import random_rect_matrix, rper_brute, rper_halves, rper_rect_ryser
from multilinear.solvers import depth3_mlc

FIELDNAMES = [
	'timestamp', 'algorithm', 'n', 'k', 'iteration',
	'duration_ms', 'ring_ops', 'bound', 'constant',
]


def binom_down(n, k):
	"""Number of subsets of [n] of size at most k."""
	return sum(math.comb(n, i) for i in range(k + 1))


def halves_bound(n, k):
	h = -(-k // 2)
	return math.comb(n, h) * 2**h * k * n


def ryser_bound(n, k):
	return binom_down(n, k) * k * n


def brute_bound(n, k):
	return math.perm(n, k) * max(k, 1)


def depth3_bound(n, k):
	return 2**k * n * max(k, 1)


ALGORITHMS = {
	'halves': (rper_halves, halves_bound),
	'rect_ryser': (rper_rect_ryser, ryser_bound),
	'brute': (rper_brute, brute_bound),
}


class OpcountBenchmark:
	"""Collects one row per (algorithm, n, k, iteration)."""

	def __init__(self, ns, ks, iterations=3, seed=0, ring=None, output_dir='.'):
		self.ns = list(ns)
		self.ks = list(ks)
		self.iterations = iterations
		self.rng = random.Random(seed)
		self.ring = ring or RingSpec.prime_field(get_setting('DEFAULT_FIELD'))
		self.results: List[Dict[str, Any]] = []
		self.csv_path = Path(output_dir) / f"opcounts_{datetime.now().strftime('%Y%m%d_%H%M%S')}.csv"

	def record_result(self, algorithm, n, k, iteration, duration_ms, ring_ops, bound):
		self.results.append({
			'timestamp': datetime.now().isoformat(),
			'algorithm': algorithm,
			'n': n,
			'k': k,
			'iteration': iteration,
			'duration_ms': round(duration_ms, 3),
			'ring_ops': ring_ops,
			'bound': bound,
			'constant': round(ring_ops / bound, 6) if bound else 0.0,
		})

	def measure(self, algorithm, n, k, iteration, func, bound):
		start = time.perf_counter()
		with count_ring_ops() as counter:
			func()
		self.record_result(algorithm, n, k, iteration, (time.perf_counter() - start) * 1000, counter.ops, bound)

	def run(self, algorithms=None):
		algorithms = algorithms or [*ALGORITHMS, 'depth3_mlc']
		for n in self.ns:
			for k in self.ks:
				if k > n:
					continue
				for iteration in range(1, self.iterations + 1):
					matrix = random_rect_matrix(k, n, 0, self.ring, self.rng)
					for name in algorithms:
						if name == 'depth3_mlc':
							f = Depth3(n, k, ((1, random_pisigma(n, k, self.rng)),))
							self.measure(name, n, k, iteration, lambda: depth3_mlc(f, ring=self.ring), depth3_bound(n, k))
							continue
						func, bound = ALGORITHMS[name]
						self.measure(name, n, k, iteration, lambda: func(matrix), bound(n, k))
		return self.results

	def save_to_csv(self):
		with open(self.csv_path, 'w', newline='') as csvfile:
			writer = csv.DictWriter(csvfile, fieldnames=FIELDNAMES)
			writer.writeheader()
			writer.writerows(self.results)
		return self.csv_path

	def summary(self):
		"""Per algorithm: mean/median/stdev of the duration and the largest fitted constant."""
		rows = {}
		for name in dict.fromkeys(r['algorithm'] for r in self.results):
			durations = [r['duration_ms'] for r in self.results if r['algorithm'] == name]
			constants = [r['constant'] for r in self.results if r['algorithm'] == name]
			rows[name] = {
				'runs': len(durations),
				'mean_ms': statistics.mean(durations),
				'median_ms': statistics.median(durations),
				'stdev_ms': statistics.stdev(durations) if len(durations) > 1 else 0.0,
				'max_constant': max(constants),
			}
		return rows


def doubling_ratios(results, algorithm='depth3_mlc'):
	"""Mean ops at k+1 over mean ops at k, for each n."""
	by_point = {}
	for row in results:
		if row['algorithm'] == algorithm:
			by_point.setdefault((int(row['n']), int(row['k'])), []).append(int(row['ring_ops']))
	ratios = {}
	for (n, k), ops in sorted(by_point.items()):
		nxt = by_point.get((n, k + 1))
		if nxt:
			ratios[(n, k)] = statistics.mean(nxt) / statistics.mean(ops)
	return ratios


def load_latest_csv(directory='.'):
	csv_files = glob.glob(str(Path(directory) / 'opcounts_*.csv'))
	if not csv_files:
		raise FileNotFoundError('No opcount CSV found. Run the opcount_benchmark command first.')
	latest = max(csv_files, key=lambda x: Path(x).stat().st_mtime)
	with open(latest, 'r') as f:
		return list(csv.DictReader(f)), latest
