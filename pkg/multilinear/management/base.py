import json
import time
from fractions import Fraction
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from multilinear.algebra import RingSpec, count_ring_ops
from multilinear.exceptions import MultilinearError
from multilinear.hadamard import default_threads
from multilinear.models import RunReport
from multilinear.solvers import MLC_ALGORITHMS, MMD_SCHEMES

SAFE_INT = 2**53


def jsonable(value):
	"""Numbers a JSON reader would round (big ints, fractions) become strings."""
	if isinstance(value, bool) or value is None:
		return value
	if isinstance(value, int):
		return value if abs(value) < SAFE_INT else str(value)
	if isinstance(value, Fraction):
		return str(value)
	if isinstance(value, dict):
		return {str(k): jsonable(v) for k, v in value.items()}
	if isinstance(value, (list, tuple)):
		return [jsonable(v) for v in value]
	if isinstance(value, Path):
		return str(value)
	return value


class SolverCommand(BaseCommand):
	"""Shared flags, error translation, ring-op accounting and report output."""

	# Option names copied into the report's resolved config.
	config_keys = ()

	def add_arguments(self, parser):
		self.add_shared_arguments(parser)
		self.add_solver_arguments(parser)

	def add_shared_arguments(self, parser):
		ring = parser.add_mutually_exclusive_group()
		ring.add_argument('--field', type=int, metavar='P', help='Work over F_P for a prime P < 2^62')
		ring.add_argument('--int', action='store_true', dest='integers', help='Work over the integers (default)')
		parser.add_argument('--seed', type=int, default=0)
		parser.add_argument('--threads', type=int, default=None, help='Worker threads (default: available cores)')
		parser.add_argument('--json', action='store_true', help='Print one JSON line instead of plain text')
		parser.add_argument('--save', action='store_true', help='Store the report in the run history')

	def add_solver_arguments(self, parser):
		pass

	@staticmethod
	def add_k_argument(parser, required=True):
		parser.add_argument('--k', type=int, required=required)

	@staticmethod
	def add_algo_argument(parser):
		parser.add_argument('--algo', choices=MLC_ALGORITHMS, default='halves')

	@staticmethod
	def add_mmd_arguments(parser):
		parser.add_argument('--scheme', choices=MMD_SCHEMES, default='basic')
		parser.add_argument('--error', type=float, default=0.05, help='Error budget in (0, 1)')

	def ring_from(self, options):
		if options.get('field') is not None:
			return RingSpec.prime_field(options['field'])
		return RingSpec.integer()

	def threads_from(self, options):
		return options.get('threads') or default_threads()

	def read_text(self, path):
		try:
			return Path(path).read_text()
		except OSError as exc:
			raise CommandError(f'cannot read {path}: {exc.strerror or exc}', returncode=2) from None

	def run(self, options):
		"""Return the result dict for one invocation."""
		raise NotImplementedError

	def exit_code(self, result):
		return 0

	def handle(self, *args, **options):
		config = {key: options.get(key) for key in ('field', 'seed', 'threads', *self.config_keys)}
		start = time.perf_counter()
		try:
			config['ring'] = str(self.ring_from(options))
			with count_ring_ops() as counter:
				result = self.run(options)
		except MultilinearError as exc:
			raise CommandError(str(exc), returncode=2) from exc
		except ValueError as exc:
			raise CommandError(str(exc), returncode=2) from exc
		report = {
			'command': self.name,
			'config': jsonable(config),
			'result': jsonable(result),
			'wall_time': round(time.perf_counter() - start, 6),
			'ring_ops': counter.ops,
		}
		self.emit(report, options)
		if options['save']:
			RunReport.objects.create(**report)
		code = self.exit_code(result)
		if code:
			raise CommandError(f'{self.name}: not_found', returncode=code)

	@property
	def name(self):
		return self.__module__.rsplit('.', 1)[-1]

	def emit(self, report, options):
		if options['json']:
			self.stdout.write(json.dumps(report, sort_keys=True))
			return
		for key, value in report['result'].items():
			self.stdout.write(self.style.SUCCESS(f'{key}: {value}'))
		self.stdout.write(f"wall time: {report['wall_time']:.3f}s  ring ops: {report['ring_ops']}")
