from django.core.management.base import BaseCommand, CommandError

from multilinear.algebra import RingSpec
from multilinear.benchmark import ALGORITHMS, OpcountBenchmark, doubling_ratios
from multilinear.exceptions import MultilinearError


class Command(BaseCommand):
	help = 'Measure ring-operation counts of the permanent algorithms and depth3_mlc over an (n, k) grid'

	def add_arguments(self, parser):
		parser.add_argument('--n', type=int, nargs='+', default=[6, 8, 10], dest='ns')
		parser.add_argument('--k', type=int, nargs='+', default=[2, 3, 4, 5], dest='ks')
		parser.add_argument('--iterations', type=int, default=3)
		parser.add_argument('--algo', action='append', choices=[*ALGORITHMS, 'depth3_mlc'], dest='algorithms')
		parser.add_argument('--field', type=int, default=None, help='Prime modulus (default: settings DEFAULT_FIELD)')
		parser.add_argument('--seed', type=int, default=0)
		parser.add_argument('--output-dir', default='.', dest='output_dir')

	def handle(self, *args, **options):
		benchmark = OpcountBenchmark(
			options['ns'],
			options['ks'],
			iterations=options['iterations'],
			seed=options['seed'],
			ring=RingSpec.prime_field(options['field']) if options['field'] else None,
			output_dir=options['output_dir'],
		)
		try:
			benchmark.run(options['algorithms'])
		except MultilinearError as exc:
			raise CommandError(str(exc), returncode=2) from exc
		if not benchmark.results:
			self.stdout.write(self.style.WARNING('No (n, k) pair with k <= n; nothing measured'))
			return
		path = benchmark.save_to_csv()
		self.stdout.write(self.style.SUCCESS(f'Results saved to {path}'))

		self.stdout.write('\n' + '=' * 80)
		self.stdout.write('OPCOUNT SUMMARY')
		self.stdout.write('=' * 80)
		for name, row in benchmark.summary().items():
			self.stdout.write(
				f"{name:12s} runs: {row['runs']:3d}  Avg: {row['mean_ms']:8.2f}ms  Median: {row['median_ms']:8.2f}ms  "
				f"StdDev: {row['stdev_ms']:7.2f}ms  max C: {row['max_constant']:.3f}"
			)
		for (n, k), ratio in doubling_ratios(benchmark.results).items():
			self.stdout.write(f'depth3_mlc n={n}: ops(k={k + 1}) / ops(k={k}) = {ratio:.2f}')
