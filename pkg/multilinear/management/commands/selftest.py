import json

from django.core.management.base import BaseCommand, CommandError

from multilinear.selftest import SUITES, run_selftest


class Command(BaseCommand):
	help = 'Run the oracle-equivalence suites on small random instances'

	def add_arguments(self, parser):
		parser.add_argument('--seed', type=int, default=0)
		parser.add_argument('--instances', type=int, default=10, help='Random instances per suite')
		parser.add_argument('--suite', action='append', choices=sorted(SUITES), dest='suites',
			help='Run only this suite (repeatable)')
		parser.add_argument('--json', action='store_true')

	def handle(self, *args, **options):
		results = run_selftest(options['seed'], options['instances'], options['suites'])
		for result in results:
			if options['json']:
				self.stdout.write(json.dumps(result.to_dict(), sort_keys=True))
				continue
			line = f'{result.name:22s} {result.checked:4d} checked  {result.seconds:7.2f}s'
			if result.passed:
				self.stdout.write(self.style.SUCCESS(f'PASS {line}'))
			else:
				self.stdout.write(self.style.ERROR(f'FAIL {line}'))
				for detail in result.failures:
					self.stdout.write(f'     {detail}')
		failed = [r.name for r in results if not r.passed]
		if failed:
			raise CommandError(f'failing suites: {", ".join(failed)}', returncode=1)
		if not options['json']:
			self.stdout.write(self.style.SUCCESS(f'All {len(results)} suites passed'))
