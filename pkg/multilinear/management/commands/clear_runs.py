from django.core.management.base import BaseCommand

from multilinear.models import RunReport


class Command(BaseCommand):
	help = 'Clear the stored run reports'

	def add_arguments(self, parser):
		parser.add_argument('--command', dest='only', help='Only delete reports of this command')

	def handle(self, *args, **options):
		reports = RunReport.objects.all()
		if options['only']:
			reports = reports.filter(command=options['only'])
		count = reports.count()
		reports.delete()
		self.stdout.write(
			self.style.SUCCESS(f'Successfully deleted {count} run reports')
		)
