import json
import tempfile
from fractions import Fraction
from io import StringIO
from pathlib import Path

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase, TestCase

from multilinear.benchmark import halves_bound, ryser_bound
from multilinear.management.base import jsonable
from multilinear.models import RunReport

FIXTURES = Path(__file__).resolve().parent.parent / 'fixtures'


def fixture(name):
	return str(FIXTURES / name)


def run(*args):
	out = StringIO()
	call_command(*args, stdout=out)
	return out.getvalue()


class MlcCommandTests(SimpleTestCase):
	def test_plain_output(self):
		output = run('mlc', '--circuit', fixture('snk52.ac'), '--k', '2', '--field', '1000003')
		self.assertIn('value: 10', output)
		self.assertIn('ring ops:', output)

	def test_json_report(self):
		output = run('mlc', '--abp', fixture('square.abp'), '--k', '2', '--json')
		report = json.loads(output)
		self.assertEqual(report['command'], 'mlc')
		self.assertEqual(report['result'], {'value': 2, 'n': 2, 'k': 2, 'abp_widths': [1, 1, 1]})
		self.assertEqual(report['config']['ring'], 'ZZ')
		self.assertGreater(report['ring_ops'], 0)

	def test_circuit_report_carries_abp_widths(self):
		output = run('mlc', '--circuit', fixture('snk52.ac'), '--k', '2', '--json')
		result = json.loads(output)['result']
		self.assertEqual(result['value'], 10)
		widths = result['abp_widths']
		self.assertEqual(len(widths), 3)
		self.assertEqual((widths[0], widths[-1]), (1, 1))
		self.assertIsNone(json.loads(run('mlc', '--circuit', fixture('snk52.ac'), '--k', '0', '--json'))['result']['abp_widths'])

	def test_missing_file(self):
		with self.assertRaises(CommandError) as ctx:
			run('mlc', '--circuit', fixture('missing.ac'), '--k', '2')
		self.assertEqual(ctx.exception.returncode, 2)

	def test_invalid_input(self):
		with self.assertRaises(CommandError) as ctx:
			run('mlc', '--circuit', fixture('snk52.ac'), '--k', '9')
		self.assertEqual(ctx.exception.returncode, 2)
		with self.assertRaises(CommandError) as ctx:
			run('mlc', '--circuit', fixture('snk52.ac'), '--k', '2', '--field', '15')
		self.assertEqual(ctx.exception.returncode, 2)


class DetectionCommandTests(SimpleTestCase):
	def test_found(self):
		output = run('mmd', '--circuit', fixture('planted.ac'), '--k', '3', '--error', '0.5', '--json')
		self.assertEqual(json.loads(output)['result']['verdict'], 'found')

	def test_not_found_exits_one(self):
		out = StringIO()
		with self.assertRaises(CommandError) as ctx:
			call_command('mmd', '--circuit', fixture('no_multilinear.ac'), '--k', '3', '--error', '0.5', stdout=out)
		self.assertEqual(ctx.exception.returncode, 1)
		self.assertIn('verdict: not_found', out.getvalue())

	def test_field_too_small(self):
		with self.assertRaises(CommandError) as ctx:
			run('mmd', '--circuit', fixture('planted.ac'), '--k', '3', '--field', '101')
		self.assertEqual(ctx.exception.returncode, 2)

	def test_depth3(self):
		self.assertIn('value: 2', run('depth3_mlc', '--sps', fixture('square.sps')))
		self.assertIn('value: 4', run('depth3_mmd', '--sps', fixture('square.sps')))
		with self.assertRaises(CommandError) as ctx:
			run('depth3_mmd', '--sps', fixture('cancel.sps'))
		self.assertEqual(ctx.exception.returncode, 1)


class PermanentCommandTests(SimpleTestCase):
	def test_scalar_matrix(self):
		for algo in ('brute', 'rect_ryser', 'halves'):
			self.assertIn('value: 10', run('rper', '--matrix', fixture('rect22.rect'), '--algo', algo))

	def test_complexity_report(self):
		bounds = {'halves': halves_bound(2, 2), 'rect_ryser': ryser_bound(2, 2), 'ryser': ryser_bound(2, 2), 'brute': 4}
		for algo, bound in bounds.items():
			result = json.loads(run('rper', '--matrix', fixture('rect22.rect'), '--algo', algo, '--json'))['result']
			self.assertEqual(result['ops_bound'], bound, msg=algo)
		result = json.loads(run('rper', '--matrix', fixture('rect22.rect'), '--json'))['result']
		self.assertEqual(result['ops_bound'], 16)
		self.assertIn('2^ceil(k/2)', result['scheme'])


class ApplicationCommandTests(SimpleTestCase):
	def test_kpath_count(self):
		output = run('apps', 'kpath', '--graph', fixture('k4.g'), '--k', '3', '--json')
		self.assertEqual(json.loads(output)['result'], {'ordered': 24, 'undirected': 12})

	def test_kpath_detection_exit_code(self):
		with self.assertRaises(CommandError) as ctx:
			run('apps', 'kpath', '--graph', fixture('star4.g'), '--k', '4', '--detect', '--error', '0.9')
		self.assertEqual(ctx.exception.returncode, 1)

	def test_ktree(self):
		output = run('apps', 'ktree', '--graph', fixture('k4.g'), '--tree', fixture('path3.t'), '--json')
		result = json.loads(output)['result']
		self.assertEqual(result['normalized'], '12')
		self.assertEqual(result['k'], 3)

	def test_domset(self):
		output = run('apps', 'domset', '--graph', fixture('star4.g'), '--k', '1', '--t', '4', '--field', '1000003')
		self.assertIn('dominating: True', output)
		self.assertIn('normalized: 1', output)

	def test_mdmatch(self):
		self.assertIn('count: 1', run('apps', 'mdmatch', '--instance', fixture('disjoint.mdm'), '--k', '2'))


class SelftestCommandTests(SimpleTestCase):
	def test_selected_suites_pass(self):
		output = run('selftest', '--suite', 'coefficient_identity', '--suite', 'rper', '--instances', '3')
		self.assertIn('PASS', output)
		self.assertIn('All 2 suites passed', output)

	def test_json_lines(self):
		output = run('selftest', '--suite', 'symmetrization', '--instances', '2', '--json')
		line = json.loads(output.strip())
		self.assertEqual((line['suite'], line['passed']), ('symmetrization', True))


class JsonableTests(SimpleTestCase):
	def test_large_numbers_become_strings(self):
		self.assertEqual(jsonable({'a': 2**60, 'b': 5, 'c': Fraction(1, 3), 'd': [True, None]}),
			{'a': str(2**60), 'b': 5, 'c': '1/3', 'd': [True, None]})


class RunHistoryTests(TestCase):
	def test_save_and_clear(self):
		run('mlc', '--circuit', fixture('square.ac'), '--k', '2', '--save')
		run('rper', '--matrix', fixture('rect22.rect'), '--save')
		self.assertEqual(RunReport.objects.count(), 2)
		report = RunReport.objects.get(command='mlc')
		self.assertEqual(report.result['value'], 2)
		self.assertEqual(report.config['k'], 2)
		self.assertIn('Successfully deleted 1 run reports', run('clear_runs', '--command', 'mlc'))
		self.assertIn('Successfully deleted 1 run reports', run('clear_runs'))
		self.assertFalse(RunReport.objects.exists())


class OpcountCommandTests(SimpleTestCase):
	def test_benchmark_then_plot(self):
		with tempfile.TemporaryDirectory() as tmp:
			output = run('opcount_benchmark', '--n', '5', '--k', '2', '3', '--iterations', '2', '--output-dir', tmp)
			self.assertIn('OPCOUNT SUMMARY', output)
			self.assertIn('depth3_mlc n=5', output)
			self.assertEqual(len(list(Path(tmp).glob('opcounts_*.csv'))), 1)
			run('plot_opcounts', '--input-dir', tmp)
			self.assertTrue((Path(tmp) / 'plot_ops_vs_k.png').exists())
			self.assertTrue((Path(tmp) / 'plot_constants.png').exists())

	def test_plot_without_data(self):
		with tempfile.TemporaryDirectory() as tmp:
			with self.assertRaises(CommandError) as ctx:
				run('plot_opcounts', '--input-dir', tmp)
			self.assertEqual(ctx.exception.returncode, 2)
