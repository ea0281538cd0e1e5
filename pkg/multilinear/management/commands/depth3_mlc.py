from multilinear.circuit import parse_depth3
from multilinear.management.base import SolverCommand
from multilinear.solvers import depth3_mlc


class Command(SolverCommand):
	help = 'Deterministic multilinear coefficient sum of a sum of products of linear forms'
	config_keys = ('sps', 'k')

	def add_solver_arguments(self, parser):
		parser.add_argument('--sps', required=True, help='Depth-3 file (sps <n> <k>)')
		self.add_k_argument(parser, required=False)

	def run(self, options):
		f = parse_depth3(self.read_text(options['sps']))
		value = depth3_mlc(f, f.nvars, options['k'], ring=self.ring_from(options), threads=self.threads_from(options))
		return {'value': value, 'n': f.nvars, 'k': f.degree, 'terms': len(f.terms)}
