from multilinear.abp import parse_abp
from multilinear.circuit import parse_circuit
from multilinear.hadamard import source_abp
from multilinear.management.base import SolverCommand
from multilinear.solvers import mlc_count


class Command(SolverCommand):
	help = 'Sum the coefficients of the degree-k multilinear monomials of a circuit or ABP'
	config_keys = ('circuit', 'abp', 'k', 'algo', 'method')

	def add_solver_arguments(self, parser):
		source = parser.add_mutually_exclusive_group(required=True)
		source.add_argument('--circuit', help='Arithmetic circuit file')
		source.add_argument('--abp', help='Algebraic branching program file')
		self.add_k_argument(parser)
		self.add_algo_argument(parser)
		parser.add_argument('--method', choices=('auto', 'vsbr', 'sparse'), default='auto',
			help='Circuit to ABP conversion')

	def run(self, options):
		if options['circuit']:
			g = parse_circuit(self.read_text(options['circuit']))
		else:
			g = parse_abp(self.read_text(options['abp']))
		k = options['k']
		widths = None
		if 1 <= k <= g.nvars:
			# Convert once so the report shows the widths of the ABP actually used.
			g = source_abp(g, k, options['method'])
			widths = g.widths
		value = mlc_count(g, g.nvars, k, algo=options['algo'], ring=self.ring_from(options),
			method=options['method'])
		return {'value': value, 'n': g.nvars, 'k': k, 'abp_widths': widths}
