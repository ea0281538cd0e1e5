from multilinear.circuit import parse_circuit
from multilinear.management.base import SolverCommand
from multilinear.solvers import MmdConfig, mmd


class Command(SolverCommand):
	help = 'Decide whether a circuit has a degree-k multilinear monomial (exit 1 on not_found)'
	config_keys = ('circuit', 'k', 'scheme', 'error', 'point_set')

	def add_solver_arguments(self, parser):
		parser.add_argument('--circuit', required=True)
		self.add_k_argument(parser)
		self.add_mmd_arguments(parser)
		parser.add_argument('--point-set', type=int, default=None, dest='point_set',
			help='Draw evaluation points from 0..S-1')

	def run(self, options):
		g = parse_circuit(self.read_text(options['circuit']))
		cfg = MmdConfig(
			scheme=options['scheme'],
			error=options['error'],
			seed=options['seed'],
			point_set_size=options['point_set'],
			threads=self.threads_from(options),
		)
		return mmd(g, g.nvars, options['k'], cfg, self.ring_from(options)).to_dict()

	def exit_code(self, result):
		return 0 if result['found'] else 1
