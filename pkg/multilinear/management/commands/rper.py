from multilinear.benchmark import ALGORITHMS
from multilinear.management.base import SolverCommand
from multilinear.rper import RPER_ALGORITHMS, parse_rect_matrix, rper

SCHEMES = {
	'brute': 'sum over injective row-to-column maps, n!/(n-k)! * k',
	'rect_ryser': 'signed sum over column subsets of size <= k, C(n, <=k) * k * n',
	'halves': 'join of half-row tables, C(n, ceil(k/2)) * 2^ceil(k/2) * k * n (2^ceil(k/2) from building exact-cover tables)',
}

ALIASES = {'oracle': 'brute', 'ryser': 'rect_ryser'}


class Command(SolverCommand):
	help = 'Rectangular permanent of a k x n matrix with scalar or matrix entries'
	config_keys = ('matrix', 'algo')

	def add_solver_arguments(self, parser):
		parser.add_argument('--matrix', required=True, help='Matrix file (rect <k> <n> <d>)')
		parser.add_argument('--algo', choices=sorted(RPER_ALGORITHMS), default='halves')

	def run(self, options):
		algo = options['algo']
		a = parse_rect_matrix(self.read_text(options['matrix']), self.ring_from(options))
		value = rper(a, algo)
		scheme = ALIASES.get(algo, algo)
		bound = ALGORITHMS[scheme][1]
		return {
			'value': value.tolist(), 'k': a.k, 'n': a.n, 'dim': a.dim,
			'scheme': SCHEMES[scheme], 'ops_bound': bound(a.n, a.k),
		}
