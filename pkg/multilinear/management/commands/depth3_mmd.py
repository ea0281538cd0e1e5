from multilinear.circuit import parse_depth3
from multilinear.management.base import SolverCommand
from multilinear.solvers import depth3_mmd_int


class Command(SolverCommand):
	help = 'Deterministic multilinear monomial test for integer depth-3 circuits (exit 1 on not_found)'
	config_keys = ('sps', 'k')

	def add_solver_arguments(self, parser):
		parser.add_argument('--sps', required=True)
		self.add_k_argument(parser, required=False)

	def run(self, options):
		f = parse_depth3(self.read_text(options['sps']))
		result = depth3_mmd_int(f, f.nvars, options['k'], ring=self.ring_from(options), threads=self.threads_from(options))
		return {**result.to_dict(), 'n': f.nvars, 'k': f.degree}

	def exit_code(self, result):
		return 0 if result['found'] else 1
