from multilinear.applications import (
	count_kpaths,
	count_ktrees,
	count_mdmatchings,
	count_tdomsets,
	has_kpath,
	parse_graph,
	parse_matching,
	parse_tree,
)
from multilinear.management.base import SolverCommand
from multilinear.solvers import MmdConfig


class Command(SolverCommand):
	help = 'Counting applications: k-paths, k-trees, t-dominating sets and m-dimensional matchings'
	config_keys = ('problem', 'graph', 'tree', 'instance', 'k', 't', 'algo', 'detect', 'scheme', 'error')

	def add_arguments(self, parser):
		problems = parser.add_subparsers(dest='problem', required=True)

		kpath = problems.add_parser('kpath', help='Count (or detect) k-vertex paths')
		kpath.add_argument('--graph', required=True)
		kpath.add_argument('--detect', action='store_true', help='Decide existence by randomized detection')
		self.add_k_argument(kpath)
		self.add_mmd_arguments(kpath)

		ktree = problems.add_parser('ktree', help='Count copies of a tree')
		ktree.add_argument('--graph', required=True)
		ktree.add_argument('--tree', required=True)

		domset = problems.add_parser('domset', help='Count k-sets dominating at least t nodes')
		domset.add_argument('--graph', required=True)
		self.add_k_argument(domset)
		domset.add_argument('--t', type=int, required=True)

		mdmatch = problems.add_parser('mdmatch', help='Count k disjoint m-tuples')
		mdmatch.add_argument('--instance', required=True)
		self.add_k_argument(mdmatch)

		for sub in (kpath, ktree, domset, mdmatch):
			self.add_shared_arguments(sub)
			self.add_algo_argument(sub)

	def run(self, options):
		ring = self.ring_from(options)
		algo = options['algo']
		problem = options['problem']
		if problem == 'kpath':
			g = parse_graph(self.read_text(options['graph']))
			if options['detect']:
				cfg = MmdConfig(scheme=options['scheme'], error=options['error'], seed=options['seed'],
					threads=self.threads_from(options))
				return has_kpath(g, options['k'], cfg, ring).to_dict()
			return count_kpaths(g, options['k'], ring, algo).to_dict()
		if problem == 'ktree':
			g = parse_graph(self.read_text(options['graph']))
			tree = parse_tree(self.read_text(options['tree']))
			return {**count_ktrees(g, tree, ring, algo).to_dict(), 'k': tree.n}
		if problem == 'domset':
			g = parse_graph(self.read_text(options['graph']))
			return count_tdomsets(g, options['k'], options['t'], ring, algo).to_dict()
		inst = parse_matching(self.read_text(options['instance']))
		return {'count': count_mdmatchings(inst, options['k'], ring, algo)}

	def exit_code(self, result):
		return 1 if result.get('verdict') == 'not_found' else 0
