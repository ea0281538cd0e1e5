import matplotlib
matplotlib.use('Agg')  # Use non-interactive backend
import matplotlib.pyplot as plt
import numpy as np
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from multilinear.benchmark import load_latest_csv

COLORS = ['#3273dc', '#9b59b6', '#48c774', '#f14668']


def group_ops(rows):
	"""{algorithm: {n: {k: mean ring ops}}}"""
	grouped = {}
	for row in rows:
		cell = grouped.setdefault(row['algorithm'], {}).setdefault(int(row['n']), {})
		cell.setdefault(int(row['k']), []).append(int(row['ring_ops']))
	return {
		algo: {n: {k: float(np.mean(ops)) for k, ops in sorted(by_k.items())} for n, by_k in by_n.items()}
		for algo, by_n in grouped.items()
	}


def plot_ops_vs_k(rows, output_file):
	"""Line chart of ring operations against k at the largest n, log scale"""
	grouped = group_ops(rows)
	fig, ax = plt.subplots(figsize=(10, 6))
	for color, (algo, by_n) in zip(COLORS, grouped.items()):
		n = max(by_n)
		ks = list(by_n[n])
		ax.plot(ks, [by_n[n][k] for k in ks], marker='o', color=color, label=f'{algo} (n={n})')
	ax.set_yscale('log')
	ax.set_xlabel('k', fontsize=12, fontweight='bold')
	ax.set_ylabel('Ring operations', fontsize=12, fontweight='bold')
	ax.set_title('Ring Operations by Degree', fontsize=14, fontweight='bold')
	ax.legend(loc='upper left')
	ax.grid(axis='y', alpha=0.3, linestyle='--')

	plt.tight_layout()
	plt.savefig(output_file, dpi=150, bbox_inches='tight')
	plt.close()


def plot_constants(rows, output_file):
	"""Bar chart of the largest fitted constant per algorithm"""
	constants = {}
	for row in rows:
		constants[row['algorithm']] = max(constants.get(row['algorithm'], 0.0), float(row['constant']))
	algorithms = list(constants)
	values = [constants[a] for a in algorithms]

	fig, ax = plt.subplots(figsize=(10, 6))
	bars = ax.bar(algorithms, values, color=COLORS[:len(algorithms)], alpha=0.8, edgecolor='black')
	for bar, value in zip(bars, values):
		ax.text(bar.get_x() + bar.get_width()/2., bar.get_height(), f'{value:.2f}',
		        ha='center', va='bottom', fontweight='bold', fontsize=11)

	ax.set_ylabel('max ops / bound', fontsize=12, fontweight='bold')
	ax.set_title('Fitted Constants', fontsize=14, fontweight='bold')
	ax.grid(axis='y', alpha=0.3, linestyle='--')

	plt.tight_layout()
	plt.savefig(output_file, dpi=150, bbox_inches='tight')
	plt.close()


class Command(BaseCommand):
	help = 'Render the latest opcount CSV to PNG charts'

	def add_arguments(self, parser):
		parser.add_argument('--input-dir', default='.', dest='input_dir')
		parser.add_argument('--output-dir', default=None, dest='output_dir')

	def handle(self, *args, **options):
		try:
			rows, latest = load_latest_csv(options['input_dir'])
		except FileNotFoundError as exc:
			raise CommandError(str(exc), returncode=2) from exc
		self.stdout.write(f'Loading data from: {latest}')
		out = Path(options['output_dir'] or options['input_dir'])
		for name, plot in (('plot_ops_vs_k.png', plot_ops_vs_k), ('plot_constants.png', plot_constants)):
			plot(rows, out / name)
			self.stdout.write(self.style.SUCCESS(f'Saved: {out / name}'))
