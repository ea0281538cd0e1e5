"""Arithmetic circuits: data model, file format, evaluation, homogenization and the sparse oracle."""
from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from multilinear.algebra import MonomialKey, RingSpec, RingValue
from multilinear.conf import get_setting
from multilinear.exceptions import (
	CircuitParseError,
	DimensionMismatch,
	NonHomogeneousError,
	TermExplosion,
	UndefinedGateError,
)

logger = logging.getLogger(__name__)


class GateKind(str, Enum):
	INPUT = 'input'
	CONST = 'const'
	ADD = 'add'
	MUL = 'mul'


@dataclass(frozen=True)
class Gate:
	kind: GateKind
	# input: (var,), const: (value,), add/mul: (left, right) as gate indices
	args: tuple[int, ...]
	name: str | None = None

	@property
	def children(self):
		if self.kind in (GateKind.ADD, GateKind.MUL):
			return self.args
		return ()


@dataclass(frozen=True)
class Circuit:
	"""A DAG of binary gates. Children always precede their parents; mul child order is significant."""

	nvars: int
	gates: tuple[Gate, ...]
	output: int

	def __post_init__(self):
		if not 0 <= self.output < len(self.gates):
			raise CircuitParseError(f'output gate {self.output} out of range')
		for index, gate in enumerate(self.gates):
			if gate.kind is GateKind.INPUT and not 1 <= gate.args[0] <= self.nvars:
				raise CircuitParseError(f'input variable {gate.args[0]} outside 1..{self.nvars}')
			for child in gate.children:
				if not 0 <= child < index:
					raise CircuitParseError(f'gate {index} references gate {child} out of order')

	@property
	def size(self):
		return len(self.gates)

	def gate_name(self, index):
		return self.gates[index].name or f'g{index + 1}'

	def pruned(self):
		"""Drop gates the output does not depend on."""
		live = {self.output}
		for index in range(self.output, -1, -1):
			if index in live:
				live.update(self.gates[index].children)
		remap = {}
		gates = []
		for index, gate in enumerate(self.gates):
			if index not in live:
				continue
			remap[index] = len(gates)
			if gate.children:
				gate = Gate(gate.kind, tuple(remap[c] for c in gate.args), gate.name)
			gates.append(gate)
		return Circuit(self.nvars, tuple(gates), remap[self.output])


class CircuitBuilder:
	"""Incremental circuit construction; inputs and constants are shared."""

	def __init__(self, nvars):
		self.nvars = nvars
		self.gates: list[Gate] = []
		self._inputs = {}
		self._consts = {}

	def _append(self, kind, args):
		self.gates.append(Gate(kind, tuple(args), f'g{len(self.gates) + 1}'))
		return len(self.gates) - 1

	def input(self, var):
		if var not in self._inputs:
			self._inputs[var] = self._append(GateKind.INPUT, (var,))
		return self._inputs[var]

	def const(self, value):
		value = int(value)
		if value not in self._consts:
			self._consts[value] = self._append(GateKind.CONST, (value,))
		return self._consts[value]

	def add(self, left, right):
		return self._append(GateKind.ADD, (left, right))

	def mul(self, left, right):
		return self._append(GateKind.MUL, (left, right))

	def sum(self, ids: Sequence[int]):
		if not ids:
			return self.const(0)
		acc = ids[0]
		for gate in ids[1:]:
			acc = self.add(acc, gate)
		return acc

	def product(self, ids: Sequence[int]):
		if not ids:
			return self.const(1)
		acc = ids[0]
		for gate in ids[1:]:
			acc = self.mul(acc, gate)
		return acc

	def linear_form(self, form: LinearForm):
		terms = []
		for var, coef in form.coeffs:
			x = self.input(var)
			terms.append(x if coef == 1 else self.mul(self.const(coef), x))
		if form.constant:
			terms.append(self.const(form.constant))
		return self.sum(terms)

	def embed(self, circuit: Circuit, var_map: Mapping[int, int] | None = None):
		"""Copy `circuit` in, renaming variables through var_map; returns the copied output."""
		remap = []
		for gate in circuit.gates:
			if gate.kind is GateKind.INPUT:
				var = gate.args[0]
				remap.append(self.input(var_map.get(var, var) if var_map else var))
			elif gate.kind is GateKind.CONST:
				remap.append(self.const(gate.args[0]))
			elif gate.kind is GateKind.ADD:
				remap.append(self.add(remap[gate.args[0]], remap[gate.args[1]]))
			else:
				remap.append(self.mul(remap[gate.args[0]], remap[gate.args[1]]))
		return remap[circuit.output]

	def build(self, output):
		return Circuit(self.nvars, tuple(self.gates), output)


# File format


def _tokenize(text):
	for number, raw in enumerate(text.splitlines(), start=1):
		line = raw.split('#', 1)[0].strip()
		if line:
			yield number, line.split()


def _parse_int(token, number, what):
	try:
		return int(token)
	except ValueError:
		raise CircuitParseError(f'expected integer {what}, got {token!r}', number) from None


def parse_circuit(text) -> Circuit:
	nvars = None
	output = None
	definitions = {}
	order = []
	for number, tokens in _tokenize(text):
		head = tokens[0]
		if head == 'ninputs':
			if nvars is not None or len(tokens) != 2:
				raise CircuitParseError('malformed or repeated ninputs header', number)
			nvars = _parse_int(tokens[1], number, 'input count')
			if nvars < 0:
				raise CircuitParseError('input count must be non-negative', number)
			continue
		if nvars is None:
			raise CircuitParseError('file must start with ninputs', number)
		if head == 'output':
			if len(tokens) != 2:
				raise CircuitParseError('output takes exactly one gate name', number)
			output = (tokens[1], number)
			continue
		if len(tokens) < 3 or tokens[1] != '=':
			raise CircuitParseError(f'cannot parse {" ".join(tokens)!r}', number)
		name, op, args = tokens[0], tokens[2], tokens[3:]
		if name in definitions:
			raise CircuitParseError(f'gate {name!r} defined twice', number)
		if op in ('input', 'const'):
			if len(args) != 1:
				raise CircuitParseError(f'{op} takes one argument', number)
			value = _parse_int(args[0], number, 'argument')
			if op == 'input' and not 1 <= value <= nvars:
				raise CircuitParseError(f'input index {value} outside 1..{nvars}', number)
			args = (value,)
		elif op in ('add', 'mul'):
			if len(args) < 2:
				raise CircuitParseError(f'{op} needs at least two operands', number)
		else:
			raise CircuitParseError(f'unknown gate type {op!r}', number)
		definitions[name] = (op, tuple(args), number)
		order.append(name)
	if nvars is None:
		raise CircuitParseError('empty circuit file')
	if output is None:
		raise CircuitParseError('missing output line')

	gates: list[Gate] = []
	index_of = {}
	state = {}

	def emit(name):
		op, args, _ = definitions[name]
		if op == 'input':
			gates.append(Gate(GateKind.INPUT, args, name))
		elif op == 'const':
			gates.append(Gate(GateKind.CONST, args, name))
		else:
			kind = GateKind(op)
			operands = [index_of[arg] for arg in args]
			acc = operands[0]
			# Wider gates become left-associated binary chains.
			for position, operand in enumerate(operands[1:], start=1):
				last = position == len(operands) - 1
				gates.append(Gate(kind, (acc, operand), name if last else f'{name}.{position}'))
				acc = len(gates) - 1
		index_of[name] = len(gates) - 1

	def visit(root, root_line):
		# Explicit stack: forward-reference chains can be far deeper than the recursion limit.
		stack = [(root, root_line, False)]
		while stack:
			name, number, expanded = stack.pop()
			if expanded:
				emit(name)
				state[name] = 'done'
				continue
			if name not in definitions:
				raise UndefinedGateError(name, number)
			if state.get(name) == 'done':
				continue
			if state.get(name) == 'active':
				raise CircuitParseError(f'cycle through gate {name!r}', definitions[name][2])
			state[name] = 'active'
			stack.append((name, number, True))
			op, args, line = definitions[name]
			if op in ('add', 'mul'):
				stack.extend((arg, line, False) for arg in reversed(args))
		return index_of[root]

	for name in order:
		visit(name, definitions[name][2])
	out_name, out_line = output
	return Circuit(nvars, tuple(gates), visit(out_name, out_line))


def format_circuit(c: Circuit) -> str:
	lines = [f'ninputs {c.nvars}']
	for index, gate in enumerate(c.gates):
		name = c.gate_name(index)
		if gate.children:
			left, right = (c.gate_name(child) for child in gate.args)
			lines.append(f'{name} = {gate.kind.value} {left} {right}')
		else:
			lines.append(f'{name} = {gate.kind.value} {gate.args[0]}')
	lines.append(f'output {c.gate_name(c.output)}')
	return '\n'.join(lines) + '\n'


# Evaluation


def normalize_assignment(assignment, nvars, ring):
	if isinstance(assignment, Mapping):
		values = [assignment.get(var) for var in range(1, nvars + 1)]
		if any(v is None for v in values):
			raise DimensionMismatch('every variable needs a value')
	else:
		values = list(assignment)
		if len(values) != nvars:
			raise DimensionMismatch(f'expected {nvars} values, got {len(values)}')
	if ring is None:
		ring = next((v.ring for v in values if isinstance(v, RingValue)), None)
		if ring is None:
			ring = RingSpec.integer()
	values = [v if isinstance(v, RingValue) else ring.scalar(v) for v in values]
	dims = {v.dim for v in values}
	if len(dims) > 1:
		raise DimensionMismatch(f'mixed value dimensions {sorted(dims)}')
	return values, ring, dims.pop() if dims else 0


def eval_circuit(c: Circuit, assignment, ring: RingSpec | None = None, dim=None) -> RingValue:
	"""Evaluate gate by gate; constants are lifted to scalar times identity for matrix inputs."""
	values, ring, found_dim = normalize_assignment(assignment, c.nvars, ring)
	if dim is None:
		dim = found_dim
	elif values and found_dim != dim:
		raise DimensionMismatch(f'expected dimension {dim}, got {found_dim}')
	scratch: list[RingValue] = []
	for gate in c.gates:
		if gate.kind is GateKind.INPUT:
			scratch.append(values[gate.args[0] - 1])
		elif gate.kind is GateKind.CONST:
			scratch.append(ring.lift(gate.args[0], dim))
		elif gate.kind is GateKind.ADD:
			scratch.append(scratch[gate.args[0]] + scratch[gate.args[1]])
		else:
			scratch.append(scratch[gate.args[0]] * scratch[gate.args[1]])
	return scratch[c.output]


def homogenize(c: Circuit, k) -> Circuit:
	"""Circuit for the degree-k homogeneous part of c: each gate carries k+1 degree components."""
	if k < 0:
		raise ValueError('degree must be non-negative')
	builder = CircuitBuilder(c.nvars)
	parts: list[list[int | None]] = []
	for gate in c.gates:
		comp: list[int | None] = [None] * (k + 1)
		if gate.kind is GateKind.INPUT:
			if k >= 1:
				comp[1] = builder.input(gate.args[0])
		elif gate.kind is GateKind.CONST:
			if gate.args[0]:
				comp[0] = builder.const(gate.args[0])
		elif gate.kind is GateKind.ADD:
			left, right = parts[gate.args[0]], parts[gate.args[1]]
			for d in range(k + 1):
				if left[d] is None or right[d] is None:
					comp[d] = left[d] if right[d] is None else right[d]
				else:
					comp[d] = builder.add(left[d], right[d])
		else:
			left, right = parts[gate.args[0]], parts[gate.args[1]]
			for d in range(k + 1):
				acc = None
				for i in range(d + 1):
					if left[i] is None or right[d - i] is None:
						continue
					term = builder.mul(left[i], right[d - i])
					acc = term if acc is None else builder.add(acc, term)
				comp[d] = acc
		parts.append(comp)
	out = parts[c.output][k]
	if out is None:
		out = builder.const(0)
	return builder.build(out).pruned()


# Sparse oracle


@dataclass
class SparsePoly:
	"""Explicit monomial -> coefficient map. Coefficients are integers, reduced when a ring is given."""

	terms: dict[MonomialKey, int] = field(default_factory=dict)
	ring: RingSpec | None = None

	def _clean(self, value):
		return int(self.ring.reduce(value)) if self.ring else value

	@classmethod
	def constant(cls, value, ring=None):
		poly = cls({}, ring)
		value = poly._clean(value)
		if value:
			poly.terms[MonomialKey()] = value
		return poly

	@classmethod
	def variable(cls, var, ring=None):
		return cls({MonomialKey(((var, 1),)): 1}, ring)

	def __len__(self):
		return len(self.terms)

	def coefficient(self, monomial: MonomialKey):
		return self.terms.get(monomial, 0)

	def add(self, other, term_cap=None):
		terms = dict(self.terms)
		for mono, coef in other.terms.items():
			value = self._clean(terms.get(mono, 0) + coef)
			if value:
				terms[mono] = value
			else:
				terms.pop(mono, None)
		if term_cap is not None and len(terms) > term_cap:
			raise TermExplosion(term_cap)
		return SparsePoly(terms, self.ring)

	def mul(self, other, degree_cap=None, term_cap=None):
		terms = {}
		for m1, c1 in self.terms.items():
			d1 = m1.total_degree
			for m2, c2 in other.terms.items():
				if degree_cap is not None and d1 + m2.total_degree > degree_cap:
					continue
				mono = m1 * m2
				terms[mono] = terms.get(mono, 0) + c1 * c2
			if term_cap is not None and len(terms) > term_cap:
				raise TermExplosion(term_cap)
		terms = {m: self._clean(c) for m, c in terms.items()}
		return SparsePoly({m: c for m, c in terms.items() if c}, self.ring)

	def homogeneous_part(self, degree):
		return SparsePoly({m: c for m, c in self.terms.items() if m.total_degree == degree}, self.ring)

	def multilinear_sum(self, degree):
		"""Sum of coefficients of the degree-`degree` multilinear monomials."""
		total = sum(c for m, c in self.terms.items() if m.total_degree == degree and m.is_multilinear)
		return self._clean(total)

	def degrees(self):
		return {m.total_degree for m in self.terms}

	def evaluate(self, point, ring: RingSpec):
		total = 0
		for mono, coef in self.terms.items():
			total = ring.reduce(total + coef * mono.evaluate(point, ring))
		return int(total)

	def __eq__(self, other):
		if not isinstance(other, SparsePoly):
			return NotImplemented
		return self.terms == other.terms

	def __str__(self):
		if not self.terms:
			return '0'
		return ' + '.join(f'{c}*{m}' for m, c in sorted(self.terms.items()))


def brute_expand(c: Circuit, degree_cap=None, ring: RingSpec | None = None, term_cap=None) -> SparsePoly:
	"""Expand c into an explicit polynomial; terms above degree_cap are dropped on the fly."""
	if term_cap is None:
		term_cap = get_setting('ORACLE_TERM_CAP')
	polys: list[SparsePoly] = []
	for gate in c.gates:
		if gate.kind is GateKind.INPUT:
			poly = SparsePoly.variable(gate.args[0], ring)
			if degree_cap is not None and degree_cap < 1:
				poly = SparsePoly({}, ring)
		elif gate.kind is GateKind.CONST:
			poly = SparsePoly.constant(gate.args[0], ring)
		elif gate.kind is GateKind.ADD:
			poly = polys[gate.args[0]].add(polys[gate.args[1]], term_cap)
		else:
			poly = polys[gate.args[0]].mul(polys[gate.args[1]], degree_cap, term_cap)
		polys.append(poly)
	return polys[c.output]


def build_elementary_symmetric(n, k) -> Circuit:
	"""S_{n,k} by the prefix recurrence e[i][j] = e[i-1][j] + e[i-1][j-1] * x_i."""
	if k < 0 or k > n:
		raise ValueError(f'need 0 <= k <= n, got n={n}, k={k}')
	builder = CircuitBuilder(n)
	one = builder.const(1)
	row: list[int | None] = [one] + [None] * k
	for i in range(1, n + 1):
		x = builder.input(i)
		nxt = list(row)
		for j in range(1, min(i, k) + 1):
			prev = row[j - 1]
			if prev is None:
				continue
			term = x if prev == one else builder.mul(prev, x)
			nxt[j] = term if row[j] is None else builder.add(row[j], term)
		row = nxt
	return builder.build(row[k]).pruned()


# Linear forms and depth-2/3 circuits


@dataclass(frozen=True)
class LinearForm:
	"""Sum of coef * x_var plus a constant; coeffs sorted by variable, zero coefficients dropped."""

	coeffs: tuple[tuple[int, int], ...] = ()
	constant: int = 0

	@classmethod
	def from_dict(cls, coeffs: Mapping[int, int], constant=0):
		return cls(tuple(sorted((v, int(c)) for v, c in coeffs.items() if c)), int(constant))

	@classmethod
	def variable(cls, var, coef=1):
		return cls.from_dict({var: coef})

	@property
	def as_dict(self):
		return dict(self.coeffs)

	@property
	def homogeneous(self):
		return self.constant == 0

	@property
	def is_zero(self):
		return not self.coeffs and not self.constant

	@property
	def variables(self):
		return tuple(v for v, _ in self.coeffs)

	def __add__(self, other):
		merged = self.as_dict
		for var, coef in other.coeffs:
			merged[var] = merged.get(var, 0) + coef
		return LinearForm.from_dict(merged, self.constant + other.constant)

	def scale(self, c):
		return LinearForm.from_dict({v: c * a for v, a in self.coeffs}, c * self.constant)

	def hadamard(self, other):
		"""Coordinate-wise product of two forms."""
		other_coeffs = other.as_dict
		return LinearForm.from_dict(
			{v: a * other_coeffs[v] for v, a in self.coeffs if v in other_coeffs},
			self.constant * other.constant,
		)

	def coefficient(self, var):
		return self.as_dict.get(var, 0)

	def evaluate(self, point, ring: RingSpec):
		total = self.constant
		for var, coef in self.coeffs:
			total += coef * int(point[var - 1])
		return int(ring.reduce(total))

	def to_poly(self, ring=None):
		poly = SparsePoly.constant(self.constant, ring)
		for var, coef in self.coeffs:
			poly = poly.add(SparsePoly({MonomialKey(((var, 1),)): coef}, ring))
		return poly

	def __str__(self):
		parts = [f'{c}*x{v}' for v, c in self.coeffs]
		if self.constant or not parts:
			parts.append(str(self.constant))
		return ' + '.join(parts)


@dataclass(frozen=True)
class PiSigma:
	"""An ordered product of linear forms; the order fixes the noncommutative reading."""

	nvars: int
	forms: tuple[LinearForm, ...]

	@property
	def degree(self):
		return len(self.forms)

	@property
	def homogeneous(self):
		return all(form.homogeneous for form in self.forms)

	def check_homogeneous(self):
		if not self.homogeneous:
			raise NonHomogeneousError('product-of-sums term has a form with a constant part')
		return self

	def to_circuit(self) -> Circuit:
		builder = CircuitBuilder(self.nvars)
		return builder.build(builder.product([builder.linear_form(f) for f in self.forms]))

	def expand(self, ring=None) -> SparsePoly:
		poly = SparsePoly.constant(1, ring)
		for form in self.forms:
			poly = poly.mul(form.to_poly(ring))
		return poly


@dataclass(frozen=True)
class Depth3:
	"""A sum of scaled PiSigma terms, all of the same degree."""

	nvars: int
	degree: int
	terms: tuple[tuple[int, PiSigma], ...]

	def to_circuit(self) -> Circuit:
		builder = CircuitBuilder(self.nvars)
		outputs = []
		for coef, term in self.terms:
			product = builder.embed(term.to_circuit())
			outputs.append(product if coef == 1 else builder.mul(builder.const(coef), product))
		return builder.build(builder.sum(outputs)).pruned()

	def expand(self, ring=None) -> SparsePoly:
		poly = SparsePoly({}, ring)
		for coef, term in self.terms:
			scaled = term.expand(ring).mul(SparsePoly.constant(coef, ring))
			poly = poly.add(scaled)
		return poly


def _parse_form(tokens, number, nvars):
	coeffs = {}
	for token in tokens:
		var, sep, coef = token.partition(':')
		if not sep:
			raise CircuitParseError(f'expected var:coeff, got {token!r}', number)
		var = _parse_int(var, number, 'variable')
		if not 1 <= var <= nvars:
			raise CircuitParseError(f'variable {var} outside 1..{nvars}', number)
		coeffs[var] = coeffs.get(var, 0) + _parse_int(coef, number, 'coefficient')
	return LinearForm.from_dict(coeffs)


def parse_depth3(text) -> Depth3:
	"""`sps <n> <k>` header, then `term <coef>` lines each followed by k `form var:coeff ...` lines."""
	header = None
	terms = []
	current = None
	for number, tokens in _tokenize(text):
		head = tokens[0]
		if header is None:
			if head != 'sps' or len(tokens) != 3:
				raise CircuitParseError('file must start with sps <n> <k>', number)
			header = (_parse_int(tokens[1], number, 'n'), _parse_int(tokens[2], number, 'k'))
			continue
		nvars, k = header
		if head == 'term':
			if current is not None and len(current[1]) != k:
				raise CircuitParseError(f'term has {len(current[1])} forms, expected {k}', number)
			if len(tokens) != 2:
				raise CircuitParseError('term takes one coefficient', number)
			current = (_parse_int(tokens[1], number, 'coefficient'), [])
			terms.append(current)
		elif head == 'form':
			if current is None:
				raise CircuitParseError('form outside of a term', number)
			if len(current[1]) == k:
				raise CircuitParseError(f'term already has {k} forms', number)
			current[1].append(_parse_form(tokens[1:], number, nvars))
		else:
			raise CircuitParseError(f'unknown directive {head!r}', number)
	if header is None:
		raise CircuitParseError('empty depth-3 file')
	nvars, k = header
	if current is not None and len(current[1]) != k:
		raise CircuitParseError(f'last term has {len(current[1])} forms, expected {k}')
	return Depth3(nvars, k, tuple((coef, PiSigma(nvars, tuple(forms))) for coef, forms in terms))


def format_depth3(f: Depth3) -> str:
	lines = [f'sps {f.nvars} {f.degree}']
	for coef, term in f.terms:
		lines.append(f'term {coef}')
		for form in term.forms:
			lines.append(' '.join(['form'] + [f'{v}:{c}' for v, c in form.coeffs]))
	return '\n'.join(lines) + '\n'


# Random instances for self-tests and benchmarks


def random_circuit(nvars, ngates, rng: random.Random, const_range=3, mul_bias=0.5) -> Circuit:
	builder = CircuitBuilder(nvars)
	pool = [builder.input(v) for v in range(1, nvars + 1)]
	pool.append(builder.const(rng.randint(-const_range, const_range) or 1))
	while len(builder.gates) < ngates:
		left, right = rng.choice(pool), rng.choice(pool)
		gate = builder.mul(left, right) if rng.random() < mul_bias else builder.add(left, right)
		pool.append(gate)
	return builder.build(len(builder.gates) - 1).pruned()


def random_form(nvars, rng: random.Random, coef_range=3, density=0.6) -> LinearForm:
	coeffs = {v: rng.randint(-coef_range, coef_range) for v in range(1, nvars + 1) if rng.random() < density}
	form = LinearForm.from_dict(coeffs)
	if not form.coeffs:
		form = LinearForm.variable(rng.randint(1, nvars), rng.choice([1, 2, -1]))
	return form


def random_pisigma(nvars, k, rng: random.Random, coef_range=3) -> PiSigma:
	return PiSigma(nvars, tuple(random_form(nvars, rng, coef_range) for _ in range(k)))


def random_depth3(nvars, k, terms, rng: random.Random, coef_range=3) -> Depth3:
	return Depth3(nvars, k, tuple(
		(rng.choice([c for c in range(-coef_range, coef_range + 1) if c]), random_pisigma(nvars, k, rng, coef_range))
		for _ in range(terms)
	))


def planted_circuit(nvars, k, rng: random.Random, noise=3, plant=True) -> Circuit:
	"""Noise monomials of degree k that each repeat a variable, plus one multilinear monomial when `plant`."""
	if k < 2:
		raise ValueError('non-multilinear noise needs k >= 2')
	builder = CircuitBuilder(nvars)
	monomials = []
	for _ in range(noise):
		square = rng.randint(1, nvars)
		monomials.append([square, square] + [rng.randint(1, nvars) for _ in range(k - 2)])
	if plant:
		monomials.append(rng.sample(range(1, nvars + 1), k))
	terms = [builder.product([builder.input(v) for v in mono]) for mono in monomials]
	return builder.build(builder.sum(terms)).pruned()
