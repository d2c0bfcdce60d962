import re
from dataclasses import dataclass

import numpy as np

from approx_revsynth.errors import CircuitError, ParseError
from approx_revsynth.gates import (BitState, Gate, GateKind, apply_arrays, apply_masks, compile_arrays,
                                   compile_gate, gate_problem)
from approx_revsynth.log import logger


@dataclass(frozen=True)
class Circuit:
    line_count: int
    gates: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'gates', tuple(self.gates))
        if self.line_count < 1:
            raise CircuitError(f"line count must be positive, got {self.line_count}")
        for position, gate in enumerate(self.gates, start=1):
            if gate.max_line() > self.line_count:
                raise CircuitError(
                    f"gate {position} '{gate}' references a line outside 1..{self.line_count}")

    def __len__(self):
        return len(self.gates)

    def __add__(self, other):
        if self.line_count != other.line_count:
            raise CircuitError(f"cannot concatenate {self.line_count}- and {other.line_count}-line circuits")
        return Circuit(self.line_count, self.gates + other.gates)

    def to_arrays(self):
        kinds = np.array([int(g.kind) for g in self.gates], dtype=np.int64)
        args = np.array([g.args for g in self.gates], dtype=np.int64).reshape(len(self.gates), 3)
        return kinds, args

    @classmethod
    def from_arrays(cls, line_count, kinds, args):
        gates = tuple(Gate(GateKind(int(k)), tuple(int(a) for a in row)) for k, row in zip(kinds, args))
        return cls(line_count, gates)

    def __str__(self):
        return serialize(self)


def _check_width(state, circuit):
    if len(state) != circuit.line_count:
        raise CircuitError(f"state has {len(state)} bits, circuit has {circuit.line_count} lines")


def run(circuit, state):
    _check_width(state, circuit)
    value = state.to_int()
    for gate in circuit.gates:
        value = apply_masks(value, compile_gate(gate, circuit.line_count))
    return BitState.from_int(value, circuit.line_count)


def simulate(kinds, args, states, width):
    """Run a population of equal-depth circuits on packed states.

    kinds: (P, d), args: (P, d, 3), states: (P, B) int64, modified in place.
    Gate position k of every circuit is applied in one vectorised step.
    """
    masks = compile_arrays(kinds, args, width)
    for k in range(kinds.shape[1]):
        apply_arrays(states, tuple(m[:, k, None] for m in masks))
    return states


def simulate_values(circuit, values):
    states = np.array(values, dtype=np.int64).reshape(1, -1)
    if len(circuit):
        kinds, args = circuit.to_arrays()
        simulate(kinds[None, :], args[None, :, :], states, circuit.line_count)
    return states[0]


def embed_input(x, line_count):
    x = x if isinstance(x, BitState) else BitState.from_string(x) if isinstance(x, str) else BitState(x)
    if len(x) > line_count:
        raise CircuitError(f"{len(x)} input bits do not fit {line_count} lines")
    return BitState(x.bits + (0,) * (line_count - len(x)))


def embed_values(values, n, line_count):
    if n > line_count:
        raise CircuitError(f"{n} input bits do not fit {line_count} lines")
    return np.asarray(values, dtype=np.int64) << (line_count - n)


def read_outputs(state, m):
    if m > len(state):
        raise CircuitError(f"cannot read {m} outputs from a {len(state)}-line state")
    return BitState(state.bits[len(state) - m:])


def read_values(states, m):
    return np.asarray(states) & ((1 << m) - 1)


def remove_unused_gates(circuit, m):
    """Drop IDENTITY gates and gates outside the backward cone of the last m lines."""
    if not 1 <= m <= circuit.line_count:
        raise CircuitError(f"output count {m} outside 1..{circuit.line_count}")
    live = set(range(circuit.line_count - m + 1, circuit.line_count + 1))
    kept = []
    for gate in reversed(circuit.gates):
        writes = set(gate.writes)
        if not writes & live:
            continue
        kept.append(gate)
        live = (live - writes) | set(gate.reads)
    pruned = Circuit(circuit.line_count, tuple(reversed(kept)))
    logger.debug(f'Pruned {len(circuit) - len(pruned)} of {len(circuit)} gates')
    return pruned


# Native text format
# =====================================================================

def serialize(circuit):
    rows = [f"lines {circuit.line_count}"]
    rows += [str(gate) for gate in circuit.gates]
    return '\n'.join(rows) + '\n'


def _strip_comment(line):
    return line.split('#', 1)[0].strip()


def parse(text, source=None):
    line_count = None
    gates = []
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        fields = line.split()
        if line_count is None:
            if fields[0] != 'lines' or len(fields) != 2 or not fields[1].isdigit() or int(fields[1]) < 1:
                raise ParseError(f"expected header 'lines <l>', got '{line}'", line_number, source)
            line_count = int(fields[1])
            continue
        if len(fields) != 4:
            raise ParseError(f"expected '<kind> <a> <b> <c>', got '{line}'", line_number, source)
        kind = GateKind.from_token(fields[0], line_number)
        try:
            args = tuple(int(f) for f in fields[1:])
        except ValueError:
            raise ParseError(f"non-integer line index in '{line}'", line_number, source)
        if any(a > line_count for a in args):
            raise ParseError(f"gate references a line outside 1..{line_count}", line_number, source)
        problem = gate_problem(kind, args)
        if problem:
            raise ParseError(problem, line_number, source)
        gates.append(Gate(kind, args))
    if line_count is None:
        raise ParseError("missing 'lines <l>' header", None, source)
    return Circuit(line_count, tuple(gates))


# RevLib .real exchange format
# =====================================================================

REAL_CODES = {
    GateKind.NOT: 't1',
    GateKind.CNOT: 't2',
    GateKind.TOFFOLI: 't3',
    GateKind.SWAP: 'f2',
    GateKind.FREDKIN: 'f3',
}
REAL_KINDS = {code: kind for kind, code in REAL_CODES.items()}


def to_real(circuit, n=None, m=None):
    """RevLib document; IDENTITY gates have no code and are left out."""
    l = circuit.line_count
    names = [f"x{i}" for i in range(1, l + 1)]
    n = l if n is None else n
    m = l if m is None else m
    rows = [
        '.version 1.0',
        f'.numvars {l}',
        f".variables {' '.join(names)}",
        f".inputs {' '.join(names)}",
        f".outputs {' '.join(names)}",
        f".constants {'-' * n}{'0' * (l - n)}",
        f".garbage {'1' * (l - m)}{'-' * m}",
        '.begin',
    ]
    for gate in circuit.gates:
        if gate.kind == GateKind.IDENTITY:
            continue
        rows.append(f"{REAL_CODES[gate.kind]} {' '.join(names[a - 1] for a in gate.lines)}")
    rows.append('.end')
    return '\n'.join(rows) + '\n'


def _pad_args(lines, line_count):
    # Fill the unused stored slots with the lowest free lines (0 when none are left)
    free = [i for i in range(1, line_count + 1) if i not in lines]
    padded = list(lines) + free[:3 - len(lines)]
    return tuple(padded + [0] * (3 - len(padded)))


def from_real(text, source=None):
    numvars = None
    names = None
    variables_line = None
    gates = []
    in_body = False
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue
        fields = line.split()
        head = fields[0].lower()
        if head == '.numvars':
            if len(fields) != 2 or not fields[1].isdigit() or int(fields[1]) < 1:
                raise ParseError(f"expected '.numvars <l>', got '{line}'", line_number, source)
            numvars = int(fields[1])
        elif head == '.variables':
            if len(set(fields[1:])) != len(fields) - 1:
                raise ParseError("duplicate variable name", line_number, source)
            names = {name: i for i, name in enumerate(fields[1:], start=1)}
            variables_line = line_number
        elif head == '.begin':
            in_body = True
        elif head == '.end':
            in_body = False
        elif head.startswith('.'):
            continue
        elif in_body:
            if head not in REAL_KINDS:
                raise ParseError(f"unsupported gate code '{fields[0]}'", line_number, source)
            kind = REAL_KINDS[head]
            if names is None:
                raise ParseError("gate before '.variables'", line_number, source)
            try:
                lines = tuple(names[name] for name in fields[1:])
            except KeyError as e:
                raise ParseError(f"unknown variable {e}", line_number, source)
            if len(lines) != kind.arity:
                raise ParseError(f"'{head}' expects {kind.arity} lines", line_number, source)
            gates.append((kind, lines, line_number))
        else:
            raise ParseError(f"unexpected line '{line}'", line_number, source)
    if numvars is None or names is None:
        raise ParseError("missing '.numvars' or '.variables'", None, source)
    if len(names) != numvars:
        raise ParseError(f"{len(names)} variables declared, '.numvars' says {numvars}", variables_line, source)
    result = []
    for kind, lines, line_number in gates:
        args = _pad_args(lines, numvars)
        problem = gate_problem(kind, args)
        if problem:
            raise ParseError(problem, line_number, source)
        result.append(Gate(kind, args))
    return Circuit(numvars, tuple(result))


def is_real_document(text):
    return re.search(r'^\s*\.numvars\b', text, re.MULTILINE) is not None
