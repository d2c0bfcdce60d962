"""Truth-table oracles: the benchmark functions and user table files.

Inputs and outputs are packed big-endian: the first input bit is the most
significant bit of the row index and the first output line carries the
most significant output bit.
"""
from dataclasses import dataclass, field

import numpy as np

from approx_revsynth import defaults
from approx_revsynth.circuit import embed_values, read_values, simulate_values
from approx_revsynth.errors import CircuitError, ConfigError, ParseError, ResourceError
from approx_revsynth.gates import BitState
from approx_revsynth.log import logger


@dataclass(frozen=True, eq=False)
class BooleanFunction:
    name: str
    n: int
    m: int
    table: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise CircuitError(f"function '{self.name}' needs n >= 1 and m >= 1")
        if self.n > defaults.max_inputs:
            raise ResourceError(f"function '{self.name}' has {self.n} inputs, limit is {defaults.max_inputs}")
        table = np.asarray(self.table, dtype=np.int64)
        if table.shape != (2 ** self.n,):
            raise CircuitError(f"table of '{self.name}' must have {2 ** self.n} rows")
        if table.min() < 0 or table.max() >= 2 ** self.m:
            raise CircuitError(f"table of '{self.name}' has values wider than {self.m} bits")
        table.setflags(write=False)
        object.__setattr__(self, 'table', table)

    def __eq__(self, other):
        return (isinstance(other, BooleanFunction) and (self.n, self.m) == (other.n, other.m)
                and np.array_equal(self.table, other.table))

    def __hash__(self):
        return hash((self.n, self.m, self.table.tobytes()))

    @property
    def size(self):
        return 2 ** self.n

    def inputs(self):
        return np.arange(self.size, dtype=np.int64)

    def output_bit(self, i):
        """Column of output line i (0 is the first, most significant, output)."""
        return (self.table >> (self.m - 1 - i)) & 1


def eval(f, x):
    x = x if isinstance(x, BitState) else BitState.from_string(x) if isinstance(x, str) else BitState(x)
    if len(x) != f.n:
        raise CircuitError(f"'{f.name}' takes {f.n} input bits, got {len(x)}")
    return BitState.from_int(int(f.table[x.to_int()]), f.m)


def class_sizes(f):
    if f.m != 1:
        raise CircuitError(f"class sizes are defined for single-output functions, '{f.name}' has {f.m}")
    positives = int(f.table.sum())
    return positives, f.size - positives


# Benchmarks
# =====================================================================

def _popcount(values):
    counts = np.zeros_like(values)
    v = values.copy()
    while v.any():
        counts += v & 1
        v >>= 1
    return counts


def _primes(count):
    primes = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def _symmetric(name, n, ones):
    x = np.arange(2 ** n, dtype=np.int64)
    return BooleanFunction(name, n, 1, np.isin(_popcount(x), list(ones)).astype(np.int64))


def _mod5(name, n):
    x = np.arange(2 ** n, dtype=np.int64)
    return BooleanFunction(name, n, 1, (x % 5 == 0).astype(np.int64))


def _nth_prime(name, n, m):
    return BooleanFunction(name, n, m, np.array(_primes(2 ** n), dtype=np.int64))


BUILTINS = {
    'xor5': lambda: BooleanFunction('xor5', 5, 1, _popcount(np.arange(32, dtype=np.int64)) & 1),
    '2of5': lambda: _symmetric('2of5', 5, {2}),
    '6sym': lambda: _symmetric('6sym', 6, {2, 3, 4}),
    '9sym': lambda: _symmetric('9sym', 9, {3, 4, 5, 6}),
    '4mod5': lambda: _mod5('4mod5', 4),
    '5mod5': lambda: _mod5('5mod5', 5),
    'NthPrime3': lambda: _nth_prime('NthPrime3', 3, 5),
    'NthPrime4': lambda: _nth_prime('NthPrime4', 4, 6),
}
_BUILTIN_KEYS = {name.lower(): name for name in BUILTINS}


def builtin(name):
    key = _BUILTIN_KEYS.get(str(name).lower())
    if key is None:
        raise ConfigError(f"unknown function '{name}', built-ins are: {', '.join(BUILTINS)}")
    return BUILTINS[key]()


# Truth-table files
# =====================================================================

def load_truth_table(text, name='table', source=None):
    n = m = None
    rows = {}
    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if n is None or m is None:
            if len(fields) != 2 or fields[0] not in ('inputs', 'outputs') or not fields[1].isdigit():
                raise ParseError(f"expected 'inputs <n>' / 'outputs <m>' header, got '{line}'",
                                 line_number, source)
            if fields[0] == 'inputs':
                n = int(fields[1])
            else:
                m = int(fields[1])
            continue
        if len(fields) != 2 or any(ch not in '01' for ch in fields[0] + fields[1]):
            raise ParseError(f"expected '<x-bits> <y-bits>', got '{line}'", line_number, source)
        x_bits, y_bits = fields
        if len(x_bits) != n or len(y_bits) != m:
            raise ParseError(f"row widths must be {n} and {m}", line_number, source)
        x = int(x_bits, 2)
        if x in rows:
            raise ParseError(f"duplicate row for input {x_bits}", line_number, source)
        rows[x] = int(y_bits, 2)
    if n is None or m is None:
        raise ParseError("missing 'inputs' or 'outputs' header", None, source)
    if n > defaults.max_inputs:
        raise ResourceError(f"{n} inputs exceed the materialized-table limit {defaults.max_inputs}")
    if len(rows) != 2 ** n:
        raise ParseError(f"incomplete table: {len(rows)} of {2 ** n} rows", None, source)
    logger.debug(f'Loaded truth table {name} with {n} inputs and {m} outputs')
    return BooleanFunction(name, n, m, np.array([rows[x] for x in range(2 ** n)], dtype=np.int64))


def dump_truth_table(f):
    rows = [f"inputs {f.n}", f"outputs {f.m}"]
    for x, y in enumerate(f.table):
        rows.append(f"{x:0{f.n}b} {int(y):0{f.m}b}")
    return '\n'.join(rows) + '\n'


def function_of_circuit(circuit, n, m, name=None):
    """The function a circuit computes on (x, 0) inputs, read from its last m lines."""
    if max(n, m) > circuit.line_count:
        raise CircuitError(f"circuit with {circuit.line_count} lines cannot embed {n} inputs / {m} outputs")
    x = np.arange(2 ** n, dtype=np.int64)
    outputs = read_values(simulate_values(circuit, embed_values(x, n, circuit.line_count)), m)
    return BooleanFunction(name or 'circuit', n, m, outputs)
