import os
from collections import deque
from dataclasses import dataclass

import numpy as np

from approx_revsynth import defaults
from approx_revsynth.errors import ConfigError, ParseError, ResourceError
from approx_revsynth.gates import GateKind, apply_arrays
from approx_revsynth.log import logger

DATA_DIR = os.path.join(os.path.dirname(__file__), 'data')


# Quantum cost
# =====================================================================

class CostTable:
    def __init__(self, values=None, name='default'):
        # Kinds missing from `values` keep their default cost
        self.name = name
        self.values = {GateKind.from_token(token): cost for token, cost in defaults.qc_table.items()}
        for key, value in (values or {}).items():
            kind = key if isinstance(key, GateKind) else GateKind.from_token(str(key))
            if value < 0:
                raise ConfigError(f"cost of '{kind.token}' must be non-negative, got {value}")
            self.values[kind] = int(value)
        if self.values[GateKind.IDENTITY] != 0:
            raise ConfigError("identity gates must cost 0")
        self.array = np.array([self.values[k] for k in GateKind], dtype=np.int64)

    def __getitem__(self, kind):
        return self.values[GateKind(kind)]

    def to_dict(self):
        return {k.token: v for k, v in self.values.items()}


def quantum_cost(circuit, table=None):
    table = table or CostTable()
    return sum(table[g.kind] for g in circuit.gates)


def quantum_cost_arrays(kinds, table):
    return table.array[kinds].sum(axis=-1)


# Coupling map
# =====================================================================

class CouplingMap:
    def __init__(self, qubits, edges, name='custom'):
        self.qubits = int(qubits)
        self.name = name
        self.edges = frozenset(tuple(sorted((int(a), int(b)))) for a, b in edges)
        for a, b in self.edges:
            if a == b or not (1 <= a <= self.qubits and 1 <= b <= self.qubits):
                raise ConfigError(f"coupling map '{name}': invalid edge ({a}, {b}) for {self.qubits} qubits")
        self.adjacency = {q: [] for q in range(1, self.qubits + 1)}
        for a, b in sorted(self.edges):
            self.adjacency[a].append(b)
            self.adjacency[b].append(a)
        for q in self.adjacency:
            self.adjacency[q].sort()
        self._parents = {}
        if len(self._bfs(1)) != self.qubits:
            raise ConfigError(f"coupling map '{name}' is not connected")

    @classmethod
    def path(cls, qubits):
        return cls(qubits, [(q, q + 1) for q in range(1, qubits)], name=f'path{qubits}')

    @classmethod
    def complete(cls, qubits):
        return cls(qubits, [(a, b) for a in range(1, qubits + 1) for b in range(a + 1, qubits + 1)],
                   name=f'complete{qubits}')

    @classmethod
    def parse(cls, text, name='custom', source=None):
        qubits = None
        edges = []
        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split('#', 1)[0].strip()
            if not line:
                continue
            fields = line.split()
            try:
                if fields[0] == 'qubits' and len(fields) == 2 and qubits is None:
                    qubits = int(fields[1])
                elif fields[0] == 'edge' and len(fields) == 3 and qubits is not None:
                    edges.append((int(fields[1]), int(fields[2])))
                else:
                    raise ValueError
            except ValueError:
                raise ParseError(f"expected 'qubits <k>' then 'edge <a> <b>', got '{line}'", line_number, source)
        if qubits is None:
            raise ParseError("missing 'qubits <k>' header", None, source)
        return cls(qubits, edges, name)

    @classmethod
    def load(cls, path):
        with open(path, 'r', encoding='utf-8') as f:
            return cls.parse(f.read(), name=os.path.splitext(os.path.basename(path))[0], source=path)

    @classmethod
    def bundled(cls):
        return cls.load(os.path.join(DATA_DIR, defaults.coupling_map_file))

    def to_text(self):
        rows = [f"qubits {self.qubits}"] + [f"edge {a} {b}" for a, b in sorted(self.edges)]
        return '\n'.join(rows) + '\n'

    def adjacent(self, a, b):
        return tuple(sorted((a, b))) in self.edges

    def _bfs(self, source):
        # Neighbours are visited in ascending order, so ties go to the lowest index
        if source not in self._parents:
            parents = {source: None}
            queue = deque([source])
            while queue:
                q = queue.popleft()
                for r in self.adjacency[q]:
                    if r not in parents:
                        parents[r] = q
                        queue.append(r)
            self._parents[source] = parents
        return self._parents[source]

    def shortest_path(self, a, b):
        parents = self._bfs(b)
        path = [a]
        while path[-1] != b:
            path.append(parents[path[-1]])
        return path

    def distance(self, a, b):
        return len(self.shortest_path(a, b)) - 1


# Primitive decomposition
# =====================================================================

@dataclass(frozen=True)
class PrimitiveGate:
    name: str
    qubits: tuple
    # Classical action as (cmask_qubits, flip_qubit); None for phase/basis gates
    controls: tuple = ()
    target: int = None

    @property
    def arity(self):
        return len(self.qubits)


@dataclass(frozen=True)
class PrimitiveCircuit:
    qubit_count: int
    gates: tuple
    placement: tuple

    @property
    def one_qubit_count(self):
        return sum(1 for g in self.gates if g.arity == 1)

    @property
    def two_qubit_count(self):
        return sum(1 for g in self.gates if g.arity == 2)

    def _bit(self, qubit):
        return 1 << (self.qubit_count - qubit)

    def classical_masks(self):
        """(cmask, fmask, 0, 0, 0) per primitive, for gates.apply_arrays."""
        masks = []
        for g in self.gates:
            cmask = 0
            for q in g.controls:
                cmask |= self._bit(q)
            fmask = 0 if g.target is None else self._bit(g.target)
            masks.append((cmask, fmask, 0, 0, 0))
        return masks

    def qubit_masks(self):
        masks = []
        for g in self.gates:
            mask = 0
            for q in g.qubits:
                mask |= self._bit(q)
            masks.append(mask)
        return masks

    def lines_to_states(self, values, line_count):
        """Packed line states (line 1 most significant) to packed qubit states."""
        values = np.asarray(values, dtype=np.int64)
        states = np.zeros_like(values)
        for line in range(1, line_count + 1):
            bit = (values >> (line_count - line)) & 1
            states |= bit << (self.qubit_count - self.placement[line - 1])
        return states

    def states_to_lines(self, states, line_count):
        states = np.asarray(states, dtype=np.int64)
        values = np.zeros_like(states)
        for line in range(1, line_count + 1):
            bit = (states >> (self.qubit_count - self.placement[line - 1])) & 1
            values |= bit << (line_count - line)
        return values

    def run_values(self, states):
        """Noise-free classical run on packed qubit states."""
        states = np.array(states, dtype=np.int64)
        for masks in self.classical_masks():
            apply_arrays(states, masks)
        return states


def _cx(c, t):
    return PrimitiveGate('cx', (c, t), (c,), t)


def _toffoli_network(c1, c2, t):
    # Standard 6-CNOT / 9 single-qubit network; the closing H carries the classical action
    return [
        PrimitiveGate('h', (t,)),
        _cx(c2, t),
        PrimitiveGate('tdg', (t,)),
        _cx(c1, t),
        PrimitiveGate('t', (t,)),
        _cx(c2, t),
        PrimitiveGate('tdg', (t,)),
        _cx(c1, t),
        PrimitiveGate('t', (c2,)),
        PrimitiveGate('t', (t,)),
        PrimitiveGate('h', (t,), (c1, c2), t),
        _cx(c1, c2),
        PrimitiveGate('t', (c1,)),
        PrimitiveGate('tdg', (c2,)),
        _cx(c1, c2),
    ]


def _logical_primitives(gate, q):
    a = [q[i - 1] if i else 0 for i in gate.args]
    kind = gate.kind
    if kind == GateKind.NOT:
        return [PrimitiveGate('x', (a[0],), (), a[0])]
    if kind == GateKind.CNOT:
        return [_cx(a[0], a[1])]
    if kind == GateKind.SWAP:
        return [_cx(a[0], a[1]), _cx(a[1], a[0]), _cx(a[0], a[1])]
    if kind == GateKind.TOFFOLI:
        return _toffoli_network(a[0], a[1], a[2])
    if kind == GateKind.FREDKIN:
        return [_cx(a[2], a[1])] + _toffoli_network(a[0], a[1], a[2]) + [_cx(a[2], a[1])]
    return []


def _route(primitive, coupling):
    if primitive.arity == 1 or coupling.adjacent(*primitive.qubits):
        return [primitive]
    control, target = primitive.qubits
    path = coupling.shortest_path(control, target)
    swaps = []
    for a, b in zip(path[:-2], path[1:-1]):
        swaps += [_cx(a, b), _cx(b, a), _cx(a, b)]
    return swaps + [_cx(path[-2], target)] + swaps[::-1]


def resolve_placement(line_count, coupling, placement=None):
    if line_count > coupling.qubits:
        raise ResourceError(f"circuit with {line_count} lines is wider than coupling map "
                            f"'{coupling.name}' ({coupling.qubits} qubits)")
    if placement is None:
        return tuple(range(1, line_count + 1))
    if isinstance(placement, dict):
        placement = [placement[i] for i in range(1, line_count + 1)]
    placement = tuple(int(q) for q in placement)
    if len(placement) != line_count or len(set(placement)) != line_count or \
            not all(1 <= q <= coupling.qubits for q in placement):
        raise ConfigError(f"placement {placement} is not an injective line->qubit map")
    return placement


def decompose(circuit, coupling=None, placement=None):
    coupling = coupling or CouplingMap.bundled()
    placement = resolve_placement(circuit.line_count, coupling, placement)
    gates = []
    for gate in circuit.gates:
        for primitive in _logical_primitives(gate, placement):
            gates += _route(primitive, coupling)
    logger.debug(f'Decomposed {len(circuit)} gates into {len(gates)} primitives on {coupling.name}')
    return PrimitiveCircuit(coupling.qubits, tuple(gates), placement)


def primitive_cost(primitive):
    return primitive.one_qubit_count + defaults.two_qubit_weight * primitive.two_qubit_count


def circuit_cost(circuit, coupling=None, placement=None):
    return primitive_cost(decompose(circuit, coupling, placement))


def cost_report(circuit, table=None, coupling=None, placement=None):
    table = table or CostTable()
    coupling = coupling or CouplingMap.bundled()
    primitive = decompose(circuit, coupling, placement)
    return {
        'qc': quantum_cost(circuit, table),
        'cc': primitive_cost(primitive),
        'one_qubit_primitives': primitive.one_qubit_count,
        'two_qubit_primitives': primitive.two_qubit_count,
        'cost_table': table.name,
        'coupling_map': coupling.name,
    }
