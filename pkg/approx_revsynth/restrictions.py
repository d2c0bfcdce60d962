"""Architecture restrictions on gates and the sampler that honours them.

A restriction is a predicate over (gate, line count). Every restriction is
evaluated vectorised over all stored-index combinations of a width, so the
sampler can draw uniformly from the admissible combinations directly.
"""
import itertools
import os

import numpy as np

from approx_revsynth import defaults
from approx_revsynth.cost import CouplingMap
from approx_revsynth.errors import ConfigError, RestrictionError
from approx_revsynth.gates import ARITY_ARRAY, Gate, GateKind
from approx_revsynth.log import logger

# Stored slots written by each kind
WRITTEN_SLOTS = {
    GateKind.IDENTITY: (),
    GateKind.NOT: (0,),
    GateKind.CNOT: (1,),
    GateKind.SWAP: (0, 1),
    GateKind.TOFFOLI: (2,),
    GateKind.FREDKIN: (1, 2),
}


class Restriction:
    name = 'restriction'

    def allows(self, kinds, args, line_count):
        raise NotImplementedError

    def required_kinds(self):
        """Kinds the restriction names explicitly (None: no kind filter)."""
        return None

    def admits(self, gate, line_count):
        kinds = np.array([int(gate.kind)])
        args = np.array([gate.args])
        return bool(self.allows(kinds, args, line_count)[0])

    def admits_circuit(self, circuit):
        if not len(circuit):
            return True
        kinds, args = circuit.to_arrays()
        return bool(np.all(self.allows(kinds, args, circuit.line_count)))

    def to_dict(self):
        return self.name

    def __repr__(self):
        return f'{type(self).__name__}({self.to_dict()})'


class Unrestricted(Restriction):
    name = 'unrestricted'

    def allows(self, kinds, args, line_count):
        return np.ones(np.shape(kinds), dtype=bool)


UNRESTRICTED = Unrestricted()


class AllowedKinds(Restriction):
    name = 'allowed_kinds'

    def __init__(self, kinds):
        self.kinds = frozenset(k if isinstance(k, GateKind) else GateKind.from_token(str(k)) for k in kinds)
        if not self.kinds:
            raise RestrictionError("allowed kind set is empty")

    def allows(self, kinds, args, line_count):
        return np.isin(kinds, [int(k) for k in self.kinds])

    def required_kinds(self):
        return self.kinds

    def to_dict(self):
        return {self.name: sorted(k.token for k in self.kinds)}


class AdjacentLinesOnly(Restriction):
    """Lines a gate acts on must induce a connected subgraph of the coupling graph."""
    name = 'adjacent'

    def __init__(self, coupling=None):
        self.coupling = coupling

    def _adjacency(self, line_count):
        graph = self.coupling or CouplingMap.path(line_count)
        if graph.qubits < line_count:
            raise RestrictionError(f"coupling graph '{graph.name}' has {graph.qubits} nodes, "
                                   f"circuit needs {line_count}")
        adjacency = np.zeros((graph.qubits + 1, graph.qubits + 1), dtype=bool)
        for a, b in graph.edges:
            adjacency[a, b] = adjacency[b, a] = True
        return adjacency

    def allows(self, kinds, args, line_count):
        adjacency = self._adjacency(line_count)
        kinds = np.asarray(kinds)
        args = np.asarray(args)
        arity = ARITY_ARRAY[kinds]
        a0, a1, a2 = args[..., 0], args[..., 1], args[..., 2]
        pairs = adjacency[a0, a1].astype(int) + adjacency[a0, a2] + adjacency[a1, a2]
        return np.select([arity <= 1, arity == 2], [np.ones(arity.shape, dtype=bool), adjacency[a0, a1]], pairs >= 2)

    def to_dict(self):
        return {self.name: self.coupling.name if self.coupling else 'path'}


class TargetLines(Restriction):
    """Lines written by the listed kinds must lie in the given sets."""
    name = 'targets'

    def __init__(self, targets):
        self.targets = {}
        for key, lines in targets.items():
            kind = key if isinstance(key, GateKind) else GateKind.from_token(str(key))
            self.targets[kind] = frozenset(int(line) for line in lines)

    def allows(self, kinds, args, line_count):
        kinds = np.asarray(kinds)
        args = np.asarray(args)
        result = np.ones(kinds.shape, dtype=bool)
        for kind, lines in self.targets.items():
            permitted = np.zeros(line_count + 1, dtype=bool)
            permitted[[line for line in lines if line <= line_count]] = True
            ok = np.ones(kinds.shape, dtype=bool)
            for slot in WRITTEN_SLOTS[kind]:
                ok &= permitted[args[..., slot]]
            result &= np.where(kinds == kind, ok, True)
        return result

    def to_dict(self):
        return {self.name: {k.token: sorted(v) for k, v in self.targets.items()}}


class Conjunction(Restriction):
    name = 'all'

    def __init__(self, restrictions):
        self.restrictions = list(restrictions)

    def allows(self, kinds, args, line_count):
        result = np.ones(np.shape(kinds), dtype=bool)
        for restriction in self.restrictions:
            result &= restriction.allows(kinds, args, line_count)
        return result

    def required_kinds(self):
        required = [r.required_kinds() for r in self.restrictions if r.required_kinds() is not None]
        if not required:
            return None
        return frozenset.intersection(*required)

    def to_dict(self):
        return {self.name: [r.to_dict() for r in self.restrictions]}


def from_spec(spec, base_dir='.'):
    """Restriction from a config value.

    'unrestricted', or a mapping with any of the keys ``allowed_kinds``
    (list of kind tokens), ``adjacent`` ('path' or a coupling-map path),
    ``targets`` (kind token -> list of lines), ``all`` (list of specs).
    """
    if spec is None or spec == 'unrestricted':
        return UNRESTRICTED
    if not isinstance(spec, dict):
        raise ConfigError(f"restriction must be 'unrestricted' or a mapping, got {spec!r}")
    parts = []
    for key, value in spec.items():
        if key == 'allowed_kinds':
            parts.append(AllowedKinds(value))
        elif key == 'adjacent':
            if value in (None, True, 'path'):
                parts.append(AdjacentLinesOnly())
            elif value == 'melbourne':
                parts.append(AdjacentLinesOnly(CouplingMap.bundled()))
            else:
                parts.append(AdjacentLinesOnly(CouplingMap.load(os.path.join(base_dir, value))))
        elif key == 'targets':
            parts.append(TargetLines(value))
        elif key == 'all':
            parts.append(Conjunction(from_spec(s, base_dir) for s in value))
        else:
            raise ConfigError(f"unknown restriction key '{key}'")
    if not parts:
        return UNRESTRICTED
    return parts[0] if len(parts) == 1 else Conjunction(parts)


def enumerate_args(line_count):
    width = min(line_count, 3)
    combos = [p + (0,) * (3 - width) for p in itertools.permutations(range(1, line_count + 1), width)]
    return np.array(combos, dtype=np.int64).reshape(-1, 3)


class GateSampler:
    def __init__(self, line_count, restriction=None):
        self.line_count = line_count
        self.restriction = restriction or UNRESTRICTED
        combos = enumerate_args(line_count)
        self.tables = {}
        for kind in GateKind:
            filled = np.all(combos[:, :kind.arity] > 0, axis=1)
            kinds = np.full(len(combos), int(kind))
            admissible = filled & self.restriction.allows(kinds, combos, line_count)
            self.tables[kind] = combos[admissible]

        self.kinds = [k for k in GateKind if len(self.tables[k])]
        required = self.restriction.required_kinds()
        if required is not None:
            empty = [k.token for k in required if not len(self.tables[k])]
            if empty:
                raise RestrictionError(f"restriction {self.restriction!r} admits no arguments for "
                                       f"{', '.join(sorted(empty))} on {line_count} lines")
        if not self.kinds:
            raise RestrictionError(f"restriction {self.restriction!r} admits no gate on {line_count} lines")

        self.kind_array = np.array([int(k) for k in self.kinds], dtype=np.int64)
        self.counts = np.array([len(self.tables[k]) for k in GateKind], dtype=np.int64)
        padded = np.zeros((len(GateKind), max(self.counts), 3), dtype=np.int64)
        for k in GateKind:
            padded[int(k), :len(self.tables[k])] = self.tables[k]
        self.padded = padded
        logger.debug(f'Gate sampler on {line_count} lines: '
                     + ', '.join(f'{k.token}={len(self.tables[k])}' for k in GateKind))

    def sample_arrays(self, rng, shape):
        """Kinds ``shape`` and args ``shape + (3,)``, uniform over admissible gates per kind."""
        kinds = self.kind_array[rng.integers(len(self.kind_array), size=shape)]
        index = (rng.random(shape) * self.counts[kinds]).astype(np.int64)
        return kinds, self.padded[kinds, index]

    def draw_kind(self, rng):
        return GateKind(int(self.kind_array[rng.integers(len(self.kind_array))]))

    def draw_args(self, kind, rng):
        """Rejection sampling of stored indices for ``kind``; None when the cap is hit."""
        width = min(self.line_count, 3)
        for _ in range(defaults.argument_retry_cap):
            lines = tuple(int(a) for a in rng.permutation(self.line_count)[:width] + 1)
            gate = Gate(kind, lines + (0,) * (3 - width))
            if self.restriction.admits(gate, self.line_count):
                return gate
        return None

    def random_gate(self, rng):
        tries = 0
        while tries < defaults.total_retry_cap:
            gate = self.draw_args(self.draw_kind(rng), rng)
            if gate is not None:
                return gate
            tries += defaults.argument_retry_cap
        raise RestrictionError(f"no admissible gate found under {self.restriction!r} "
                               f"after {defaults.total_retry_cap} tries")
