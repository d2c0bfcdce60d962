"""Gate library and bit-level gate semantics.

Every gate is compiled into five integers over a state packed into one
integer per input (line 1 is the most significant bit, line l the least):

    cmask  bits that must all be 1 for the gate to act (controls)
    fmask  bits flipped when the controls hold
    sp, sq bit positions exchanged when the controls hold (swap gates)
    swap   1 for SWAP/FREDKIN, 0 otherwise

The same encoding drives the scalar ``apply_gate`` and the numpy
population simulator in ``circuit.simulate``.
"""
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

from approx_revsynth.errors import CircuitError, ParseError


class GateKind(IntEnum):
    IDENTITY = 0
    NOT = 1
    CNOT = 2
    SWAP = 3
    TOFFOLI = 4
    FREDKIN = 5

    @property
    def arity(self):
        return ARITY[self]

    @property
    def token(self):
        return TOKENS[self]

    @classmethod
    def from_token(cls, token, line_number=None):
        try:
            return TOKEN_KINDS[token.lower()]
        except KeyError:
            raise ParseError(f"unknown gate kind '{token}'", line_number)


ARITY = {
    GateKind.IDENTITY: 0,
    GateKind.NOT: 1,
    GateKind.CNOT: 2,
    GateKind.SWAP: 2,
    GateKind.TOFFOLI: 3,
    GateKind.FREDKIN: 3,
}

TOKENS = {
    GateKind.IDENTITY: 'id',
    GateKind.NOT: 'not',
    GateKind.CNOT: 'cnot',
    GateKind.SWAP: 'swap',
    GateKind.TOFFOLI: 'toffoli',
    GateKind.FREDKIN: 'fredkin',
}
TOKEN_KINDS = {token: kind for kind, token in TOKENS.items()}

# Indexed by GateKind value, used by the vectorised paths
ARITY_ARRAY = np.array([ARITY[k] for k in GateKind], dtype=np.int64)


def gate_problem(kind, args):
    """Why ``Gate(kind, args)`` would be rejected, or None."""
    if len(args) != 3:
        return f"gate needs 3 stored indices, got {len(args)}"
    if any(a < 0 for a in args):
        return f"negative line index in {args}"
    used = [a for a in args if a != 0]
    if len(set(used)) != len(used):
        return f"stored indices must be pairwise distinct: {args}"
    if any(a == 0 for a in args[:kind.arity]):
        return f"{kind.token} needs {kind.arity} line(s), got {args}"
    return None


@dataclass(frozen=True)
class Gate:
    kind: GateKind
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, 'kind', GateKind(self.kind))
        args = tuple(int(a) for a in self.args)
        object.__setattr__(self, 'args', args)
        problem = gate_problem(self.kind, args)
        if problem:
            raise CircuitError(problem)

    @property
    def lines(self):
        """Lines the gate acts on (the first ``arity`` stored indices)."""
        return self.args[:self.kind.arity]

    @property
    def writes(self):
        a = self.args
        return {
            GateKind.IDENTITY: (),
            GateKind.NOT: (a[0],),
            GateKind.CNOT: (a[1],),
            GateKind.SWAP: (a[0], a[1]),
            GateKind.TOFFOLI: (a[2],),
            GateKind.FREDKIN: (a[1], a[2]),
        }[self.kind]

    @property
    def reads(self):
        return self.lines

    def max_line(self):
        return max(self.args)

    def __str__(self):
        return f"{self.kind.token} {' '.join(str(a) for a in self.args)}"


@dataclass(frozen=True)
class BitState:
    bits: tuple

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if any(b not in (0, 1) for b in bits):
            raise CircuitError(f"bit state holds non-binary values: {bits}")
        object.__setattr__(self, 'bits', bits)

    @classmethod
    def from_string(cls, text):
        text = text.strip()
        if any(ch not in '01' for ch in text):
            raise CircuitError(f"bit string expected, got '{text}'")
        return cls(tuple(int(ch) for ch in text))

    @classmethod
    def from_int(cls, value, width):
        return cls(tuple((value >> (width - 1 - i)) & 1 for i in range(width)))

    def to_int(self):
        value = 0
        for bit in self.bits:
            value = (value << 1) | bit
        return value

    def __len__(self):
        return len(self.bits)

    def __getitem__(self, line):
        # 1-based line access
        return self.bits[line - 1]

    def __str__(self):
        return ''.join(str(b) for b in self.bits)


def _position(line, width):
    return width - line


def compile_gate(gate, width):
    if gate.max_line() > width:
        raise CircuitError(f"gate '{gate}' references a line outside 1..{width}")
    a = gate.args
    bit = lambda line: 1 << _position(line, width)
    kind = gate.kind
    if kind == GateKind.NOT:
        return 0, bit(a[0]), 0, 0, 0
    if kind == GateKind.CNOT:
        return bit(a[0]), bit(a[1]), 0, 0, 0
    if kind == GateKind.TOFFOLI:
        return bit(a[0]) | bit(a[1]), bit(a[2]), 0, 0, 0
    if kind == GateKind.SWAP:
        return 0, 0, _position(a[0], width), _position(a[1], width), 1
    if kind == GateKind.FREDKIN:
        return bit(a[0]), 0, _position(a[1], width), _position(a[2], width), 1
    return 0, 0, 0, 0, 0


def apply_masks(value, masks):
    cmask, fmask, sp, sq, swap = masks
    if value & cmask != cmask:
        return value
    value ^= fmask
    if swap:
        diff = ((value >> sp) ^ (value >> sq)) & 1
        value ^= (diff << sp) | (diff << sq)
    return value


def apply_gate(gate, state):
    width = len(state)
    if gate.max_line() > width:
        raise CircuitError(f"gate '{gate}' does not fit a {width}-line state")
    return BitState.from_int(apply_masks(state.to_int(), compile_gate(gate, width)), width)


def compile_arrays(kinds, args, width):
    kinds = np.asarray(kinds, dtype=np.int64)
    args = np.asarray(args, dtype=np.int64)
    pos = np.where(args > 0, width - args, 0)
    bit = np.where(args > 0, np.left_shift(1, pos), 0)
    zero = np.zeros_like(kinds)

    is_not = kinds == GateKind.NOT
    is_cnot = kinds == GateKind.CNOT
    is_swap = kinds == GateKind.SWAP
    is_toffoli = kinds == GateKind.TOFFOLI
    is_fredkin = kinds == GateKind.FREDKIN

    cmask = np.select([is_cnot | is_fredkin, is_toffoli],
                      [bit[..., 0], bit[..., 0] | bit[..., 1]], zero)
    fmask = np.select([is_not, is_cnot, is_toffoli],
                      [bit[..., 0], bit[..., 1], bit[..., 2]], zero)
    sp = np.select([is_swap, is_fredkin], [pos[..., 0], pos[..., 1]], zero)
    sq = np.select([is_swap, is_fredkin], [pos[..., 1], pos[..., 2]], zero)
    swap = (is_swap | is_fredkin).astype(np.int64)
    return cmask, fmask, sp, sq, swap


def apply_arrays(states, masks):
    cmask, fmask, sp, sq, swap = masks
    active = (states & cmask) == cmask
    states ^= fmask * active
    diff = ((states >> sp) ^ (states >> sq)) & 1 & (active * swap)
    states ^= (diff << sp) | (diff << sq)
    return states
