from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from approx_revsynth.circuit import embed_values, read_values, simulate_values
from approx_revsynth.errors import CircuitError
from approx_revsynth.gates import BitState

UNDEFINED = 'undefined'


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self):
        return self.tp + self.fp + self.fn + self.tn

    @property
    def positives(self):
        return self.tp + self.fn

    @property
    def negatives(self):
        return self.fp + self.tn


@dataclass(frozen=True)
class ErrorReport:
    n: int
    m: int
    total: int
    mismatches: int
    counts: ConfusionCounts = None
    bit_mismatches: tuple = ()
    weights: tuple = ()
    weighted_mismatches: Fraction = Fraction(0)
    constant: bool = False
    extra: dict = field(default_factory=dict)

    @property
    def err(self):
        return Fraction(self.mismatches, self.total)

    @property
    def fn_rate(self):
        if self.counts is None or self.counts.positives == 0:
            return None
        return Fraction(self.counts.fn, self.counts.positives)

    @property
    def fp_rate(self):
        if self.counts is None or self.counts.negatives == 0:
            return None
        return Fraction(self.counts.fp, self.counts.negatives)

    @property
    def f1(self):
        if self.counts is None:
            return None
        c = self.counts
        denominator = 2 * c.tp + c.fp + c.fn
        if denominator == 0:
            return None
        return Fraction(2 * c.tp, denominator)

    @property
    def bit_error_rates(self):
        return tuple(Fraction(k, self.total) for k in self.bit_mismatches)

    @property
    def weighted_error(self):
        """Mean weighted bit error, normalized by the weight sum to lie in [0, 1]."""
        if not self.weights:
            return self.err
        return self.weighted_mismatches / (self.total * sum(Fraction(w) for w in self.weights))

    def to_dict(self):
        def rate(value):
            return UNDEFINED if value is None else float(value)

        data = {
            'inputs': self.n,
            'outputs': self.m,
            'total': self.total,
            'mismatches': self.mismatches,
            'err': float(self.err),
            'constant': self.constant,
        }
        if self.counts is not None:
            data.update({
                'tp': self.counts.tp,
                'fp': self.counts.fp,
                'fn': self.counts.fn,
                'tn': self.counts.tn,
                'fn_rate': rate(self.fn_rate),
                'fp_rate': rate(self.fp_rate),
                'f1': rate(self.f1),
            })
        for i, k in enumerate(self.bit_mismatches):
            data[f'bit{i + 1}_mismatches'] = k
            data[f'bit{i + 1}_error'] = float(Fraction(k, self.total))
        if self.weights:
            data['weights'] = ','.join(str(w) for w in self.weights)
            data['weighted_error'] = float(self.weighted_error)
        data.update(self.extra)
        return data


def report_from_counts(counts):
    mismatches = counts.fp + counts.fn
    return ErrorReport(1, 1, counts.total, mismatches, counts, (mismatches,))


def confusion_counts(predicted, actual):
    predicted = np.asarray(predicted, dtype=bool)
    actual = np.asarray(actual, dtype=bool)
    return ConfusionCounts(
        tp=int(np.sum(predicted & actual)),
        fp=int(np.sum(predicted & ~actual)),
        fn=int(np.sum(~predicted & actual)),
        tn=int(np.sum(~predicted & ~actual)),
    )


def uniform_weights(m):
    return (1,) * m


def exponential_weights(m, endianness='big'):
    if endianness == 'big':
        return tuple(2 ** (m - 1 - i) for i in range(m))
    if endianness == 'little':
        return tuple(2 ** i for i in range(m))
    raise CircuitError(f"endianness must be 'big' or 'little', got '{endianness}'")


def check_weights(weights, m):
    weights = tuple(weights)
    if len(weights) != m:
        raise CircuitError(f"{len(weights)} weights given for {m} outputs")
    if any(w < 0 for w in weights):
        raise CircuitError(f"weights must be non-negative: {weights}")
    if sum(weights) == 0:
        raise CircuitError("weights must not all be zero")
    return weights


def bit_mismatch_matrix(outputs, expected, m):
    """Boolean (..., m) array of wrong output bits, column 0 is the first output line."""
    diff = np.asarray(outputs) ^ np.asarray(expected)
    shifts = np.arange(m - 1, -1, -1, dtype=np.int64)
    return ((diff[..., None] >> shifts) & 1).astype(bool)


def circuit_outputs(circuit, f):
    if circuit.line_count < max(f.n, f.m):
        raise CircuitError(
            f"circuit with {circuit.line_count} lines cannot embed '{f.name}' ({f.n} inputs, {f.m} outputs)")
    states = simulate_values(circuit, embed_values(f.inputs(), f.n, circuit.line_count))
    return read_values(states, f.m)


def exhaustive_report(circuit, f, weights=None):
    outputs = circuit_outputs(circuit, f)
    return report_from_outputs(outputs, f, weights)


def report_from_outputs(outputs, f, weights=None):
    outputs = np.asarray(outputs, dtype=np.int64)
    wrong_bits = bit_mismatch_matrix(outputs, f.table, f.m)
    bit_mismatches = tuple(int(k) for k in wrong_bits.sum(axis=0))
    mismatches = int(np.sum(outputs != f.table))
    counts = confusion_counts(outputs, f.table) if f.m == 1 else None
    weighted = Fraction(0)
    if weights is not None:
        weights = check_weights(weights, f.m)
        weighted = sum(Fraction(w) * k for w, k in zip(weights, bit_mismatches))
    return ErrorReport(
        n=f.n,
        m=f.m,
        total=f.size,
        mismatches=mismatches,
        counts=counts,
        bit_mismatches=bit_mismatches,
        weights=weights or (),
        weighted_mismatches=Fraction(weighted),
        constant=bool(np.all(outputs == outputs[0])),
    )


def multi_output_error(circuit, f, weights):
    weights = check_weights(weights, f.m)
    return exhaustive_report(circuit, f, weights).weighted_error


def is_constant(circuit, f):
    outputs = circuit_outputs(circuit, f)
    return bool(np.all(outputs == outputs[0]))


def _as_values(inputs, n):
    values = []
    for x in inputs:
        if isinstance(x, (int, np.integer)):
            if not 0 <= x < 2 ** n:
                raise CircuitError(f"sampled input {x} lies outside 0..{2 ** n - 1}")
            values.append(int(x))
            continue
        x = x if isinstance(x, BitState) else BitState.from_string(x) if isinstance(x, str) else BitState(x)
        if len(x) != n:
            raise CircuitError(f"sampled input has {len(x)} bits, expected {n}")
        values.append(x.to_int())
    return np.array(values, dtype=np.int64)


def sampled_mismatch_count(circuit, f, inputs, weights=None):
    """Mismatching inputs of a sample, counted with multiplicity.

    With ``weights`` every input contributes its weighted wrong-bit share
    (sum of w_i over wrong bits divided by sum of w_i) instead of 0/1.
    """
    values = _as_values(inputs, f.n)
    if values.size == 0:
        return 0
    outputs = read_values(simulate_values(circuit, embed_values(values, f.n, circuit.line_count)), f.m)
    expected = f.table[values]
    if weights is None:
        return int(np.sum(outputs != expected))
    weights = check_weights(weights, f.m)
    wrong = bit_mismatch_matrix(outputs, expected, f.m)
    w = np.array(weights, dtype=float)
    return float(np.sum(wrong @ w) / w.sum())
