import os

# No rotating log file next to the test run
os.environ.setdefault('REVSYNTH_LOG_FILE', '')

import numpy as np
import pytest

from approx_revsynth.circuit import Circuit
from approx_revsynth.error_handling import clear_errors
from approx_revsynth.gates import Gate, GateKind
from approx_revsynth.restrictions import GateSampler


@pytest.fixture(autouse=True)
def empty_error_ledger():
    clear_errors()
    yield
    clear_errors()


@pytest.fixture
def rng():
    return np.random.default_rng(20240501)


def random_circuit(rng, line_count, depth, restriction=None):
    kinds, args = GateSampler(line_count, restriction).sample_arrays(rng, (depth,))
    return Circuit.from_arrays(line_count, kinds, args)


def gate(token, *lines):
    return Gate(GateKind.from_token(token), tuple(lines) + (0,) * (3 - len(lines)))


def exact_5mod5_circuit():
    """5mod5 as an XOR of its seven minterms on 8 lines (ancillas 6 and 7, output 8)."""
    gates = []
    for v in (0, 5, 10, 15, 20, 25, 30):
        zeros = [gate('not', i) for i in range(1, 6) if not (v >> (5 - i)) & 1]
        gates += zeros
        gates += [
            gate('toffoli', 1, 2, 6),
            gate('toffoli', 6, 3, 7),
            gate('toffoli', 1, 2, 6),
            gate('toffoli', 7, 4, 6),
            gate('toffoli', 6, 5, 8),
            gate('toffoli', 7, 4, 6),
            gate('toffoli', 1, 2, 6),
            gate('toffoli', 6, 3, 7),
            gate('toffoli', 1, 2, 6),
        ]
        gates += zeros
    return Circuit(8, tuple(gates))


def approximate_5mod5_circuit():
    """A single Toffoli on lines 2 and 4, deterministic error 9/32."""
    return Circuit(6, (gate('toffoli', 2, 4, 6),))
