import numpy as np
import pytest

from approx_revsynth.circuit import (Circuit, embed_input, embed_values, from_real, is_real_document, parse,
                                     read_outputs, read_values, remove_unused_gates, run, serialize,
                                     simulate_values, to_real)
from approx_revsynth.cost import quantum_cost
from approx_revsynth.errors import CircuitError, ParseError
from approx_revsynth.gates import BitState, Gate, GateKind

from conftest import gate, random_circuit


def all_outputs(circuit):
    return simulate_values(circuit, np.arange(2 ** circuit.line_count)).tolist()


def test_not_on_one_line():
    circuit = Circuit(1, (Gate(GateKind.NOT, (1, 0, 0)),))
    assert str(run(circuit, BitState.from_string('0'))) == '1'


def test_toffoli_cnot_example():
    circuit = Circuit(3, (gate('toffoli', 1, 2, 3), gate('cnot', 3, 1)))
    assert str(run(circuit, BitState.from_string('110'))) == '011'


def test_run_rejects_width_mismatch():
    with pytest.raises(CircuitError):
        run(Circuit(3), BitState.from_string('10'))
    with pytest.raises(CircuitError):
        Circuit(2, (gate('cnot', 1, 3),))


def test_random_circuits_are_permutations(rng):
    for _ in range(300):
        l = int(rng.integers(1, 7))
        circuit = random_circuit(rng, l, int(rng.integers(0, 20)))
        assert sorted(all_outputs(circuit)) == list(range(2 ** l))


@pytest.mark.slow
def test_bijectivity_on_many_circuits(rng):
    for _ in range(10_000):
        l = int(rng.integers(1, 9))
        circuit = random_circuit(rng, l, int(rng.integers(0, 30)))
        assert sorted(all_outputs(circuit)) == list(range(2 ** l))


def test_scalar_and_vectorised_runs_agree(rng):
    for _ in range(50):
        circuit = random_circuit(rng, 5, 12)
        outputs = all_outputs(circuit)
        for value in range(32):
            assert run(circuit, BitState.from_int(value, 5)).to_int() == outputs[value]


def test_embedding_and_readout():
    assert embed_input('101', 5) == BitState.from_string('10100')
    assert embed_values(np.array([5]), 3, 5).tolist() == [20]
    assert read_outputs(BitState.from_string('10110'), 2) == BitState.from_string('10')
    assert read_values(np.array([0b10110]), 2).tolist() == [0b10]
    with pytest.raises(CircuitError):
        embed_input('1011', 3)


def check_pruning_keeps_outputs(rng, count):
    for _ in range(count):
        l = int(rng.integers(1, 9))
        m = int(rng.integers(1, l + 1))
        circuit = random_circuit(rng, l, int(rng.integers(0, 30)))
        pruned = remove_unused_gates(circuit, m)
        assert read_values(all_outputs(pruned), m).tolist() == read_values(all_outputs(circuit), m).tolist()
        assert quantum_cost(pruned) <= quantum_cost(circuit)
        assert all(g.kind != GateKind.IDENTITY for g in pruned.gates)


def test_pruning_keeps_outputs(rng):
    check_pruning_keeps_outputs(rng, 300)


@pytest.mark.slow
def test_pruning_keeps_outputs_on_many_circuits(rng):
    check_pruning_keeps_outputs(rng, 1000)



def test_pruning_drops_gates_outside_the_output_cone():
    circuit = Circuit(3, (gate('not', 1), gate('cnot', 2, 3), gate('not', 2)))
    assert remove_unused_gates(circuit, 1).gates == (gate('cnot', 2, 3),)


def test_text_round_trip(rng):
    circuit = random_circuit(rng, 6, 15)
    text = serialize(circuit)
    assert text.startswith('lines 6\n')
    assert parse(text) == circuit


def test_parse_reports_line_numbers():
    with pytest.raises(ParseError) as e:
        parse('lines 3\n# comment\ncnot 1 2 0\nflip 1 0 0\n')
    assert e.value.line_number == 4
    with pytest.raises(ParseError) as e:
        parse('lines 2\ncnot 1 3 0\n')
    assert e.value.line_number == 2
    with pytest.raises(ParseError):
        parse('not 1 0 0\n')


def test_real_export_and_import(rng):
    circuit = random_circuit(rng, 5, 20)
    text = to_real(circuit, 4, 1)
    assert is_real_document(text)
    assert '.constants ----0' in text
    back = from_real(text)
    assert back.line_count == 5
    assert all_outputs(back) == all_outputs(circuit)


def test_real_rejects_unknown_codes():
    text = '.numvars 2\n.variables a b\n.begin\nv a b\n.end\n'
    with pytest.raises(ParseError):
        from_real(text)


def test_real_rejects_malformed_headers():
    with pytest.raises(ParseError) as e:
        from_real('.numvars x\n.variables a b\n.begin\nt2 a b\n.end\n')
    assert e.value.line_number == 1
    with pytest.raises(ParseError) as e:
        from_real('.numvars 2\n.variables a b c\n.begin\nt2 a c\n.end\n')
    assert e.value.line_number == 2
    with pytest.raises(ParseError) as e:
        from_real('.numvars 2\n.variables a b\n.begin\nt2 a a\n.end\n')
    assert e.value.line_number == 4


def test_invalid_gate_is_logged_once(caplog):
    with pytest.raises(ParseError):
        parse('lines 3\ncnot 1 1 2\n')
    assert len([r for r in caplog.records if 'pairwise distinct' in r.getMessage()]) == 1

