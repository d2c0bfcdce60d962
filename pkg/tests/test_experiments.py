import csv
import json

import pytest

from approx_revsynth import defaults
from approx_revsynth.circuit import Circuit, serialize
from approx_revsynth.config import ExperimentConfig
from approx_revsynth.errors import CircuitError
from approx_revsynth.experiments import (GateRow, curve_from_csv, curve_points, evaluate_circuit, load_circuit,
                                         metric_columns, run_synthesis, sweep_gates, sweep_noise,
                                         write_synth_artifacts)
from approx_revsynth.oracles import builtin

from conftest import approximate_5mod5_circuit

TINY_EA = dict(l=6, S=20, F=5, G=3, b=16)


def tiny_config(tmp_path, **changes):
    settings = dict(function='5mod5', ea=dict(TINY_EA), gate_counts=[2, 3], repetitions=3, output=str(tmp_path))
    settings.update(changes)
    return ExperimentConfig(**settings)


def read_csv(path):
    with open(path, newline='') as f:
        return list(csv.reader(f))


def test_sweep_writes_every_run_once(tmp_path):
    config = tiny_config(tmp_path)
    rows, points = sweep_gates(config, builtin('5mod5'))
    table = read_csv(tmp_path / defaults.gates_raw_file)
    assert table[0] == defaults.gates_raw_header
    assert sorted((int(r[0]), int(r[1])) for r in table[1:]) == [(d, run) for d in (2, 3) for run in range(3)]
    assert [int(r[2]) for r in table[1:4]] == [0, 1, 2]
    assert len(rows) == 6
    assert sum(p.count for p in points) == 6


def test_curve_recomputed_from_raw_csv(tmp_path):
    config = tiny_config(tmp_path)
    _, points = sweep_gates(config, builtin('5mod5'))
    assert curve_from_csv(tmp_path / defaults.gates_raw_file) == points
    curve = read_csv(tmp_path / defaults.gates_curve_file)
    assert curve[0] == defaults.gates_curve_header
    assert [int(r[0]) for r in curve[1:]] == [p.qc for p in points]


def test_sweep_files_do_not_depend_on_threads(tmp_path):
    single, threaded = tmp_path / 'one', tmp_path / 'many'
    sweep_gates(tiny_config(single, threads=1), builtin('5mod5'))
    sweep_gates(tiny_config(threaded, threads=4), builtin('5mod5'))
    for name in (defaults.gates_raw_file, defaults.gates_curve_file):
        assert (single / name).read_bytes() == (threaded / name).read_bytes()


def test_curve_buckets():
    rows = [GateRow(2, 0, 0, 0.25, 5, 70, False, 1),
            GateRow(2, 1, 1, 0.5, 5, 70, False, 1),
            GateRow(2, 2, 2, 0.125, 5, 70, False, 1),
            GateRow(3, 0, 0, 0.21875, 0, 0, True, 0)]
    points = curve_points(rows)
    assert [(p.qc, p.count) for p in points] == [(0, 1), (5, 3)]
    assert points[0].minimum == points[0].median == points[0].maximum == 0.21875
    assert (points[1].minimum, points[1].median, points[1].maximum) == (0.125, 0.25, 0.5)
    assert [p.qc for p in curve_points(rows, exclude_constant=True)] == [5]


def test_empty_gate_counts(tmp_path):
    with pytest.raises(CircuitError):
        sweep_gates(tiny_config(tmp_path, gate_counts=[]), builtin('5mod5'))


def test_synth_artifacts(tmp_path):
    config = tiny_config(tmp_path, seed=5)
    result = run_synthesis(config, builtin('5mod5'), d=3)
    circuit_path, report_path = write_synth_artifacts(result, str(tmp_path))
    assert load_circuit(circuit_path) == result.circuit
    report = json.loads(open(report_path).read())
    assert report['params']['d'] == 3 and report['params']['master_seed'] == 5


def test_noise_sweep_files(tmp_path):
    config = tiny_config(tmp_path, scales=[0.0, 1.0], trials=32)
    circuits = [approximate_5mod5_circuit(), Circuit(6)]
    rows, crossovers = sweep_noise(config, builtin('5mod5'), circuits, ['approx', 'zero'])
    table = read_csv(tmp_path / defaults.noise_file)
    assert table[0] == defaults.noise_header
    assert len(table) == 5
    assert table[1][:4] == ['approx', '5', str(rows[0].cc), '0.0']
    assert float(table[1][5]) == 9 / 32
    assert float(table[3][5]) == 7 / 32
    assert [c[:2] for c in crossovers] == [('zero', 'approx')]
    assert read_csv(tmp_path / defaults.noise_crossover_file)[0] == defaults.crossover_header


def test_evaluate_circuit():
    data = evaluate_circuit(Circuit(5), builtin('xor5'))
    assert data['report']['err'] == 0.5
    assert data['qc'] == 0
    with pytest.raises(CircuitError):
        evaluate_circuit(Circuit(4), builtin('xor5'))


def test_load_circuit_reads_both_formats(tmp_path):
    circuit = approximate_5mod5_circuit()
    native = tmp_path / 'c.rev'
    native.write_text(serialize(circuit))
    assert load_circuit(str(native)) == circuit
    real = tmp_path / 'c.real'
    real.write_text('.numvars 6\n.variables a b c d e f\n.begin\nt3 b d f\n.end\n')
    assert load_circuit(str(real)) == circuit


def test_noisy_columns_in_gate_sweep(tmp_path):
    config = tiny_config(tmp_path, noise_scales=[0.0, 1.0], trials=16)
    rows, _ = sweep_gates(config, builtin('5mod5'))
    table = read_csv(tmp_path / defaults.gates_raw_file)
    assert table[0] == defaults.gates_raw_header + ['noisy_error@0', 'noisy_stderr@0',
                                                    'noisy_error@1', 'noisy_stderr@1']
    for row in rows:
        assert row.metrics['noisy_error@0'] == row.err
        assert row.metrics['noisy_stderr@0'] == 0
    for name in ('noisy_error_0', 'noisy_error_1'):
        assert (tmp_path / f'sweep_gates_curve_{name}.csv').exists()
    assert not (tmp_path / 'sweep_gates_curve_noisy_stderr_1.csv').exists()
    noisy = curve_from_csv(tmp_path / defaults.gates_raw_file, metric='noisy_error@1')
    assert noisy == curve_points(rows, metric='noisy_error@1')
    assert read_csv(tmp_path / 'sweep_gates_curve_noisy_error_1.csv')[1][0] == str(noisy[0].qc)


def test_bit_weighted_columns_for_multi_output(tmp_path):
    f = builtin('NthPrime3')
    config = tiny_config(tmp_path, function='NthPrime3', ea=dict(TINY_EA, l=5, b=8), gate_counts=[2],
                         repetitions=2, noise_scales=[1.0], trials=8)
    assert metric_columns(f, [1.0]) == ['uniform_error', 'weighted_error', 'noisy_error@1', 'noisy_stderr@1',
                                        'noisy_weighted@1']
    rows, _ = sweep_gates(config, f)
    assert read_csv(tmp_path / defaults.gates_raw_file)[0][len(defaults.gates_raw_header):] == \
        metric_columns(f, [1.0])
    for row in rows:
        assert 0 <= row.metrics['uniform_error'] <= 1
        assert 0 <= row.metrics['weighted_error'] <= 1
        assert 0 <= row.metrics['noisy_weighted@1'] <= 1
    for name in ('uniform_error', 'weighted_error', 'noisy_weighted_1'):
        assert (tmp_path / f'sweep_gates_curve_{name}.csv').exists()
