import json

import numpy as np
import pytest

from approx_revsynth.circuit import Circuit, serialize
from approx_revsynth.errors import ConfigError
from approx_revsynth.gates import Gate, GateKind
from approx_revsynth.metrics import exhaustive_report
from approx_revsynth.oracles import BooleanFunction, builtin
from approx_revsynth.restrictions import UNRESTRICTED, AllowedKinds
from approx_revsynth.synthesis import (INIT, PRESETS, EAParams, FailsSet, Population, draw_batches,
                                       estimate_fitness, evolve_generation, gate_sampler, measure_throughput,
                                       mutate, random_circuit, stream, synthesize)

from conftest import gate, random_circuit as sampled_circuit

NOT1 = BooleanFunction('not1', 1, 1, np.array([1, 0]))


def preset(name, **changes):
    params = dict(PRESETS[name])
    function = builtin(params.pop('function'))
    params.update(changes)
    return function, EAParams(**params)


def test_params_validation():
    f = builtin('5mod5')
    with pytest.raises(ConfigError):
        EAParams(d=4, l=4, S=10, F=10, G=10, b=32).validate(f)
    with pytest.raises(ConfigError):
        EAParams(d=4, l=6, S=10, F=10, G=10, b=64).validate(f)
    with pytest.raises(ConfigError):
        EAParams(d=4, l=6, S=10, F=1, G=10, b=8).validate(f)
    with pytest.raises(ConfigError):
        EAParams(d=4, l=6, S=10, F=10, G=10, b=8, ds=1.5).validate(f)
    assert EAParams(d=4, l=6, S=10, F=10, G=10, b=32).P == 100


def test_uniform_draws():
    assert EAParams(d=1, l=1, S=1, F=2, G=1, b=32, ds=0.5).uniform_draws == 16
    assert EAParams(d=1, l=1, S=1, F=2, G=1, b=10, ds=0.3).uniform_draws == 3
    assert EAParams(d=1, l=1, S=1, F=2, G=1, b=7, ds=0.5).uniform_draws == 4


def test_fails_set_draws():
    rng = np.random.default_rng(3)
    empty = FailsSet(8)
    assert empty.draw(rng, (2, 3), 32).shape == (2, 3)
    partial = FailsSet(8, [5, 9])
    drawn = partial.draw(rng, (4, 5), 32)
    assert np.all(drawn[:, :2] == [5, 9])
    full = FailsSet(8, [7, 7, 7, 7])
    assert np.all(full.draw(rng, (3, 2), 32) == 7)


def test_fails_set_is_bounded():
    rng = np.random.default_rng(3)
    fails = FailsSet.from_failures(np.arange(100), 10, rng)
    assert len(fails) == 10
    assert np.all(np.diff(fails.values) > 0)


def test_synthesizes_a_not_gate():
    result = synthesize(NOT1, EAParams(d=1, l=1, S=4, F=5, G=5, b=2))
    assert result.err == 0
    assert result.circuit == Circuit(1, (Gate(GateKind.NOT, (1, 0, 0)),))
    assert result.qc == 1
    assert result.report.constant is False


def test_same_seed_same_result():
    f, params = preset('5mod5-tiny', G=3)
    first = synthesize(f, params)
    second = synthesize(f, EAParams(**params.to_dict()))
    assert serialize(first.circuit) == serialize(second.circuit)
    assert first.history == second.history


def test_threads_do_not_change_the_result():
    f = builtin('4mod5')
    params = dict(d=4, l=6, S=60, F=20, G=4, b=16, master_seed=11)
    single = synthesize(f, EAParams(**params), threads=1)
    threaded = synthesize(f, EAParams(**params), threads=3)
    assert serialize(single.circuit) == serialize(threaded.circuit)
    assert single.history == threaded.history


def test_generation_layout():
    f = builtin('5mod5')
    params = EAParams(d=3, l=6, S=5, F=4, G=1, b=16)
    sampler = gate_sampler(6, UNRESTRICTED)
    population = Population.random(params, sampler, stream(0, 0, INIT))
    offspring, fails = evolve_generation(population, f, FailsSet(params.capacity), params, UNRESTRICTED,
                                         stream(0, 1, 1))
    assert len(offspring) == params.P
    assert np.all(np.diff(offspring.elite_fitness) >= 0)
    assert len(fails) <= params.capacity
    for s in range(params.S):
        children = offspring.kinds[params.S + s * (params.F - 1):params.S + (s + 1) * (params.F - 1)]
        changed = (children != offspring.kinds[s]).sum(axis=1)
        assert np.all(changed <= 1)


def test_restricted_search_stays_restricted():
    f = builtin('4mod5')
    restriction = AllowedKinds(['not', 'cnot', 'toffoli'])
    result = synthesize(f, EAParams(d=5, l=6, S=10, F=10, G=10, b=16), restriction)
    assert restriction.admits_circuit(result.circuit)
    assert result.to_dict()['restriction'] == {'allowed_kinds': ['cnot', 'not', 'toffoli']}


def test_mutate_changes_one_position(rng):
    circuit = sampled_circuit(rng, 5, 8)
    restriction = AllowedKinds(['cnot'])
    mutated = mutate(circuit, restriction, rng)
    assert len(mutated) == len(circuit)
    assert sum(a != b for a, b in zip(mutated.gates, circuit.gates)) <= 1
    assert any(restriction.admits(g, 5) for g in mutated.gates)
    with pytest.raises(ConfigError):
        mutate(Circuit(5), restriction, rng)


def test_estimated_fitness_of_an_exact_circuit():
    params = EAParams(d=1, l=1, S=1, F=2, G=1, b=2)
    circuit = Circuit(1, (Gate(GateKind.NOT, (1, 0, 0)),))
    fitness, failed = estimate_fitness(circuit, NOT1, FailsSet(8), params, np.random.default_rng(0))
    assert fitness == 0
    assert len(failed) == 0


def test_random_circuit_depth():
    params = EAParams(d=7, l=4, S=1, F=2, G=1, b=2)
    assert len(random_circuit(params, UNRESTRICTED, np.random.default_rng(1))) == 7


def test_time_limit_aborts():
    f, params = preset('5mod5-tiny', G=50, time_limit=0)
    result = synthesize(f, params)
    assert result.aborted
    assert result.generations_run < 50


def test_report_json():
    result = synthesize(NOT1, EAParams(d=1, l=1, S=4, F=5, G=2, b=2, master_seed=9))
    data = json.loads(result.to_json())
    assert data['params']['master_seed'] == 9
    assert data['circuit'].startswith('lines 1')
    assert data['report']['err'] == 0.0


def test_weighted_fitness_runs():
    f = builtin('NthPrime3')
    result = synthesize(f, EAParams(d=6, l=5, S=10, F=10, G=5, b=8, weights=(16, 8, 4, 2, 1)))
    assert 0 <= result.report.weighted_error <= 1


def test_exhaustive_batches_never_lose_ground():
    f = builtin('4mod5')
    result = synthesize(f, EAParams(d=5, l=6, S=20, F=10, G=60, b=16, master_seed=3))
    assert all(later <= earlier for earlier, later in zip(result.history, result.history[1:]))
    if result.history[-1] == 0:
        assert result.err == 0


def test_exact_circuit_survives_every_generation():
    f = builtin('xor5')
    params = EAParams(d=4, l=5, S=5, F=6, G=1, b=16)
    sampler = gate_sampler(5, UNRESTRICTED)
    population = Population.random(params, sampler, stream(2, 0, INIT))
    exact = Circuit(5, (gate('cnot', 1, 5), gate('cnot', 2, 5), gate('cnot', 3, 5), gate('cnot', 4, 5)))
    assert exhaustive_report(exact, f).err == 0
    population.kinds[7], population.args[7] = exact.to_arrays()
    fails = FailsSet(params.capacity)
    for generation in range(1, 16):
        population, fails = evolve_generation(population, f, fails, params, UNRESTRICTED,
                                              stream(2, generation, 1))
        survivors = [exhaustive_report(population.circuit(s), f).err for s in range(params.S)]
        assert 0 in survivors


def test_failed_rare_input_is_oversampled():
    # One positive input (11111); identity circuits read the ancilla and always answer 0
    table = np.zeros(32, dtype=np.int64)
    table[31] = 1
    f = BooleanFunction('and5', 5, 1, table)
    params = EAParams(d=2, l=6, S=10, F=10, G=1, b=16, ds=0.5)
    kinds = np.zeros((params.P, params.d), dtype=np.int64)
    args = np.tile([1, 2, 3], (params.P, params.d, 1))
    population = Population(6, kinds, args)
    _, fails = evolve_generation(population, f, FailsSet(params.capacity), params, UNRESTRICTED,
                                 stream(5, 1, 1))
    assert len(fails) > 0
    assert set(fails.values.tolist()) == {31}
    batches = draw_batches(f, fails, params, stream(5, 2, 1), params.P)
    assert np.mean(batches == 31) > 1 / 32
    assert np.all(batches[:, params.uniform_draws:] == 31)



@pytest.mark.slow
def test_xor5_is_found_exactly():
    exact = 0
    for seed in range(5):
        f, params = preset('xor5', master_seed=seed)
        exact += synthesize(f, params).err == 0
    assert exact >= 4


@pytest.mark.slow
def test_4mod5_is_found_cheaply():
    found = 0
    for seed in range(5):
        f, params = preset('4mod5', master_seed=seed)
        result = synthesize(f, params)
        found += result.err == 0 and result.qc <= 12
    assert found >= 3


@pytest.mark.slow
def test_5mod5_exact_synthesis():
    results = [synthesize(*preset('5mod5', master_seed=seed)) for seed in range(8)]
    assert any(r.err == 0 for r in results)


@pytest.mark.slow
def test_2of5_approximation():
    good = 0
    for seed in range(5):
        result = synthesize(*preset('2of5', master_seed=seed))
        good += not result.report.constant and result.err <= 0.2
    assert good >= 4


@pytest.mark.slow
def test_throughput():
    assert measure_throughput() >= 2e7
