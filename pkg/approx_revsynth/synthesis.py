"""Evolutionary synthesis of (approximate) reversible circuits.

The population lives in two arrays, kinds (P, d) and args (P, d, 3), and is
simulated gate position by gate position on packed input states. Every
random draw of a generation comes from one Philox stream keyed by
(master_seed, generation, purpose) and has a fixed shape indexed by the
population position, so threading never changes a result.
"""
import json
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from functools import lru_cache

import numpy as np

from approx_revsynth import defaults
from approx_revsynth.circuit import Circuit, embed_values, read_values, serialize, simulate
from approx_revsynth.cost import CostTable, CouplingMap, circuit_cost, quantum_cost, quantum_cost_arrays
from approx_revsynth.errors import ConfigError, Error, NonCriticalError, RestrictionError
from approx_revsynth.log import logger
from approx_revsynth.metrics import bit_mismatch_matrix, check_weights, exhaustive_report
from approx_revsynth.restrictions import UNRESTRICTED, GateSampler

# Stream purposes
INIT, GENERATION = 0, 1


@dataclass
class EAParams:
    d: int
    l: int
    S: int
    F: int
    G: int
    b: int
    ds: float = 0.5
    master_seed: int = 0
    # Weighted fitness per output bit (None: any wrong bit counts once)
    weights: tuple = None
    # Wall-clock budget in seconds (None: unlimited)
    time_limit: float = None
    fails_capacity: int = None

    @property
    def P(self):
        return self.S * self.F

    @property
    def capacity(self):
        return self.fails_capacity or defaults.fails_capacity_factor * self.b

    @property
    def uniform_draws(self):
        return math.ceil(Fraction(self.ds).limit_denominator(10 ** 9) * self.b)

    def validate(self, f):
        checks = [
            (self.d >= 1, f"d must be >= 1, got {self.d}"),
            (self.l >= max(f.n, f.m), f"l must be >= max(n, m) = {max(f.n, f.m)}, got {self.l}"),
            (self.S >= 1, f"S must be >= 1, got {self.S}"),
            (self.F >= 2, f"F must be >= 2, got {self.F}"),
            (self.G >= 1, f"G must be >= 1, got {self.G}"),
            (1 <= self.b <= 2 ** f.n, f"b must lie in 1..{2 ** f.n}, got {self.b}"),
            (0 <= self.ds <= 1, f"ds must lie in [0, 1], got {self.ds}"),
            (self.l <= 62, f"l must be <= 62 for packed simulation, got {self.l}"),
        ]
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)
        if self.weights is not None:
            self.weights = check_weights(self.weights, f.m)
        return self

    def to_dict(self):
        data = asdict(self)
        if data['weights'] is not None:
            data['weights'] = list(data['weights'])
        return data


PRESETS = {
    'xor5': dict(function='xor5', d=4, l=5, S=60, F=100, G=500, b=32, ds=0.5),
    '4mod5': dict(function='4mod5', d=5, l=6, S=100, F=100, G=500, b=32, ds=0.5),
    '5mod5': dict(function='5mod5', d=14, l=6, S=60, F=100, G=300, b=180, ds=0.5),
    '5mod5-tiny': dict(function='5mod5', d=2, l=6, S=1000, F=4, G=4, b=30, ds=0.5),
    '5mod5-timing': dict(function='5mod5', d=20, l=6, S=60, F=100, G=2000, b=32, ds=0.5),
    '2of5': dict(function='2of5', d=13, l=6, S=100, F=100, G=1300, b=32, ds=0.5),
    '6sym': dict(function='6sym', d=13, l=7, S=60, F=100, G=1300, b=64, ds=0.5),
    '9sym': dict(function='9sym', d=50, l=10, S=60, F=100, G=300, b=180, ds=0.5),
}


def stream(master_seed, generation, purpose):
    seed = np.random.SeedSequence([int(master_seed) & (2 ** 64 - 1), generation, purpose])
    return np.random.Generator(np.random.Philox(seed))


@lru_cache(maxsize=32)
def gate_sampler(line_count, restriction):
    return GateSampler(line_count, restriction)


class FailsSet:
    """Bounded multiset of packed inputs on which circuits failed."""

    def __init__(self, capacity, values=None):
        self.capacity = capacity
        values = np.zeros(0, dtype=np.int64) if values is None else np.asarray(values, dtype=np.int64)
        if len(values) > capacity:
            raise Error(f"FAILS holds {len(values)} inputs, capacity is {capacity}")
        self.values = values

    def __len__(self):
        return len(self.values)

    @classmethod
    def from_failures(cls, failures, capacity, rng):
        # Uniform downsampling keeps population-index order among the kept entries
        failures = np.asarray(failures, dtype=np.int64)
        if len(failures) > capacity:
            keep = np.sort(rng.choice(len(failures), size=capacity, replace=False))
            failures = failures[keep]
        return cls(capacity, failures)

    def draw(self, rng, shape, size):
        """``shape + (k,)`` inputs, with multiplicity, topped up with uniform draws."""
        count = shape[0]
        k = shape[1]
        if k == 0:
            return np.zeros((count, 0), dtype=np.int64)
        if len(self) >= k:
            return self.values[rng.integers(len(self), size=(count, k))]
        uniform = rng.integers(size, size=(count, k - len(self)))
        return np.concatenate([np.broadcast_to(self.values, (count, len(self))), uniform], axis=1)


@dataclass
class EvaluatedCircuit:
    circuit: Circuit
    fitness: float
    tiebreak: tuple = ()


class Population:
    def __init__(self, line_count, kinds, args):
        self.line_count = line_count
        self.kinds = np.asarray(kinds, dtype=np.int64)
        self.args = np.asarray(args, dtype=np.int64)
        # Ranked estimated fitness of the leading survivor rows, set by evolve_generation
        self.elite_fitness = None

    def __len__(self):
        return len(self.kinds)

    def circuit(self, index):
        return Circuit.from_arrays(self.line_count, self.kinds[index], self.args[index])

    @classmethod
    def random(cls, params, sampler, rng):
        kinds, args = sampler.sample_arrays(rng, (params.P, params.d))
        return cls(params.l, kinds, args)


# Sampled fitness
# =====================================================================

def draw_batches(f, fails, params, rng, count):
    if params.b == f.size:
        # b = 2^n: every member sees the whole input space, FAILS is irrelevant
        return np.ascontiguousarray(np.broadcast_to(f.inputs(), (count, f.size)))
    uniform_count = params.uniform_draws
    uniform = rng.integers(f.size, size=(count, uniform_count))
    from_fails = fails.draw(rng, (count, params.b - uniform_count), f.size)
    return np.concatenate([uniform, from_fails], axis=1)


def _evaluate_chunk(kinds, args, batches, f, params):
    states = embed_values(batches, f.n, params.l)
    simulate(kinds, args, states, params.l)
    outputs = read_values(states, f.m)
    expected = f.table[batches]
    wrong = outputs != expected
    if params.weights is None:
        return wrong.sum(axis=1), wrong
    w = np.array(params.weights, dtype=float)
    bits = bit_mismatch_matrix(outputs, expected, f.m)
    return (bits @ w).sum(axis=1) / w.sum(), wrong


def evaluate_population(population, batches, f, params, threads=1):
    """Estimated fitness per member and the matrix of failed batch entries."""
    chunk = defaults.population_chunk
    slices = [slice(i, i + chunk) for i in range(0, len(population), chunk)]

    def run(s):
        return _evaluate_chunk(population.kinds[s], population.args[s], batches[s], f, params)

    if threads > 1 and len(slices) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, slices))
    else:
        parts = [run(s) for s in slices]
    fitness = np.concatenate([p[0] for p in parts])
    wrong = np.concatenate([p[1] for p in parts])
    return fitness, wrong


def estimate_fitness(circuit, f, fails, params, rng):
    kinds, args = circuit.to_arrays()
    population = Population(circuit.line_count, kinds[None, :], args[None, :, :])
    batches = draw_batches(f, fails, params, rng, 1)
    fitness, wrong = evaluate_population(population, batches, f, params)
    e = fitness[0]
    return (int(e) if params.weights is None else float(e)), batches[0][wrong[0]]


# Restricted mutation
# =====================================================================

def random_gate(l, restriction, rng):
    return gate_sampler(l, restriction or UNRESTRICTED).random_gate(rng)


def random_circuit(params, restriction, rng):
    kinds, args = gate_sampler(params.l, restriction or UNRESTRICTED).sample_arrays(rng, (params.d,))
    return Circuit.from_arrays(params.l, kinds, args)


def mutate(circuit, restriction, rng):
    if not len(circuit):
        raise ConfigError("cannot mutate an empty circuit")
    sampler = gate_sampler(circuit.line_count, restriction or UNRESTRICTED)
    p = int(rng.integers(len(circuit)))
    tries = 0
    while tries < defaults.total_retry_cap:
        gate = sampler.draw_args(sampler.draw_kind(rng), rng)
        if gate is not None:
            gates = list(circuit.gates)
            gates[p] = gate
            return Circuit(circuit.line_count, tuple(gates))
        tries += defaults.argument_retry_cap
    raise RestrictionError(f"mutation found no admissible gate after {defaults.total_retry_cap} tries")


def mutate_population(kinds, args, sampler, rng):
    kinds = kinds.copy()
    args = args.copy()
    rows = np.arange(len(kinds))
    positions = rng.integers(kinds.shape[1], size=len(kinds))
    new_kinds, new_args = sampler.sample_arrays(rng, (len(kinds),))
    kinds[rows, positions] = new_kinds
    args[rows, positions] = new_args
    return kinds, args


# STEPs 1-3
# =====================================================================

def evolve_generation(population, f, fails, params, restriction, rng, cost_table=None, threads=1):
    """One generation; returns (population', fails').

    Rows 0..S-1 of population' are the ranked survivors (their estimated
    fitness in ``population'.elite_fitness``), followed by F-1 children each.
    """
    if len(population) != params.P:
        raise ConfigError(f"population has {len(population)} members, expected S*F = {params.P}")
    sampler = gate_sampler(params.l, restriction or UNRESTRICTED)
    cost_table = cost_table or CostTable()

    # STEP 1
    batches = draw_batches(f, fails, params, rng, len(population))
    fitness, wrong = evaluate_population(population, batches, f, params, threads)
    next_fails = FailsSet.from_failures(batches[wrong], params.capacity, rng)

    # STEP 2
    qc = quantum_cost_arrays(population.kinds, cost_table)
    order = np.lexsort((np.arange(len(population)), qc, fitness))
    survivors = order[:params.S]

    # STEP 3
    parents = np.repeat(survivors, params.F - 1)
    child_kinds, child_args = mutate_population(population.kinds[parents], population.args[parents], sampler, rng)
    offspring = Population(
        params.l,
        np.concatenate([population.kinds[survivors], child_kinds]),
        np.concatenate([population.args[survivors], child_args]),
    )
    offspring.elite_fitness = fitness[survivors]

    if logger.isEnabledFor(logging.DEBUG):
        allowed = (restriction or UNRESTRICTED).allows(offspring.kinds, offspring.args, params.l)
        if not np.all(allowed):
            raise RestrictionError("population contains gates violating the restriction")
    return offspring, next_fails


# Synthesis driver
# =====================================================================

@dataclass
class SynthesisResult:
    function: str
    circuit: Circuit
    report: object
    qc: int
    cc: int
    history: list
    params: EAParams
    restriction: object
    generations_run: int
    aborted: bool = False
    created: str = field(default_factory=lambda: datetime.now(timezone.utc).isoformat(timespec='seconds'))

    @property
    def err(self):
        return self.report.err

    def to_dict(self):
        return {
            'function': self.function,
            'circuit': serialize(self.circuit),
            'report': self.report.to_dict(),
            'qc': self.qc,
            'cc': self.cc,
            'history': [float(e) if isinstance(e, float) else int(e) for e in self.history],
            'params': self.params.to_dict(),
            'restriction': self.restriction,
            'generations_run': self.generations_run,
            'aborted': self.aborted,
            'created': self.created,
        }

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + '\n'


def _exact_fitness(population, f, params, rows):
    inputs = np.broadcast_to(f.inputs(), (len(rows), f.size))
    kinds = population.kinds[rows]
    args = population.args[rows]
    fitness, _ = _evaluate_chunk(kinds, args, np.ascontiguousarray(inputs), f, params)
    return fitness


def synthesize(f, params, restriction=None, cost_table=None, coupling=None, threads=1):
    params.validate(f)
    restriction = restriction or UNRESTRICTED
    cost_table = cost_table or CostTable()
    sampler = gate_sampler(params.l, restriction)
    logger.info(f'Synthesizing {f.name}: d={params.d} l={params.l} S={params.S} F={params.F} '
                f'G={params.G} b={params.b} ds={params.ds} seed={params.master_seed}')

    started = time.monotonic()
    population = Population.random(params, sampler, stream(params.master_seed, 0, INIT))
    fails = FailsSet(params.capacity)
    history = []
    aborted = False
    for generation in range(1, params.G + 1):
        rng = stream(params.master_seed, generation, GENERATION)
        population, fails = evolve_generation(population, f, fails, params, restriction, rng,
                                              cost_table, threads)
        best = population.elite_fitness[0]
        history.append(int(best) if params.weights is None else float(best))
        if generation % defaults.log_every == 0:
            logger.debug(f'Generation {generation}: best estimated fitness {best}, FAILS size {len(fails)}')
        if params.time_limit is not None and time.monotonic() - started > params.time_limit \
                and generation < params.G:
            NonCriticalError(f"time limit of {params.time_limit}s reached after {generation} generations",
                             f.name)
            aborted = True
            break

    # Final choice: exhaustive error of the S survivors, then qc, then rank
    rows = np.arange(params.S)
    exact = _exact_fitness(population, f, params, rows)
    qc = quantum_cost_arrays(population.kinds[rows], cost_table)
    finalists = [EvaluatedCircuit(population.circuit(row), exact[row], (int(qc[row]), int(row))) for row in rows]
    circuit = min(finalists, key=lambda e: (e.fitness, e.tiebreak)).circuit

    report = exhaustive_report(circuit, f, params.weights)
    coupling = coupling or CouplingMap.bundled()
    cc = None
    if circuit.line_count <= coupling.qubits:
        cc = circuit_cost(circuit, coupling)
    else:
        NonCriticalError(f"circuit wider than coupling map '{coupling.name}', cc not computed", f.name)

    result = SynthesisResult(
        function=f.name,
        circuit=circuit,
        report=report,
        qc=quantum_cost(circuit, cost_table),
        cc=cc,
        history=history,
        params=params,
        restriction=restriction.to_dict(),
        generations_run=len(history),
        aborted=aborted,
    )
    logger.info(f'Finished {f.name} in {time.monotonic() - started:.1f}s: err={float(report.err):.4f} '
                f'qc={result.qc} cc={cc}')
    return result


def measure_throughput(l=6, d=20, population=6000, b=32, repeats=5, seed=0):
    rng = stream(seed, 0, INIT)
    sampler = gate_sampler(l, UNRESTRICTED)
    kinds, args = sampler.sample_arrays(rng, (population, d))
    states = rng.integers(2 ** l, size=(population, b))
    started = time.perf_counter()
    for _ in range(repeats):
        simulate(kinds, args, states, l)
    elapsed = time.perf_counter() - started
    rate = population * b * d * repeats / elapsed
    logger.info(f'Throughput: {rate:.3e} gate-ops/s ({population}x{b} states, d={d}, {repeats} repeats)')
    return rate
