"""Classical stochastic fault injection on decomposed circuits.

Trajectories run on packed qubit states of the primitive circuit. After
every primitive a fault fires with probability min(1, scale * p), p being
p1 or p2 by the primitive's arity; a fault either replaces the primitive's
qubits by uniform random bits ('depolarizing') or flips one of them
('bitflip'). Readout flips each circuit line with min(1, scale * p_meas).

Each input x draws from its own Philox stream keyed by (seed, x) and every
scale reuses the same stream, so sweeps over the scale share their random
numbers and any thread count gives the same counts.
"""
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from fractions import Fraction

import numpy as np

from approx_revsynth import defaults
from approx_revsynth.circuit import embed_values, read_values
from approx_revsynth.cost import CouplingMap, decompose, primitive_cost, quantum_cost
from approx_revsynth.errors import ConfigError, ResourceError
from approx_revsynth.gates import BitState, apply_arrays
from approx_revsynth.log import logger
from approx_revsynth.metrics import bit_mismatch_matrix, check_weights

CHANNELS = ('depolarizing', 'bitflip')


@dataclass(frozen=True)
class NoiseModel:
    p1: float = defaults.p1
    p2: float = defaults.p2
    p_meas: float = defaults.p_meas
    scale: float = 1.0
    channel: str = defaults.channel

    def __post_init__(self):
        for name in ('p1', 'p2', 'p_meas'):
            value = getattr(self, name)
            if not 0 <= value <= 1:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        if self.scale < 0:
            raise ConfigError(f"noise scale must be non-negative, got {self.scale}")
        if self.channel not in CHANNELS:
            raise ConfigError(f"noise channel must be one of {', '.join(CHANNELS)}, got '{self.channel}'")

    def effective(self, p):
        return min(1.0, self.scale * p)

    def gate_probability(self, arity):
        return self.effective(self.p1 if arity == 1 else self.p2)

    @property
    def readout_probability(self):
        return self.effective(self.p_meas)

    def scaled(self, scale):
        return replace(self, scale=scale)

    def to_dict(self):
        return {'p1': self.p1, 'p2': self.p2, 'p_meas': self.p_meas, 'scale': self.scale,
                'channel': self.channel}


@dataclass(frozen=True)
class NoisyEstimate:
    failures: tuple
    trials: int

    @property
    def inputs(self):
        return len(self.failures)

    @property
    def success_frequencies(self):
        return tuple(1 - k / self.trials for k in self.failures)

    @property
    def exact_rate(self):
        return Fraction(sum(Fraction(k) for k in self.failures)) / (self.inputs * self.trials)

    @property
    def error_rate(self):
        return float(self.exact_rate)

    @property
    def stderr(self):
        # Binomial standard error of the mean over inputs
        variance = sum((k / self.trials) * (1 - k / self.trials) for k in self.failures)
        return math.sqrt(variance / self.trials) / self.inputs


def input_stream(seed, x):
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([int(seed), int(x)])))


def _trajectories(primitive, states, noise, rng, line_count):
    trials = len(states)
    qubit_masks = primitive.qubit_masks()
    full = (1 << primitive.qubit_count) - 1
    for masks, qmask, gate in zip(primitive.classical_masks(), qubit_masks, primitive.gates):
        apply_arrays(states, masks)
        hit = rng.random(trials) < noise.gate_probability(gate.arity)
        if noise.channel == 'depolarizing':
            replacement = rng.integers(0, full + 1, size=trials, dtype=np.int64)
            states[:] = np.where(hit, (states & ~qmask) | (replacement & qmask), states)
        else:
            bits = np.array([1 << (primitive.qubit_count - q) for q in gate.qubits], dtype=np.int64)
            states ^= bits[rng.integers(len(bits), size=trials)] * hit
    readout = rng.random((trials, line_count)) < noise.readout_probability
    for line in range(line_count):
        states ^= readout[:, line] * (1 << (primitive.qubit_count - primitive.placement[line]))
    return states


def noisy_run_once(primitive, state, noise, rng):
    line_count = len(primitive.placement)
    if len(state) != line_count:
        raise ConfigError(f"state has {len(state)} bits, primitive circuit carries {line_count} lines")
    states = primitive.lines_to_states(np.array([state.to_int()]), line_count)
    _trajectories(primitive, states, noise, rng, line_count)
    return BitState.from_int(int(primitive.states_to_lines(states, line_count)[0]), line_count)


def _input_failures(primitive, x, f, noise, trials, seed, line_count, weights):
    rng = input_stream(seed, x)
    start = embed_values(np.array([x]), f.n, line_count)
    states = np.repeat(primitive.lines_to_states(start, line_count), trials)
    _trajectories(primitive, states, noise, rng, line_count)
    outputs = read_values(primitive.states_to_lines(states, line_count), f.m)
    expected = int(f.table[x])
    if weights is None:
        return int(np.sum(outputs != expected))
    w = np.array(weights, dtype=float)
    return float(np.sum(bit_mismatch_matrix(outputs, expected, f.m) @ w) / w.sum())


def noisy_error_rate(circuit, f, noise, trials=defaults.trials, coupling=None, seed=0,
                     weights=None, threads=1, placement=None, primitive=None):
    if trials < 1:
        raise ConfigError(f"trial count must be positive, got {trials}")
    if f.size * trials > defaults.max_noisy_samples:
        raise ResourceError(f"2^{f.n} inputs x {trials} trials exceeds {defaults.max_noisy_samples} samples")
    if circuit.line_count < max(f.n, f.m):
        raise ConfigError(f"circuit with {circuit.line_count} lines cannot embed '{f.name}'")
    if weights is not None:
        weights = check_weights(weights, f.m)
    primitive = primitive or decompose(circuit, coupling or CouplingMap.bundled(), placement)
    line_count = circuit.line_count

    def run(x):
        return _input_failures(primitive, x, f, noise, trials, seed, line_count, weights)

    inputs = range(f.size)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            failures = list(pool.map(run, inputs))
    else:
        failures = [run(x) for x in inputs]
    estimate = NoisyEstimate(tuple(failures), trials)
    logger.debug(f'Noisy error of {f.name} at scale {noise.scale}: {estimate.error_rate:.4f} '
                 f'+- {estimate.stderr:.4f} ({trials} trials)')
    return estimate


@dataclass
class SweepRow:
    circuit_id: str
    qc: int
    cc: int
    scale: float
    trials: int
    estimate: NoisyEstimate

    def to_row(self):
        return [self.circuit_id, self.qc, self.cc, self.scale, self.trials,
                f'{self.estimate.error_rate:.6f}', f'{self.estimate.stderr:.6f}']


def noise_sweep(circuits, f, noise, scales, trials=defaults.trials, coupling=None, seed=0,
                ids=None, weights=None, threads=1, table=None):
    if not circuits or not scales:
        raise ConfigError("noise sweep needs at least one circuit and one scale")
    coupling = coupling or CouplingMap.bundled()
    ids = ids or [f'c{i}' for i in range(len(circuits))]
    rows = []
    for circuit_id, circuit in zip(ids, circuits):
        primitive = decompose(circuit, coupling)
        qc = quantum_cost(circuit, table)
        cc = primitive_cost(primitive)
        logger.info(f'Noise sweep of {circuit_id} (qc={qc}, cc={cc}) over {len(scales)} scales')
        for scale in scales:
            estimate = noisy_error_rate(circuit, f, noise.scaled(scale), trials, coupling, seed,
                                        weights, threads, primitive=primitive)
            rows.append(SweepRow(circuit_id, qc, cc, scale, trials, estimate))
    return rows


def crossover(rows, cheap_id, expensive_id):
    """Scale where the cheaper circuit starts to beat the expensive one.

    Linear interpolation between the two grid scales around the last
    sign change of (cheap - expensive); None when the cheap circuit never
    wins above it, 0.0 when it wins on the whole grid.
    """
    cheap = {r.scale: r.estimate.error_rate for r in rows if r.circuit_id == cheap_id}
    expensive = {r.scale: r.estimate.error_rate for r in rows if r.circuit_id == expensive_id}
    scales = sorted(set(cheap) & set(expensive))
    if not scales:
        return None
    diff = [cheap[s] - expensive[s] for s in scales]
    losing = [i for i, d in enumerate(diff) if d >= 0]
    if not losing:
        return 0.0
    last = losing[-1]
    if last == len(scales) - 1:
        return None
    s0, s1 = scales[last], scales[last + 1]
    d0, d1 = diff[last], diff[last + 1]
    return s0 + (s1 - s0) * d0 / (d0 - d1)
