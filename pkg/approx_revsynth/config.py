"""Experiment configuration loaded from YAML (JSON works too).

Example::

    function: 5mod5          # or truth_table: tables/f.tt
    seed: 7
    threads: 4
    trials: 1024
    output: results
    ea: {d: 14, l: 6, S: 60, F: 100, G: 300, b: 180, ds: 0.5}
    restriction: {allowed_kinds: [not, cnot, toffoli], adjacent: path}
    cost: {table: {toffoli: 5}, coupling: melbourne}
    noise: {p1: 0.001, p2: 0.01, p_meas: 0.02, channel: depolarizing}
    sweep: {gate_counts: [2, 4, 8], noise_scales: [0.1, 1], scales: [0, 0.1, 1], repetitions: 16}
    circuits: [approx.rev, exact.rev]
"""
import os
from dataclasses import dataclass, field, fields, replace

import yaml

from approx_revsynth import defaults
from approx_revsynth.cost import CostTable, CouplingMap
from approx_revsynth.errors import ConfigError
from approx_revsynth.log import logger
from approx_revsynth.metrics import exponential_weights, uniform_weights
from approx_revsynth.noise import NoiseModel
from approx_revsynth.oracles import builtin, load_truth_table
from approx_revsynth.restrictions import from_spec
from approx_revsynth.synthesis import PRESETS, EAParams

SECTIONS = ('function', 'truth_table', 'ea', 'restriction', 'cost', 'noise', 'sweep', 'output',
            'seed', 'threads', 'trials', 'circuits')
EA_KEYS = ('d', 'l', 'S', 'F', 'G', 'b', 'ds', 'weights', 'time_limit', 'fails_capacity')
SWEEP_KEYS = ('gate_counts', 'scales', 'noise_scales', 'repetitions', 'exclude_constant')


@dataclass
class ExperimentConfig:
    function: str = None
    truth_table: str = None
    ea: dict = field(default_factory=dict)
    restriction: object = None
    cost_table: CostTable = field(default_factory=CostTable)
    coupling: CouplingMap = None
    noise: NoiseModel = field(default_factory=NoiseModel)
    gate_counts: list = field(default_factory=list)
    scales: list = field(default_factory=list)
    noise_scales: list = field(default_factory=list)
    repetitions: int = defaults.repetitions
    exclude_constant: bool = False
    output: str = '.'
    seed: int = 0
    threads: int = 1
    trials: int = defaults.trials
    circuits: list = field(default_factory=list)
    base_dir: str = '.'

    def __post_init__(self):
        if self.coupling is None:
            self.coupling = CouplingMap.bundled()
        if self.restriction is None:
            self.restriction = from_spec(None)
        if self.repetitions < 1:
            raise ConfigError(f"sweep.repetitions must be >= 1, got {self.repetitions}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1, got {self.trials}")
        if any(d < 1 for d in self.gate_counts):
            raise ConfigError(f"sweep.gate_counts must be positive, got {self.gate_counts}")
        if any(s < 0 for s in self.scales):
            raise ConfigError(f"sweep.scales must be non-negative, got {self.scales}")
        if any(s < 0 for s in self.noise_scales) or len(set(self.noise_scales)) != len(self.noise_scales):
            raise ConfigError(f"sweep.noise_scales must be distinct and non-negative, got {self.noise_scales}")

    @classmethod
    def from_dict(cls, data, base_dir='.'):
        data = dict(data or {})
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")

        ea = _section(data, 'ea')
        bad = sorted(set(ea) - set(EA_KEYS))
        if bad:
            raise ConfigError(f"unknown ea keys: {', '.join(bad)}")
        sweep = _section(data, 'sweep')
        bad = sorted(set(sweep) - set(SWEEP_KEYS))
        if bad:
            raise ConfigError(f"unknown sweep keys: {', '.join(bad)}")
        cost = _section(data, 'cost')
        noise = _section(data, 'noise')
        circuits = [_resolve(base_dir, p) for p in data.get('circuits') or []]
        missing = [p for p in circuits if not os.path.isfile(p)]
        if missing:
            raise ConfigError(f"circuit files do not exist: {', '.join(missing)}")

        truth_table = data.get('truth_table')
        if truth_table is not None:
            truth_table = _resolve(base_dir, truth_table)
            if not os.path.isfile(truth_table):
                raise ConfigError(f"truth table '{truth_table}' does not exist")

        try:
            return cls(
                function=data.get('function'),
                truth_table=truth_table,
                ea=ea,
                restriction=from_spec(data.get('restriction'), base_dir),
                cost_table=CostTable(cost.get('table'), name=cost.get('name', 'config')),
                coupling=_coupling(cost.get('coupling'), base_dir),
                noise=NoiseModel(**noise),
                gate_counts=[int(d) for d in sweep.get('gate_counts', [])],
                scales=[float(s) for s in sweep.get('scales', [])],
                noise_scales=[float(s) for s in sweep.get('noise_scales', [])],
                repetitions=int(sweep.get('repetitions', defaults.repetitions)),
                exclude_constant=bool(sweep.get('exclude_constant', False)),
                output=_resolve(base_dir, data.get('output', '.')),
                seed=int(data.get('seed', 0)),
                threads=int(data.get('threads', 1)),
                trials=int(data.get('trials', defaults.trials)),
                circuits=circuits,
                base_dir=base_dir,
            )
        except (TypeError, ValueError) as e:
            raise ConfigError(f"invalid config value: {e}")

    @classmethod
    def from_preset(cls, name):
        if name not in PRESETS:
            raise ConfigError(f"unknown preset '{name}', presets are: {', '.join(PRESETS)}")
        preset = dict(PRESETS[name])
        return cls(function=preset.pop('function'), ea=preset)

    def with_overrides(self, **overrides):
        """Copy with every non-None override applied (command-line flags win over the file)."""
        names = {f.name for f in fields(self)}
        changes = {k: v for k, v in overrides.items() if v is not None and k in names}
        return replace(self, **changes)

    def load_function(self):
        if self.truth_table is not None:
            with open(self.truth_table, 'r', encoding='utf-8') as f:
                name = self.function or os.path.splitext(os.path.basename(self.truth_table))[0]
                return load_truth_table(f.read(), name, source=self.truth_table)
        if self.function is None:
            raise ConfigError("config names neither 'function' nor 'truth_table'")
        return builtin(self.function)

    def ea_params(self, f, d=None, seed=None):
        ea = dict(self.ea)
        if d is not None:
            ea['d'] = d
        missing = [k for k in ('d', 'l', 'S', 'F', 'G', 'b') if k not in ea]
        if missing:
            raise ConfigError(f"ea section lacks {', '.join(missing)}")
        ea['weights'] = _weights(ea.get('weights'), f.m)
        params = EAParams(master_seed=self.seed if seed is None else seed, **ea)
        return params.validate(f)


def _section(data, name):
    value = data.get(name) or {}
    if not isinstance(value, dict):
        raise ConfigError(f"'{name}' must be a mapping, got {value!r}")
    return dict(value)


def _resolve(base_dir, path):
    return path if os.path.isabs(path) else os.path.normpath(os.path.join(base_dir, path))


def _coupling(value, base_dir):
    if value is None or value == 'melbourne':
        return CouplingMap.bundled()
    if isinstance(value, str) and value.startswith('path'):
        return CouplingMap.path(int(value[4:]))
    path = _resolve(base_dir, value)
    if not os.path.isfile(path):
        raise ConfigError(f"coupling map '{path}' does not exist")
    return CouplingMap.load(path)


def _weights(value, m):
    if value is None or value == 'any':
        return None
    if value == 'uniform':
        return uniform_weights(m)
    if value in ('exponential', 'exponential-big', 'exponential-little'):
        return exponential_weights(m, 'little' if value.endswith('little') else 'big')
    return tuple(value)


def load_config(path):
    if not os.path.isfile(path):
        raise ConfigError(f"config file '{path}' does not exist", path)
    with open(path, 'r', encoding='utf-8') as file:
        try:
            data = yaml.safe_load(file)
        except yaml.YAMLError as e:
            raise ConfigError(f"cannot parse config: {e}", path)
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config document must be a mapping", path)
    logger.debug(f'Loaded config {path}')
    return ExperimentConfig.from_dict(data, base_dir=os.path.dirname(os.path.abspath(path)))
