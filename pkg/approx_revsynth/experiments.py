"""Experiment harness: synthesis artifacts, gate-count sweeps, noise sweeps.

Runs may execute concurrently but rows are written by one writer in run
order and flushed after each row, so a killed sweep leaves a valid prefix.
"""
import csv
import itertools
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from prettytable import PrettyTable

from approx_revsynth import defaults
from approx_revsynth.circuit import from_real, is_real_document, parse, remove_unused_gates, serialize
from approx_revsynth.color_printer import print_green
from approx_revsynth.cost import circuit_cost, cost_report, decompose, quantum_cost
from approx_revsynth.errors import CircuitError, Error, NonCriticalError
from approx_revsynth.log import logger
from approx_revsynth.metrics import exhaustive_report, exponential_weights, multi_output_error, uniform_weights
from approx_revsynth.noise import crossover, noise_sweep, noisy_error_rate
from approx_revsynth.synthesis import synthesize


def load_circuit(path):
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    return from_real(text, source=path) if is_real_document(text) else parse(text, source=path)


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path


# Single runs
# =====================================================================

def run_synthesis(config, f, d=None, seed=None, threads=None):
    params = config.ea_params(f, d=d, seed=seed)
    return synthesize(f, params, config.restriction, config.cost_table, config.coupling,
                      threads=config.threads if threads is None else threads)


def write_synth_artifacts(result, out_dir):
    ensure_dir(out_dir)
    circuit_path = os.path.join(out_dir, defaults.synth_circuit_file)
    report_path = os.path.join(out_dir, defaults.synth_report_file)
    with open(circuit_path, 'w', encoding='utf-8') as f:
        f.write(f"# {result.function}: err={float(result.err):.6f} qc={result.qc} cc={result.cc} "
                f"seed={result.params.master_seed}\n")
        f.write(serialize(result.circuit))
    with open(report_path, 'w', encoding='utf-8') as f:
        f.write(result.to_json())
    print_green(f'Wrote {circuit_path} and {report_path}')
    return circuit_path, report_path


def evaluate_circuit(circuit, f, table=None, coupling=None, weights=None):
    if circuit.line_count < max(f.n, f.m):
        raise CircuitError(f"circuit with {circuit.line_count} lines cannot embed '{f.name}' "
                           f"({f.n} inputs, {f.m} outputs)")
    data = {'function': f.name, 'report': exhaustive_report(circuit, f, weights).to_dict()}
    data.update(cost_report(circuit, table, coupling))
    return data


def summary_table(data):
    table = PrettyTable(['Field', 'Value'])
    table.align['Field'] = 'l'
    table.align['Value'] = 'r'
    for key, value in data.items():
        if isinstance(value, dict):
            for inner, v in value.items():
                table.add_row([f'{key}.{inner}', v])
        else:
            table.add_row([key, value])
    return table


# Gate-count sweep
# =====================================================================

@dataclass
class GateRow:
    d: int
    run: int
    seed: int
    err: float
    qc: int
    cc: object
    constant: bool
    gates_after_pruning: int
    # Optional metric columns (per-bit errors, noisy errors), in header order
    metrics: dict = field(default_factory=dict)

    def value(self, metric):
        return self.err if metric == 'err' else self.metrics.get(metric)

    def to_row(self):
        row = [self.d, self.run, self.seed, repr(self.err), self.qc,
               '' if self.cc is None else self.cc, int(self.constant), self.gates_after_pruning]
        return row + ['' if v is None else repr(v) for v in self.metrics.values()]


@dataclass(frozen=True)
class CurvePoint:
    qc: int
    median: float
    minimum: float
    maximum: float
    count: int

    def to_row(self):
        return [self.qc, repr(self.median), repr(self.minimum), repr(self.maximum), self.count]


def metric_columns(f, noise_scales=()):
    """Extra gate-sweep columns for ``f``: bit-weighted errors and one noisy block per scale."""
    columns = ['uniform_error', 'weighted_error'] if f.m > 1 else []
    for scale in noise_scales:
        columns += [f'noisy_error@{scale:g}', f'noisy_stderr@{scale:g}']
        if f.m > 1:
            columns.append(f'noisy_weighted@{scale:g}')
    return columns


def curve_metrics(columns):
    return ['err'] + [c for c in columns if not c.startswith('noisy_stderr')]


def curve_path(out_dir, metric):
    if metric == 'err':
        return os.path.join(out_dir, defaults.gates_curve_file)
    stem, ext = os.path.splitext(defaults.gates_curve_file)
    return os.path.join(out_dir, f"{stem}_{metric.replace('@', '_')}{ext}")


def _row_metrics(pruned, f, config, seed):
    metrics = {}
    if f.m > 1:
        metrics['uniform_error'] = float(multi_output_error(pruned, f, uniform_weights(f.m)))
        metrics['weighted_error'] = float(multi_output_error(pruned, f, exponential_weights(f.m)))
    fits = pruned.line_count <= config.coupling.qubits
    primitive = decompose(pruned, config.coupling) if fits and config.noise_scales else None
    for scale in config.noise_scales:
        error = stderr = weighted = None
        if fits:
            noise = config.noise.scaled(scale)
            estimate = noisy_error_rate(pruned, f, noise, config.trials, config.coupling, seed,
                                        primitive=primitive)
            error, stderr = estimate.error_rate, estimate.stderr
            if f.m > 1:
                weighted = noisy_error_rate(pruned, f, noise, config.trials, config.coupling, seed,
                                            weights=exponential_weights(f.m), primitive=primitive).error_rate
        metrics[f'noisy_error@{scale:g}'] = error
        metrics[f'noisy_stderr@{scale:g}'] = stderr
        if f.m > 1:
            metrics[f'noisy_weighted@{scale:g}'] = weighted
    return metrics


def gate_row(result, f, d, run, config):
    pruned = remove_unused_gates(result.circuit, f.m)
    report = exhaustive_report(pruned, f)
    cc = None
    if pruned.line_count <= config.coupling.qubits:
        cc = circuit_cost(pruned, config.coupling)
    seed = result.params.master_seed
    return GateRow(d, run, seed, float(report.err), quantum_cost(pruned, config.cost_table),
                   cc, report.constant, len(pruned), _row_metrics(pruned, f, config, seed))


def _sweep_task(config, f, d, run):
    seed = config.seed + run
    try:
        return gate_row(run_synthesis(config, f, d=d, seed=seed, threads=1), f, d, run, config)
    except Error as e:
        NonCriticalError(str(e), f'{f.name}/d={d}/run={run}')
        return None


def sweep_gates(config, f, out_dir=None):
    """R seeded runs per gate count, a raw row per run and a curve per metric."""
    if not config.gate_counts:
        raise CircuitError("gate-count sweep needs a non-empty gate_counts list")
    out_dir = ensure_dir(out_dir or config.output)
    raw_path = os.path.join(out_dir, defaults.gates_raw_file)
    grid = list(itertools.product(config.gate_counts, range(config.repetitions)))
    columns = metric_columns(f, config.noise_scales)
    logger.info(f'Gate sweep of {f.name}: d in {config.gate_counts}, {config.repetitions} runs each, '
                f'{config.threads} worker(s)')

    rows = []
    with open(raw_path, 'w', encoding='utf-8', newline='') as raw_file:
        writer = csv.writer(raw_file)
        writer.writerow(defaults.gates_raw_header + columns)
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            # map yields in submission order
            for row in pool.map(lambda task: _sweep_task(config, f, *task), grid):
                if row is None:
                    continue
                writer.writerow(row.to_row())
                raw_file.flush()
                rows.append(row)

    curves = {metric: curve_points(rows, config.exclude_constant, metric) for metric in curve_metrics(columns)}
    for metric, metric_points in curves.items():
        write_curve(metric_points, curve_path(out_dir, metric))
    print_green(f'Wrote {raw_path} ({len(rows)} rows) and {len(curves)} curve file(s) '
                f'({len(curves["err"])} points)')
    return rows, curves['err']


def curve_points(rows, exclude_constant=False, metric='err'):
    buckets = {}
    for row in rows:
        value = row.value(metric)
        if value is None or (exclude_constant and row.constant):
            continue
        buckets.setdefault(int(row.qc), []).append(float(value))
    points = []
    for qc in sorted(buckets):
        errors = np.array(buckets[qc])
        points.append(CurvePoint(qc, float(np.median(errors)), float(errors.min()), float(errors.max()),
                                 len(errors)))
    return points


def write_curve(points, path):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f)
        writer.writerow(defaults.gates_curve_header)
        for point in points:
            writer.writerow(point.to_row())
    return path


def read_gate_rows(path):
    base = defaults.gates_raw_header
    with open(path, 'r', encoding='utf-8', newline='') as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or reader.fieldnames[:len(base)] != base:
            raise CircuitError(f"'{path}' does not carry the gate-sweep header", path)
        columns = reader.fieldnames[len(base):]
        return [GateRow(int(r['d']), int(r['run']), int(r['seed']), float(r['err']), int(r['qc']),
                        int(r['cc']) if r['cc'] else None, bool(int(r['constant'])),
                        int(r['gates_after_pruning']),
                        {c: float(r[c]) if r[c] else None for c in columns}) for r in reader]


def curve_from_csv(path, exclude_constant=False, metric='err'):
    return curve_points(read_gate_rows(path), exclude_constant, metric)



def curve_table(points):
    table = PrettyTable(['qc', 'median', 'min', 'max', 'count'])
    for p in points:
        table.add_row([p.qc, f'{p.median:.4f}', f'{p.minimum:.4f}', f'{p.maximum:.4f}', p.count])
    return table


# Noise sweep
# =====================================================================

def sweep_noise(config, f, circuits, ids=None, out_dir=None):
    """Noise sweep CSV plus the crossover scale of every pair with distinct qc."""
    out_dir = ensure_dir(out_dir or config.output)
    ids = ids or [f'c{i}' for i in range(len(circuits))]
    rows = noise_sweep(circuits, f, config.noise, config.scales, config.trials, config.coupling,
                       config.seed, ids=ids, threads=config.threads, table=config.cost_table)

    noise_path = os.path.join(out_dir, defaults.noise_file)
    with open(noise_path, 'w', encoding='utf-8', newline='') as out:
        writer = csv.writer(out)
        writer.writerow(defaults.noise_header)
        for row in rows:
            writer.writerow(row.to_row())

    qc = {row.circuit_id: row.qc for row in rows}
    crossovers = []
    for a, b in itertools.combinations(ids, 2):
        if qc[a] == qc[b]:
            continue
        cheap, expensive = (a, b) if qc[a] < qc[b] else (b, a)
        crossovers.append((cheap, expensive, crossover(rows, cheap, expensive)))

    crossover_path = os.path.join(out_dir, defaults.noise_crossover_file)
    with open(crossover_path, 'w', encoding='utf-8', newline='') as out:
        writer = csv.writer(out)
        writer.writerow(defaults.crossover_header)
        for cheap, expensive, scale in crossovers:
            writer.writerow([cheap, expensive, '' if scale is None else repr(scale)])
    print_green(f'Wrote {noise_path} and {crossover_path}')
    return rows, crossovers


def noise_table(rows):
    table = PrettyTable(['circuit', 'qc', 'cc', 'lambda', 'error', 'stderr'])
    for row in rows:
        table.add_row([row.circuit_id, row.qc, row.cc, row.scale, f'{row.estimate.error_rate:.4f}',
                       f'{row.estimate.stderr:.4f}'])
    return table


def dump_json(data):
    return json.dumps(data, indent=2, sort_keys=True) + '\n'
