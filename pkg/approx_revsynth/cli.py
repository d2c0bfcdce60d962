import argparse
import json
import os
import sys
from dataclasses import replace

from approx_revsynth.circuit import to_real
from approx_revsynth.color_printer import print_result
from approx_revsynth.config import ExperimentConfig, load_config
from approx_revsynth.cost import CouplingMap, cost_report
from approx_revsynth.error_handling import print_errors
from approx_revsynth.errors import CircuitError, ConfigError, Error, ParseError
from approx_revsynth.experiments import (curve_table, dump_json, ensure_dir, evaluate_circuit, load_circuit,
                                         noise_table, run_synthesis, summary_table, sweep_gates, sweep_noise,
                                         write_synth_artifacts)
from approx_revsynth.log import logger
from approx_revsynth.metrics import exponential_weights
from approx_revsynth.oracles import dump_truth_table
from approx_revsynth.restrictions import from_spec
from approx_revsynth.synthesis import measure_throughput

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 2, 3


def add_common_arguments(parser, default=None):
    parser.add_argument('--config', default=default, help='YAML/JSON experiment config')
    parser.add_argument('--preset', default=default, help='built-in EA parameter set (xor5, 4mod5, 5mod5, ...)')
    parser.add_argument('--replay', default=default, help='report.json to rerun with its seed')
    parser.add_argument('--seed', type=int, default=default, help='master seed')
    parser.add_argument('--threads', type=int, default=default, help='worker threads')
    parser.add_argument('--out', default=default, help='output directory')
    parser.add_argument('--function', default=default, help='built-in function name')
    parser.add_argument('--truth-table', default=default, help='truth-table file')


def build_parser():
    # Flags are accepted before or after the subcommand; a flag after it wins
    common = argparse.ArgumentParser(add_help=False)
    add_common_arguments(common, default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog='revsynth',
                                     description='Approximate reversible circuit synthesis and evaluation')
    add_common_arguments(parser)
    sub = parser.add_subparsers(dest='command', required=True)

    synth = sub.add_parser('synth', parents=[common], help='run the evolutionary synthesis')
    synth.add_argument('--gates', type=int, help='gate count d')

    evaluate = sub.add_parser('eval', parents=[common], help='exhaustive error report and costs')
    evaluate.add_argument('circuit')
    evaluate.add_argument('--weights', choices=['exponential', 'exponential-little'],
                          help='weighted multi-output error')

    cost = sub.add_parser('cost', parents=[common], help='qc and cc of a circuit')
    cost.add_argument('circuit')
    cost.add_argument('--coupling', help='coupling-map file (default: bundled Melbourne ladder)')

    gates = sub.add_parser('sweep-gates', parents=[common], help='R runs per gate count and the qc curve')
    gates.add_argument('--gate-counts', type=int, nargs='+')
    gates.add_argument('--repetitions', type=int)
    gates.add_argument('--noise-scales', type=float, nargs='+', help='noisy error columns at these noise scales')
    gates.add_argument('--trials', type=int)
    gates.add_argument('--exclude-constant', action='store_true', default=None)

    noise = sub.add_parser('sweep-noise', parents=[common], help='noisy error against noise scale')
    noise.add_argument('circuits', nargs='*')
    noise.add_argument('--scales', type=float, nargs='+')
    noise.add_argument('--trials', type=int)

    real = sub.add_parser('export-real', parents=[common], help='convert a circuit to RevLib .real')
    real.add_argument('circuit')
    real.add_argument('--inputs', type=int)
    real.add_argument('--outputs', type=int)

    sub.add_parser('tt', parents=[common], help='print the truth table of a function')

    bench = sub.add_parser('bench', parents=[common], help='gate-application throughput')
    bench.add_argument('--repeats', type=int, default=5)
    return parser


def load_experiment(args):
    if args.config:
        config = load_config(args.config)
    elif args.preset:
        config = ExperimentConfig.from_preset(args.preset)
    else:
        config = ExperimentConfig()
    if args.config and args.preset:
        config = config.with_overrides(ea=ExperimentConfig.from_preset(args.preset).ea)
    if args.replay:
        config = replay_config(config, args.replay)
    overrides = {
        'seed': args.seed,
        'threads': args.threads,
        'output': args.out,
        'function': args.function,
        'truth_table': args.truth_table,
        'gate_counts': getattr(args, 'gate_counts', None),
        'repetitions': getattr(args, 'repetitions', None),
        'exclude_constant': getattr(args, 'exclude_constant', None),
        'scales': getattr(args, 'scales', None),
        'noise_scales': getattr(args, 'noise_scales', None),
        'trials': getattr(args, 'trials', None),
    }
    config = config.with_overrides(**overrides)
    if args.function and not args.truth_table:
        # A named function replaces a truth table from the config file
        config = replace(config, truth_table=None)
    return config


def replay_config(config, path):
    try:
        with open(path, 'r', encoding='utf-8') as f:
            report = json.load(f)
        params = dict(report['params'])
        function = report['function']
    except (OSError, ValueError, KeyError) as e:
        raise ConfigError(f"cannot replay '{path}': {e}", path)
    seed = params.pop('master_seed')
    return config.with_overrides(function=function, ea=params, seed=seed,
                                 restriction=from_spec(report.get('restriction')))


def cmd_synth(args, config):
    f = config.load_function()
    result = run_synthesis(config, f, d=args.gates)
    write_synth_artifacts(result, ensure_dir(config.output))
    logger.info(f'\n{summary_table(result.report.to_dict())}')
    print_result(f'{f.name} d={len(result.circuit)}', result.err, result.qc, result.cc)


def cmd_eval(args, config):
    f = config.load_function()
    circuit = load_circuit(args.circuit)
    weights = exponential_weights(f.m, 'little' if args.weights == 'exponential-little' else 'big') \
        if args.weights else None
    data = evaluate_circuit(circuit, f, config.cost_table, config.coupling, weights)
    write_output(config, 'eval.json', dump_json(data))
    logger.info(f'\n{summary_table(data)}')
    print_result(f.name, data['report']['err'], data['qc'], data['cc'])


def cmd_cost(args, config):
    circuit = load_circuit(args.circuit)
    coupling = CouplingMap.load(args.coupling) if args.coupling else config.coupling
    data = cost_report(circuit, config.cost_table, coupling)
    write_output(config, 'cost.json', dump_json(data))
    logger.info(f'\n{summary_table(data)}')


def cmd_sweep_gates(args, config):
    f = config.load_function()
    _, points = sweep_gates(config, f)
    logger.info(f'\n{curve_table(points)}')


def cmd_sweep_noise(args, config):
    f = config.load_function()
    paths = args.circuits or config.circuits
    if not paths:
        raise ConfigError("sweep-noise needs circuit files (arguments or 'circuits' in the config)")
    if not config.scales:
        raise ConfigError("sweep-noise needs noise scales (--scales or sweep.scales)")
    circuits = [load_circuit(p) for p in paths]
    ids = [os.path.splitext(os.path.basename(p))[0] for p in paths]
    if len(set(ids)) != len(ids):
        ids = [f'{i}:{name}' for i, name in enumerate(ids)]
    rows, crossovers = sweep_noise(config, f, circuits, ids)
    logger.info(f'\n{noise_table(rows)}')
    for cheap, expensive, scale in crossovers:
        found = "none on this grid" if scale is None else f"lambda = {scale:.4g}"
        logger.info(f"Crossover {cheap} vs {expensive}: {found}")


def cmd_export_real(args, config):
    circuit = load_circuit(args.circuit)
    name = os.path.splitext(os.path.basename(args.circuit))[0] + '.real'
    write_output(config, name, to_real(circuit, args.inputs, args.outputs))


def cmd_tt(args, config):
    f = config.load_function()
    write_output(config, f'{f.name}.tt', dump_truth_table(f))


def cmd_bench(args, config):
    rate = measure_throughput(repeats=args.repeats, seed=config.seed)
    write_output(config, 'bench.json', dump_json({'gate_ops_per_second': rate}))


def write_output(config, name, text):
    if config.output and config.output != '.':
        path = os.path.join(ensure_dir(config.output), name)
        with open(path, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info(f'Wrote {path}')
        return path
    sys.stdout.write(text)
    return None


COMMANDS = {
    'synth': cmd_synth,
    'eval': cmd_eval,
    'cost': cmd_cost,
    'sweep-gates': cmd_sweep_gates,
    'sweep-noise': cmd_sweep_noise,
    'export-real': cmd_export_real,
    'tt': cmd_tt,
    'bench': cmd_bench,
}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = load_experiment(args)
        COMMANDS[args.command](args, config)
    except (ConfigError, ParseError, CircuitError):
        return EXIT_USAGE
    except Error:
        return EXIT_RUNTIME
    except OSError as e:
        Error(f"I/O failure: {e}")
        return EXIT_RUNTIME
    except Exception:
        logger.exception('Unexpected failure')
        return EXIT_RUNTIME
    finally:
        if args.command in ('sweep-gates', 'sweep-noise'):
            print_errors()
    return EXIT_OK


if __name__ == '__main__':
    sys.exit(main())
