#!/usr/bin/env python3
import argparse
import logging
import os
import sys
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path

from pydantic import ValidationError

import fresco.input_output as io
from fresco.experiments import cmd_optimize, cmd_pareto, cmd_simulate, cmd_sweep
from fresco.models.basic_functions import FrescoError, InfeasibleError
from fresco.parameters import Command
from fresco.verification import CHECKS, cmd_verify

OUTPUT_DIR = os.path.join(os.getcwd(), 'output')

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2

COMMANDS = {
    Command.OPTIMIZE: cmd_optimize,
    Command.SWEEP: cmd_sweep,
    Command.SIMULATE: cmd_simulate,
    Command.VERIFY: cmd_verify,
    Command.PARETO: cmd_pareto,
}

COMMAND_HELP = {
    Command.OPTIMIZE: 'optimal windows for one scenario',
    Command.SWEEP: 'optimal windows, fairness and age over a range of average velocities',
    Command.SIMULATE: 'simulate channel access under optimal and standard windows',
    Command.VERIFY: 'check the analytic models against independent references',
    Command.PARETO: 'the non-dominated set of one scenario',
}


def add_common_arguments(parser):
    parser.add_argument('--config', type=Path, help='TOML experiment file')
    parser.add_argument('--output', type=Path, help='result file')
    parser.add_argument('--format', choices=['csv', 'json'], help='result format')
    parser.add_argument('--seed', type=int, help='master seed')
    parser.add_argument('--lanes', type=float, nargs='+', metavar='V',
                        help='lane velocities in m/s')
    parser.add_argument('--population', type=int, help='particles in the swarm')
    parser.add_argument('--iterations', type=int, help='swarm iterations')
    parser.add_argument('--stochastic-pso', action='store_true',
                        help='draw random factors for the acceleration terms')
    parser.add_argument('--warm-start', action='store_true',
                        help='start one particle at the fair windows')
    parser.add_argument('--inertia-schedule', choices=['constant', 'exponential'])
    parser.add_argument('--grid-mode', choices=['eq49', 'meshdiv'],
                        help='archive grid resolution: archive size or mesh_div')
    parser.add_argument('-v', '--verbose', action='count', default=0)

def get_parser():
    parser = argparse.ArgumentParser(
        prog='run_fresco',
        description='Fair and fresh contention windows for platooning vehicles.')
    subparsers = parser.add_subparsers(dest='command', required=True)
    for command in Command:
        sub = subparsers.add_parser(command.value, help=COMMAND_HELP[command])
        add_common_arguments(sub)
        if command is Command.OPTIMIZE:
            sub.add_argument('--archive', action='store_true',
                             help='also write the full archive')
        if command is Command.SWEEP:
            sub.add_argument('--vbar-min', type=float)
            sub.add_argument('--vbar-max', type=float)
            sub.add_argument('--vbar-step', type=float)
            sub.add_argument('--gap', type=float, help='velocity gap between lanes')
            sub.add_argument('--arrival-fraction', type=float, action='append',
                             help='arrival rate as a fraction of the maximum; repeatable')
            sub.add_argument('--workers', type=int)
        if command is Command.SIMULATE:
            sub.add_argument('--slots', type=int, help='simulated slots per run')
            sub.add_argument('--backoff', choices=['uniform', 'geometric'])
            sub.add_argument('--windows', type=int, nargs='+', metavar='W0',
                             help='simulate these windows instead of optimizing')
        if command is Command.VERIFY:
            sub.add_argument('--perturb', choices=list(CHECKS),
                             help='bias one check so that it must fail')
    return parser

def get_overrides(args):
    """Command-line values, shaped like the config file."""
    overrides = {'command': args.command}
    top = {'output': args.output, 'format': args.format, 'seed': args.seed,
           'workers': getattr(args, 'workers', None),
           'perturb': getattr(args, 'perturb', None)}
    overrides.update({k: v for k, v in top.items() if v is not None})
    if getattr(args, 'archive', False):
        overrides['emit_archive'] = True
    if args.lanes:
        overrides['lanes'] = [{'velocity': v} for v in args.lanes]
        overrides['lane_count'] = len(args.lanes)

    swarm = {'population': args.population, 'iterations': args.iterations,
             'seed': args.seed, 'inertia_schedule': args.inertia_schedule,
             'grid_mode': args.grid_mode}
    swarm = {k: v for k, v in swarm.items() if v is not None}
    if args.stochastic_pso:
        swarm['stochastic_coefficients'] = True
    if args.warm_start:
        swarm['warm_start'] = True
    if swarm:
        overrides['swarm'] = swarm

    sweep = {'vbar_min': getattr(args, 'vbar_min', None),
             'vbar_max': getattr(args, 'vbar_max', None),
             'vbar_step': getattr(args, 'vbar_step', None),
             'gap': getattr(args, 'gap', None),
             'arrival_fractions': getattr(args, 'arrival_fraction', None)}
    sweep = {k: v for k, v in sweep.items() if v is not None}
    if sweep:
        overrides['sweep'] = sweep

    sim = {'slots': getattr(args, 'slots', None), 'backoff': getattr(args, 'backoff', None),
           'windows': getattr(args, 'windows', None)}
    sim = {k: v for k, v in sim.items() if v is not None}
    if sim:
        overrides['sim'] = sim
    return overrides

def print_validation_error(err):
    for error in err.errors():
        location = '.'.join(str(part) for part in error['loc']) or 'config'
        print(f'{location}: {error["msg"]}', file=sys.stderr)

def default_output(spec):
    if not os.path.exists(OUTPUT_DIR):
        os.mkdir(OUTPUT_DIR)
    return Path(OUTPUT_DIR) / f'{spec.command.value}.{spec.format.value}'

def write_outputs(report, spec):
    output = spec.output if spec.output is not None else default_output(spec)
    output.parent.mkdir(parents=True, exist_ok=True)
    spec = spec.model_copy(update={'output': output})
    io.write_report(report.table, spec)
    print(f'File {output} written.')
    for name, table in report.extra.items():
        extra = output.with_name(f'{output.stem}_{name}{output.suffix}')
        io.write_report(table, spec.model_copy(update={'output': extra}))
        print(f'File {extra} written.')

def main(argv=None):
    args = get_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s')

    try:
        spec = io.load_experiment(args.config, get_overrides(args))
    except ValidationError as err:
        print_validation_error(err)
        return EXIT_CONFIG
    except (OSError, tomllib.TOMLDecodeError) as err:
        print(f'config: {err}', file=sys.stderr)
        return EXIT_CONFIG

    try:
        report = COMMANDS[spec.command](spec)
    except InfeasibleError as err:
        print(f'infeasible: {err} (best violation {err.best_violation})', file=sys.stderr)
        return EXIT_FAILED
    except FrescoError as err:
        print(f'error: {err}', file=sys.stderr)
        return EXIT_FAILED

    for line in report.summary:
        print(line)
    write_outputs(report, spec)
    return EXIT_OK if report.passed else EXIT_FAILED

if __name__ == '__main__':
    sys.exit(main())
