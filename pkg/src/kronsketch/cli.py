"""
Command line harness: ``kronsketch {exp1,exp2,bounds,lsq,sketch,idx}``.

Experiment options come from, in increasing priority: built-in defaults, a ``--config`` file of ``key=value`` lines
(keys like the long flags, dashes or underscores), and the flags themselves. Results go to ``--out`` or stdout as
CSV; progress and diagnostics go to stderr. All indices printed are 0-based.

Exit status: 0 on success, 2 for invalid input or a failed precondition, 1 for I/O errors.
"""
import argparse
import contextlib
import csv
import sys
import warnings

import numpy as np

from . import __version__
from .bounds import bound_rows
from .config import read_config_file
from .const import DISTRIBUTIONS
from .const import LOG_BASES
from .const import LSQ_COLUMNS
from .const import SKETCH_KINDS
from .const import STRUCTURED_KINDS
from .core import KrMatrix
from .cp import cp_als
from .cp import random_cp
from .cp import read_cp
from .cp import write_cp
from .experiments import ExperimentConfig
from .experiments import gen_input
from .experiments import parse_shape
from .experiments import run_experiment1
from .experiments import run_experiment2
from .experiments import write_stats_csv
from .ingest import load_digit_tensors
from .ingest import read_idx
from .regress import LsProblem
from .regress import solve_sketched
from .report import ColorStream
from .sketch import SketchRankError
from .sketch import make_sketch
from .util import derive_seed
from .util import make_rng

EXP1_DEFAULTS = dict(shape=(16, 16, 16), jgrid='100:1000:100', trials=1000, kinds=SKETCH_KINDS)
EXP2_DEFAULTS = dict(shape=(8, 8, 20), jgrid='100:5000:100', trials=100, kinds=STRUCTURED_KINDS, rank=3)


def float_list(value):
    try:
        return tuple(float(part) for part in value.split(',') if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated numbers, got {!r}'.format(value))


def int_list(value):
    try:
        return tuple(int(part) for part in value.replace('x', ',').split(',') if part.strip())
    except ValueError:
        raise argparse.ArgumentTypeError('expected comma separated integers, got {!r}'.format(value))


def add_experiment_arguments(subparser):
    subparser.add_argument('--config', metavar='PATH',
                           help='File of key=value lines with defaults for the options below.')
    subparser.add_argument('--shape', metavar='I1,I2,...', help='Mode sizes.')
    subparser.add_argument('--rank', type=int, metavar='R', help='CP rank (exp2).')
    subparser.add_argument('--dist', choices=DISTRIBUTIONS, help='Input distribution (exp1).')
    subparser.add_argument('--kinds', metavar='KINDS', help='Comma separated sketch kinds, or "all".')
    subparser.add_argument('--jgrid', metavar='GRID', help='Sketch sizes as start:stop:step or a comma list.')
    subparser.add_argument('--trials', type=int, metavar='N', help='Trials per (kind, J).')
    subparser.add_argument('--seed', type=int, metavar='SEED', help='Master seed.')
    subparser.add_argument('--replacement', action='store_const', const=True,
                           help='KFJLT samples rows with replacement.')
    subparser.add_argument('--jobs', type=int, metavar='N', help='Worker threads.')
    subparser.add_argument('--no-timing', dest='timing', action='store_const', const=False,
                           help='Write wallclock_ms as 0 so the CSV is byte-reproducible.')
    subparser.add_argument('--out', metavar='PATH', help='CSV output (default: stdout).')
    subparser.add_argument('--trials-out', metavar='PATH', help='Per-trial CSV log.')


parser = argparse.ArgumentParser(prog='kronsketch',
                                 description='Sketch Kronecker vectors and Khatri-Rao matrices, and benchmark the '
                                             'sketches.')
parser.add_argument('--version', action='version', version='%(prog)s {}'.format(__version__))
parser.add_argument('--force-colors', action='store_true', help='Color diagnostics even when stderr is not a TTY.')
subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
subparsers.required = True

exp1_parser = subparsers.add_parser('exp1', help='Distortion on pairs of random Kronecker vectors.')
add_experiment_arguments(exp1_parser)

exp2_parser = subparsers.add_parser('exp2', help='Distortion of the sketched distance between two CP tensors.')
add_experiment_arguments(exp2_parser)
exp2_parser.add_argument('--force-gaussian', action='store_const', const=True,
                         help='Include the dense Gaussian baseline.')
exp2_parser.add_argument('--cp-a', metavar='DIR', help='First CP tensor (factor_<p>.bin files).')
exp2_parser.add_argument('--cp-b', metavar='DIR', help='Second CP tensor.')
exp2_parser.add_argument('--images', metavar='PATH', help='IDX image file; fit CP tensors to two digit classes.')
exp2_parser.add_argument('--labels', metavar='PATH', help='IDX label file matching --images.')
exp2_parser.add_argument('--digits', type=int_list, default=(4, 9), metavar='A,B', help='Digit classes. Default: 4,9.')
exp2_parser.add_argument('--count', type=int, default=100, metavar='N', help='Images per class. Default: 100.')
exp2_parser.add_argument('--als-iters', type=int, default=50, metavar='N', help='CP-ALS sweeps. Default: 50.')
exp2_parser.add_argument('--cp-out', metavar='DIR', help='Save fitted CP tensors under DIR/a and DIR/b.')

bounds_parser = subparsers.add_parser('bounds', help='Embedding dimension bounds over an eps x delta sweep.')
bounds_parser.add_argument('--dims', type=int_list, default=(16, 16, 16), metavar='I1,I2,...',
                           help='Mode sizes. Default: 16,16,16.')
bounds_parser.add_argument('--rank', type=int, default=1, metavar='R', help='Khatri-Rao columns. Default: 1.')
bounds_parser.add_argument('--N', type=int, default=2, metavar='N', help='Number of vectors. Default: 2.')
bounds_parser.add_argument('--eps', type=float_list, default=(0.5, 0.25, 0.125), metavar='E1,E2,...',
                           help='Distortions. Default: 0.5,0.25,0.125.')
bounds_parser.add_argument('--delta', type=float_list, default=(0.01,), metavar='D1,D2,...',
                           help='Failure probabilities. Default: 0.01.')
bounds_parser.add_argument('--C', type=float, default=1.0, help='Constant of the comparison bound. Default: 1.')
bounds_parser.add_argument('--C1', type=float, default=1.0, help='Constant C1 of the simplified bound. Default: 1.')
bounds_parser.add_argument('--C2', type=float, default=1.0, help='Constant C2 of the simplified bound. Default: 1.')
bounds_parser.add_argument('--log-base', choices=LOG_BASES, default=None,
                           help='Base of "log" in the asymptotic bounds. Default: e.')
bounds_parser.add_argument('--out', metavar='PATH', help='CSV output (default: stdout).')

lsq_parser = subparsers.add_parser('lsq', help='Sketched least squares on random Khatri-Rao designs.')
lsq_parser.add_argument('--shape', type=parse_shape, default=(16, 16, 16), metavar='I1,I2,...')
lsq_parser.add_argument('--rank', type=int, default=5, metavar='R', help='Design columns. Default: 5.')
lsq_parser.add_argument('--kind', choices=SKETCH_KINDS, default='kfjlt')
lsq_parser.add_argument('--J', type=int, default=2048, metavar='J', help='Sketch size. Default: 2048.')
lsq_parser.add_argument('--trials', type=int, default=100, metavar='N', help='Number of problems. Default: 100.')
lsq_parser.add_argument('--seed', type=int, default=0, metavar='SEED')
lsq_parser.add_argument('--replacement', action='store_true', help='KFJLT samples rows with replacement.')
lsq_parser.add_argument('--audit', action='store_true', help='Also report the two near-optimality quantities.')
lsq_parser.add_argument('--out', metavar='PATH', help='CSV output (default: stdout).')

sketch_parser = subparsers.add_parser('sketch', help='Apply one sketch to one Kronecker vector.')
sketch_parser.add_argument('--kind', choices=SKETCH_KINDS, default='kfjlt')
sketch_parser.add_argument('--shape', type=parse_shape, default=(16, 16, 16), metavar='I1,I2,...')
sketch_parser.add_argument('--J', type=int, default=100, metavar='J')
sketch_parser.add_argument('--seed', type=int, default=0, metavar='SEED', help='Operator seed.')
sketch_parser.add_argument('--dist', choices=DISTRIBUTIONS, default='normal', help='Distribution of the input.')
sketch_parser.add_argument('--input-seed', type=int, default=0, metavar='SEED')
sketch_parser.add_argument('--replacement', action='store_true')
sketch_parser.add_argument('--out', metavar='PATH', help='CSV output (default: stdout).')

idx_parser = subparsers.add_parser('idx', help='Inspect IDX files or build digit tensors from them.')
idx_subparsers = idx_parser.add_subparsers(dest='idx_command', metavar='ACTION')
idx_subparsers.required = True
idx_inspect_parser = idx_subparsers.add_parser('inspect', help='Print the header of an IDX file.')
idx_inspect_parser.add_argument('path', metavar='PATH')
idx_convert_parser = idx_subparsers.add_parser('convert', help='Write the padded tensor of one digit as .npy.')
idx_convert_parser.add_argument('--images', required=True, metavar='PATH')
idx_convert_parser.add_argument('--labels', required=True, metavar='PATH')
idx_convert_parser.add_argument('--digit', type=int, required=True)
idx_convert_parser.add_argument('--count', type=int, default=100, metavar='N')
idx_convert_parser.add_argument('--out', required=True, metavar='PATH', help='Destination .npy file.')


@contextlib.contextmanager
def output_file(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, 'w', newline='') as fh:
            yield fh


def experiment_config(args, defaults):
    options = dict(defaults)
    if args.config:
        options.update(read_config_file(args.config))
    for key in ExperimentConfig.OPTIONS:
        value = getattr(args, key, None)
        if value is not None:
            options[key] = value
    return ExperimentConfig.from_options(options)


def _run_experiment(cfg, runner, reporter):
    with output_file(cfg.out) as fh:
        if cfg.trials_out:
            with output_file(cfg.trials_out) as log:
                results = runner(cfg, reporter, log)
        else:
            results = runner(cfg, reporter, None)
        write_stats_csv(results, fh)
    return results


def cmd_exp1(args, reporter):
    cfg = experiment_config(args, EXP1_DEFAULTS)
    reporter.info('exp1 {!r}', cfg)
    _run_experiment(cfg, run_experiment1, reporter)


def load_cp_pair(args, cfg, reporter):
    if args.cp_a or args.cp_b:
        if not (args.cp_a and args.cp_b):
            raise ValueError('--cp-a and --cp-b must be given together.')
        return read_cp(args.cp_a), read_cp(args.cp_b)
    if args.images or args.labels:
        if not (args.images and args.labels):
            raise ValueError('--images and --labels must be given together.')
        if len(args.digits) != 2:
            raise ValueError('--digits needs exactly two classes, got {!r}.'.format(args.digits))
        tensors = load_digit_tensors(args.images, args.labels, args.digits, args.count)
        pair = []
        for tag, digit, tensor in zip('ab', args.digits, tensors):
            reporter.info('fitting rank {} CP to digit {} tensor of shape {}', cfg.rank, digit, tensor.shape)
            fitted = cp_als(tensor, cfg.rank, iters=args.als_iters, seed=derive_seed(cfg.seed, 'cp-' + tag, 0, 0))
            pair.append(fitted)
            if args.cp_out:
                write_cp('{}/{}'.format(args.cp_out, tag), fitted)
        return tuple(pair)
    reporter.info('using synthetic rank {} CP tensors of shape {}', cfg.rank, cfg.shape)
    return (
        random_cp(cfg.shape, cfg.rank, seed=derive_seed(cfg.seed, 'cp-a', 0, 0)),
        random_cp(cfg.shape, cfg.rank, seed=derive_seed(cfg.seed, 'cp-b', 0, 0)),
    )


def cmd_exp2(args, reporter):
    cfg = experiment_config(args, EXP2_DEFAULTS)
    cp_a, cp_b = load_cp_pair(args, cfg, reporter)
    reporter.info('exp2 {!r}', cfg)
    _run_experiment(cfg, lambda cfg, reporter, log: run_experiment2(cfg, cp_a, cp_b, reporter, log), reporter)


def _cell(value):
    return '' if value is None else repr(value)


def cmd_bounds(args, reporter):
    columns = ('eps', 'delta', 'subspace', 'jlt', 'simplified', 'jin', 'combined', 'beta')
    options = {}
    if args.log_base is not None:
        options['log_base'] = args.log_base
    rows = bound_rows(args.dims, args.rank, args.N, args.eps, args.delta, C=args.C, C1=args.C1, C2=args.C2,
                      **options)
    with output_file(args.out) as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[column]) for column in columns])


def cmd_lsq(args, reporter):
    good = 0
    with output_file(args.out) as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(LSQ_COLUMNS)
        for trial in range(args.trials):
            rng = make_rng(derive_seed(args.seed, 'design', args.J, trial))
            design = KrMatrix([rng.standard_normal((n, args.rank)) for n in args.shape])
            problem = LsProblem(design, rng.standard_normal(design.size))
            seed = derive_seed(args.seed, args.kind, args.J, trial)
            options = {'replacement': True} if args.kind == 'kfjlt' and args.replacement else {}
            if args.kind == 'sampling':
                options['design'] = design
            operator = make_sketch(args.kind, args.shape, args.J, seed, **options)
            try:
                report = solve_sketched(problem, operator, audit=args.audit)
            except SketchRankError as exc:
                reporter.warn('trial {}: {}', trial, exc)
                continue
            if report.ratio is not None and report.ratio <= 1.5:
                good += 1
            writer.writerow([args.kind, args.J, seed, repr(report.residual), repr(report.sketched_residual),
                             _cell(report.opt), _cell(report.ratio), _cell(report.sigma2_min),
                             _cell(report.perp_ratio)])
    reporter.info('{OK}{}/{}{RESET} problems within 1.5x of the optimal residual', good, args.trials)


def cmd_sketch(args, reporter):
    vector = gen_input(args.dist, args.shape, args.input_seed)
    options = {'replacement': True} if args.kind == 'kfjlt' and args.replacement else {}
    if args.kind == 'sampling':
        options['design'] = KrMatrix.from_columns([vector])
    operator = make_sketch(args.kind, args.shape, args.J, args.seed, **options)
    result = operator.apply_kron(vector)
    with output_file(args.out) as fh:
        writer = csv.writer(fh, lineterminator='\n')
        writer.writerow(('index', 'value'))
        for index, value in enumerate(result):
            writer.writerow([index, repr(float(value))])
    reporter.info('{} sketch of a {} vector: |x|={VALUE}{:.6g}{RESET} |Sx|={VALUE}{:.6g}{RESET}',
                  args.kind, args.dist, vector.norm, float(np.linalg.norm(result)))


def cmd_idx(args, reporter):
    if args.idx_command == 'inspect':
        idx = read_idx(args.path)
        sys.stdout.write('magic=0x{:08x} type={} dims={}\n'.format(
            idx.magic, idx.payload.dtype, ','.join(str(n) for n in idx.dims)))
    else:
        (tensor,) = load_digit_tensors(args.images, args.labels, (args.digit,), args.count)
        np.save(args.out, tensor)
        reporter.info('wrote digit {} tensor of shape {} to {}', args.digit, tensor.shape, args.out)


COMMANDS = {
    'exp1': cmd_exp1,
    'exp2': cmd_exp2,
    'bounds': cmd_bounds,
    'lsq': cmd_lsq,
    'sketch': cmd_sketch,
    'idx': cmd_idx,
}


def main(argv=None):
    args = parser.parse_args(argv)
    reporter = ColorStream(force_colors=True) if args.force_colors else ColorStream()

    def showwarning(message, category, filename, lineno, file=None, line=None):
        reporter.warn('{}: {}', category.__name__, message)

    with warnings.catch_warnings():
        warnings.showwarning = showwarning
        try:
            COMMANDS[args.command](args, reporter)
        except OSError as exc:
            reporter.error('{}', exc)
            return 1
        except (ValueError, OverflowError) as exc:
            reporter.error('{}', exc)
            return 2
    return 0
