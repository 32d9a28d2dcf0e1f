"""
Seeded Monte Carlo harness for the two distortion experiments.

Experiment 1 draws a fresh pair of random Kronecker vectors and a fresh operator for every trial. Experiment 2 keeps
one pair of CP tensors fixed and redraws only the operator. The distortion of a trial is
``| ||S (x - y)|| / ||x - y|| - 1 |``.

Every trial seed is ``derive_seed(master, tag, J, trial)`` (``tag`` is ``'input'`` for the inputs and the sketch
kind for the operator), so results do not depend on trial order or on the number of worker threads.
"""
import csv
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .const import CSV_COLUMNS
from .const import CSV_PREAMBLE
from .const import DISTRIBUTIONS
from .const import SKETCH_KINDS
from .const import TRIAL_LOG_COLUMNS
from .core import KrMatrix
from .core import KronVector
from .core import kr_norm
from .cp import StackedKr
from .cp import ZeroDistanceError
from .sketch import make_sketch
from .util import derive_seed
from .util import is_pow2
from .util import make_rng

__all__ = (
    'ExperimentConfig',
    'TrialStats',

    'gen_input',
    'parse_jgrid',
    'parse_kinds',
    'parse_shape',
    'row_reduction',
    'run_experiment1',
    'run_experiment2',
    'write_stats_csv',
)

PAIR = np.array([1.0, -1.0])


class TrialStats(object):
    """
    Mean, sample standard deviation and maximum of the distortion over the trials of one ``(kind, J)`` cell.
    Trials skipped for a zero denominator are not counted.
    """

    def __init__(self, kind, J, mean, std, maximum, trials, seed=None, wallclock_ms=0.0, size=None, skipped=0):
        self.kind = kind
        self.J = int(J)
        self.mean = float(mean)
        self.std = float(std)
        self.max = float(maximum)
        self.trials = int(trials)
        self.seed = seed
        self.wallclock_ms = float(wallclock_ms)
        self.size = size
        self.skipped = int(skipped)

    @classmethod
    def from_values(cls, kind, J, values, **kwargs):
        values = np.asarray(values, dtype=np.float64)
        if values.size:
            mean = values.mean()
            std = values.std(ddof=1) if values.size > 1 else 0.0
            maximum = values.max()
        else:
            mean = std = maximum = float('nan')
        return cls(kind, J, mean, std, maximum, values.size, **kwargs)

    @property
    def reduction(self):
        if self.size is None:
            return None
        return row_reduction(self.J, self.size)

    def as_row(self):
        return [self.kind, self.J, self.trials, repr(self.mean), repr(self.std), repr(self.max), self.seed,
                repr(self.wallclock_ms)]

    def __repr__(self):
        return '{0.__class__.__name__}(kind={0.kind!r}, J={0.J}, trials={0.trials}, mean={0.mean!r}, ' \
               'std={0.std!r}, max={0.max!r})'.format(self)


def row_reduction(J, size):
    """
    Fraction of rows removed by sketching ``size`` rows down to ``J``.
    """
    return 1.0 - float(J) / float(size)


def parse_shape(value):
    if isinstance(value, str):
        value = [part for part in value.replace('x', ',').split(',') if part.strip()]
    shape = tuple(int(part) for part in value)
    if not shape or min(shape) < 1:
        raise ValueError('Shape must be a non-empty list of positive sizes, got {!r}.'.format(value))
    return shape


def parse_jgrid(value):
    """
    ``"start:stop:step"`` (inclusive stop) or a comma separated list.
    """
    if isinstance(value, str):
        if ':' in value:
            parts = [int(part) for part in value.split(':')]
            if len(parts) != 3 or parts[2] < 1:
                raise ValueError('J grid range must be start:stop:step with a positive step, got {!r}.'.format(value))
            grid = tuple(range(parts[0], parts[1] + 1, parts[2]))
        else:
            grid = tuple(int(part) for part in value.split(',') if part.strip())
    else:
        grid = tuple(int(J) for J in value)
    if not grid:
        raise ValueError('J grid is empty.')
    if min(grid) < 1:
        raise ValueError('J values must be positive, got {!r}.'.format(grid))
    return grid


def parse_kinds(value):
    if isinstance(value, str):
        value = SKETCH_KINDS if value == 'all' else [part.strip() for part in value.split(',') if part.strip()]
    kinds = tuple(value)
    for kind in kinds:
        if kind not in SKETCH_KINDS:
            raise ValueError('Unknown sketch kind {!r}, expected one of: {}.'.format(kind, ', '.join(SKETCH_KINDS)))
    if not kinds:
        raise ValueError('No sketch kinds selected.')
    return kinds


def parse_bool(value):
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ('1', 'true', 'yes', 'on'):
            return True
        if lowered in ('0', 'false', 'no', 'off', ''):
            return False
        raise ValueError('Expected a boolean, got {!r}.'.format(value))
    return bool(value)


class ExperimentConfig(object):
    """
    Settings of one experiment run.

    Args:
        dist (str): Input distribution of experiment 1: ``normal``, ``sparse3`` or ``spike``.
        shape (tuple): Mode sizes of the inputs (experiment 1) or synthetic CP tensors (experiment 2).
        jgrid (tuple): Sketch sizes.
        trials (int): Trials per ``(kind, J)``.
        seed (int): Master seed.
        kinds (tuple): Sketch kinds.
        replacement (bool): KFJLT samples with replacement.
        rank (int): CP rank for experiment 2.
        force_gaussian (bool): Keep the Gaussian baseline in experiment 2.
        jobs (int): Worker threads.
        timing (bool): Record wall clock time; when off ``wallclock_ms`` is ``0`` and output is byte-stable.
        out (str): CSV path, ``None`` for stdout.
        trials_out (str): Optional per-trial log path.
    """
    OPTIONS = ('dist', 'shape', 'jgrid', 'trials', 'seed', 'kinds', 'replacement', 'rank', 'force_gaussian', 'jobs',
               'timing', 'out', 'trials_out')

    def __init__(self, dist='normal', shape=(16, 16, 16), jgrid=tuple(range(100, 1001, 100)), trials=1000, seed=0,
                 kinds=SKETCH_KINDS, replacement=False, rank=10, force_gaussian=False, jobs=1, timing=True,
                 out=None, trials_out=None):
        if dist not in DISTRIBUTIONS:
            raise ValueError('Unknown distribution {!r}, expected one of: {}.'.format(dist, ', '.join(DISTRIBUTIONS)))
        self.dist = dist
        self.shape = parse_shape(shape)
        self.jgrid = parse_jgrid(jgrid)
        self.trials = int(trials)
        if self.trials < 1:
            raise ValueError('Need at least one trial, got {}.'.format(trials))
        self.seed = int(seed)
        self.kinds = parse_kinds(kinds)
        self.replacement = parse_bool(replacement)
        self.rank = int(rank)
        if self.rank < 1:
            raise ValueError('Rank must be positive, got {}.'.format(rank))
        self.force_gaussian = parse_bool(force_gaussian)
        self.jobs = int(jobs)
        if self.jobs < 1:
            raise ValueError('Need at least one job, got {}.'.format(jobs))
        self.timing = parse_bool(timing)
        self.out = out
        self.trials_out = trials_out

    @classmethod
    def from_options(cls, options, **defaults):
        """
        Build from a mapping of (possibly string) option values; keys with ``None`` values are ignored.
        """
        merged = dict(defaults)
        for key, value in options.items():
            if value is None:
                continue
            if key not in cls.OPTIONS:
                raise ValueError('Unknown experiment option {!r}.'.format(key))
            merged[key] = value
        return cls(**merged)

    def __repr__(self):
        return '{0.__class__.__name__}(dist={0.dist!r}, shape={0.shape!r}, jgrid={0.jgrid!r}, ' \
               'trials={0.trials}, seed={0.seed}, kinds={0.kinds!r})'.format(self)


def gen_input(dist, shape, seed=None):
    """
    Draw a random :class:`~kronsketch.core.KronVector`, one factor per mode:

    * ``normal``: i.i.d. standard normal entries.
    * ``sparse3``: three nonzeros at distinct uniform positions, values ``N(0, 100**2)``.
    * ``spike``: a single entry equal to 100 at a uniform position.
    """
    rng = make_rng(seed)
    factors = []
    for n in shape:
        if dist == 'normal':
            factor = rng.standard_normal(n)
        elif dist == 'sparse3':
            if n < 3:
                raise ValueError('The sparse3 distribution needs modes of size >= 3, got {}.'.format(n))
            factor = np.zeros(n)
            factor[rng.choice(n, size=3, replace=False)] = rng.normal(0.0, 100.0, size=3)
        elif dist == 'spike':
            factor = np.zeros(n)
            factor[rng.integers(n)] = 100.0
        else:
            raise ValueError('Unknown distribution {!r}, expected one of: {}.'.format(dist, ', '.join(DISTRIBUTIONS)))
        factors.append(factor)
    return KronVector(factors)


def _build_operator(cfg, kind, shape, J, seed, design):
    options = {}
    if kind == 'kfjlt':
        size = int(np.prod(shape))
        options['replacement'] = cfg.replacement or J > size
    elif kind == 'sampling':
        options['design'] = design
    return make_sketch(kind, shape, J, seed, **options)


def _distortion(estimate, exact):
    return abs(estimate / exact - 1.0)


class _Cell(object):
    """
    One ``(kind, J)`` cell: runs its trials (optionally on a thread pool) and summarizes them.
    """

    def __init__(self, cfg, kind, J, trial, size):
        self.cfg = cfg
        self.kind = kind
        self.J = J
        self.trial = trial
        self.size = size

    def run(self, trial_log=None):
        start = time.perf_counter()
        if self.cfg.jobs > 1:
            with ThreadPoolExecutor(max_workers=self.cfg.jobs) as pool:
                outcomes = list(pool.map(self.trial, range(self.cfg.trials)))
        else:
            outcomes = [self.trial(index) for index in range(self.cfg.trials)]
        elapsed = (time.perf_counter() - start) * 1000.0 if self.cfg.timing else 0.0

        values = []
        skipped = 0
        for index, outcome in enumerate(outcomes):
            if outcome is None:
                skipped += 1
                continue
            seed, value = outcome
            values.append(value)
            if trial_log is not None:
                trial_log.writerow([self.kind, self.J, index, seed, repr(value)])
        return TrialStats.from_values(self.kind, self.J, values, seed=self.cfg.seed, wallclock_ms=elapsed,
                                      size=self.size, skipped=skipped)


def _report_cell(reporter, stats):
    if reporter is None:
        return
    reporter.info('{KIND}{:>12}{RESET} J={:<5} mean={VALUE}{:.4g}{RESET} std={:.4g} max={:.4g} '
                  '{DIM}({} trials, {:.1%} row reduction){RESET}',
                  stats.kind, stats.J, stats.mean, stats.std, stats.max, stats.trials, stats.reduction)
    if stats.skipped:
        reporter.warn('{} {} trial(s) at J={} skipped: x equals y so the distortion is undefined.',
                      stats.kind, stats.skipped, stats.J)


def _note_fallback(reporter, cfg, kind, J, size):
    if reporter is not None and kind == 'kfjlt' and not cfg.replacement and J > size:
        reporter.warn('kfjlt at J={} exceeds the {} available rows; sampling with replacement instead.', J, size)


def _trial_writer(fh):
    if fh is None:
        return None
    writer = csv.writer(fh, lineterminator='\n')
    writer.writerow(TRIAL_LOG_COLUMNS)
    return writer


def run_experiment1(cfg, reporter=None, trial_log=None):
    """
    Distortion of each sketch kind on pairs of random Kronecker vectors.

    Args:
        cfg (ExperimentConfig):
        reporter (ColorStream): Progress output, optional.
        trial_log (file): Per-trial values are written here as CSV when given.

    Returns: list of :class:`TrialStats`, one per ``(kind, J)``.
    """
    size = int(np.prod(cfg.shape))

    def make_trial(kind, J):
        def trial(index):
            rng = make_rng(derive_seed(cfg.seed, 'input', J, index))
            x = gen_input(cfg.dist, cfg.shape, rng)
            y = gen_input(cfg.dist, cfg.shape, rng)
            pair = KrMatrix.from_columns([x, y])
            exact = kr_norm(pair, PAIR)
            if exact <= 1e-12 * max(x.norm, y.norm):
                return None
            seed = derive_seed(cfg.seed, kind, J, index)
            operator = _build_operator(cfg, kind, cfg.shape, J, seed, pair)
            return seed, _distortion(np.linalg.norm(operator.apply_kr(pair) @ PAIR), exact)
        return trial

    writer = _trial_writer(trial_log)
    results = []
    for kind in cfg.kinds:
        for J in cfg.jgrid:
            _note_fallback(reporter, cfg, kind, J, size)
            stats = _Cell(cfg, kind, J, make_trial(kind, J), size).run(writer)
            _report_cell(reporter, stats)
            results.append(stats)
    return results


def run_experiment2(cfg, cp_a, cp_b, reporter=None, trial_log=None):
    """
    Distortion of the sketched distance between two fixed CP tensors.

    The Gaussian baseline is dropped unless ``cfg.force_gaussian``. The KFJLT runs on the tensors zero-padded to
    power-of-two modes, which leaves their distance unchanged; where ``J`` exceeds the padded size it samples with
    replacement.

    Raises:
        ZeroDistanceError: if the tensors coincide.
    """
    stacked = StackedKr(cp_a, cp_b)
    exact = stacked.norm()
    if exact <= 1e-12 * max(cp_a.norm(), cp_b.norm(), np.finfo(float).tiny):
        raise ZeroDistanceError('The CP tensors are identical (zero distance); the distortion is undefined.')

    kinds = cfg.kinds
    if not cfg.force_gaussian and 'gaussian' in kinds:
        kinds = tuple(kind for kind in kinds if kind != 'gaussian')
        if reporter is not None:
            reporter.warn('Skipping the gaussian baseline (use --force-gaussian to include it).')

    padded = stacked
    if 'kfjlt' in kinds and not all(is_pow2(n) for n in stacked.shape):
        padded = stacked.padded()
        if reporter is not None:
            reporter.info('kfjlt runs on zero-padded shape {} (from {}).', padded.shape, stacked.shape)
    size = int(np.prod(stacked.shape))

    def make_trial(kind, J):
        target = padded if kind == 'kfjlt' else stacked

        def trial(index):
            seed = derive_seed(cfg.seed, kind, J, index)
            operator = _build_operator(cfg, kind, target.shape, J, seed, target.matrix)
            return seed, _distortion(np.linalg.norm(operator.apply_kr(target.matrix) @ target.u), exact)
        return trial

    writer = _trial_writer(trial_log)
    results = []
    for kind in kinds:
        for J in cfg.jgrid:
            _note_fallback(reporter, cfg, kind, J, int(np.prod(padded.shape)))
            stats = _Cell(cfg, kind, J, make_trial(kind, J), size).run(writer)
            _report_cell(reporter, stats)
            results.append(stats)
    return results


def write_stats_csv(results, fh):
    """
    Write the versioned preamble, the header and one row per :class:`TrialStats`. Floats use ``repr`` so they
    round-trip exactly.
    """
    fh.write(CSV_PREAMBLE + '\n')
    writer = csv.writer(fh, lineterminator='\n')
    writer.writerow(CSV_COLUMNS)
    for stats in results:
        writer.writerow(stats.as_row())
