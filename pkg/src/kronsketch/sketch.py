"""
Sketch operators ``S`` of shape ``J x Ĩ`` that act on Kronecker vectors and Khatri-Rao matrices without forming them.

Every operator is immutable once built: all randomness is drawn from its seed at construction (the Gaussian matrix
lazily, but from the stored seed), so applying it twice gives bit-identical results.
"""
import functools
import warnings

import numpy as np
import scipy.fft
import scipy.sparse
from scipy.linalg import khatri_rao

from . import config
from .const import DEFAULT_MATERIALIZE_CAP
from .const import MERSENNE_PRIME
from .const import SKETCH_KINDS
from .core import KrMatrix
from .core import KronVector
from .core import ShapeError
from .core import ambient_size
from .core import check_cap
from .core import kron_rows
from .core import materialize_matrix
from .core import unravel
from .hadamard import RHT
from .hadamard import check_length
from .leverage import FactorizedDistribution
from .leverage import UniformDistribution
from .leverage import as_distribution
from .leverage import draw_sample_plan
from .leverage import leverage_scores
from .util import cached_property
from .util import child_seeds
from .util import make_rng

__all__ = (
    'GaussianSketch',
    'HashPair',
    'KFJLT',
    'RankDeficiencyWarning',
    'SamplingSketch',
    'SketchOperator',
    'SketchRankError',
    'TRPSketch',
    'TensorSketch',

    'apply_kr',
    'apply_kron',
    'make_sketch',
    'sampling_distribution',
)


class SketchRankError(ValueError):
    pass


class RankDeficiencyWarning(UserWarning):
    pass


def _seed_sequence(seed):
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


class SketchOperator(object):
    """
    Base class. Subclasses implement ``_apply_factors`` (for ``I_p x R`` factor blocks) and ``apply_dense``.
    """
    kind = None

    def __init__(self, shape, J, seed=None):
        self.shape = tuple(int(n) for n in shape)
        if not self.shape:
            raise ValueError('Shape needs at least one mode.')
        for n in self.shape:
            if n < 1:
                raise ValueError('Mode sizes must be positive, got shape {!r}.'.format(self.shape))
        self.size = ambient_size(self.shape)
        self.J = int(J)
        if self.J < 1:
            raise ValueError('Sketch size J must be positive, got {}.'.format(J))
        self.seed = seed
        self._sequence = _seed_sequence(seed)

    @property
    def P(self):
        return len(self.shape)

    def _check_shape(self, shape):
        if tuple(shape) != self.shape:
            raise ShapeError('{} built for shape {!r} applied to shape {!r}.'.format(
                self.__class__.__name__, self.shape, tuple(shape)))

    def apply_kron(self, v):
        """
        ``S x`` for a :class:`~kronsketch.core.KronVector` ``x``. Returns a length-``J`` vector.
        """
        self._check_shape(v.shape)
        return self._apply_factors([factor[:, None] for factor in v.factors])[:, 0]

    def apply_kr(self, M):
        """
        ``S M`` for a :class:`~kronsketch.core.KrMatrix` ``M``. Returns a ``J x R`` array.
        """
        self._check_shape(M.shape)
        return self._apply_factors(M.factors)

    def _apply_factors(self, factors):
        raise NotImplementedError()

    def _as_dense(self, x):
        x = np.asarray(x, dtype=np.float64)
        if not x.ndim or x.shape[0] != self.size:
            raise ShapeError('{} needs {} rows, got shape {!r}.'.format(self.__class__.__name__, self.size, x.shape))
        return x

    def apply_dense(self, x):
        """
        ``S x`` for a dense ``Ĩ`` vector or ``Ĩ x k`` array.
        """
        raise NotImplementedError()

    def dense(self):
        """
        The explicit ``J x Ĩ`` matrix, for tests and small cases.
        """
        raise NotImplementedError()

    def __call__(self, x):
        if isinstance(x, KronVector):
            return self.apply_kron(x)
        elif isinstance(x, KrMatrix):
            return self.apply_kr(x)
        else:
            return self.apply_dense(x)

    def __eq__(self, other):
        return (
            type(self) is type(other) and
            self.shape == other.shape and
            self.J == other.J and
            self._sequence.entropy == other._sequence.entropy and
            self._sequence.spawn_key == other._sequence.spawn_key
        )

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(shape={0.shape!r}, J={0.J}, seed={0.seed!r})'.format(self)


class GaussianSketch(SketchOperator):
    """
    Dense i.i.d. ``N(0, 1/J)`` matrix. Only usable while ``J * Ĩ`` stays under the materialization cap.
    """
    kind = 'gaussian'

    def __init__(self, shape, J, seed=None, cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
        super(GaussianSketch, self).__init__(shape, J, seed)
        check_cap(self.J * self.size, 'Gaussian sketch of {} x {}'.format(self.J, self.size), cap)
        self.cap = cap

    @cached_property
    def matrix(self):
        matrix = np.random.default_rng(self._sequence).standard_normal((self.J, self.size)) / np.sqrt(self.J)
        matrix.setflags(write=False)
        return matrix

    def _apply_factors(self, factors):
        return self.matrix @ materialize_matrix(KrMatrix(factors), self.cap)

    def apply_dense(self, x):
        return self.matrix @ self._as_dense(x)

    def dense(self):
        return np.array(self.matrix)


class _RowSampler(SketchOperator):
    """
    Shared evaluation for operators whose last step is a sample plan: only the ``J`` sampled rows are computed.
    """
    plan = None

    @cached_property
    def digits(self):
        return unravel(self.plan.indices, self.shape)

    def _check_plan(self, plan):
        if plan.J != self.J or plan.size != self.size:
            raise ValueError('Plan draws {} of {} rows, operator needs {} of {}.'.format(
                plan.J, plan.size, self.J, self.size))
        return plan

    def _sample(self, factors):
        return kron_rows(factors, self.digits) * self.plan.rescale[:, None]

    def _sample_dense(self, flat):
        return flat[self.plan.indices] * self.plan.rescale.reshape((-1,) + (1,) * (flat.ndim - 1))


class KFJLT(_RowSampler):
    """
    Kronecker fast Johnson-Lindenstrauss transform ``S (Φ_0 ⊗ ... ⊗ Φ_{P-1})`` with ``Φ_p = H D_p`` and ``S`` a
    uniform sample plan. Each mode size must be a power of two.

    Args:
        replacement (bool): Sample rows with replacement. Default: ``False``.
        plan (SamplePlan): Use this plan instead of drawing one.
    """
    kind = 'kfjlt'

    def __init__(self, shape, J, seed=None, replacement=False, plan=None):
        super(KFJLT, self).__init__(shape, J, seed)
        for n in self.shape:
            check_length(n)
        seeds = child_seeds(self._sequence, self.P + 1)
        self.transforms = tuple(RHT(n, seed=seeds[p]) for p, n in enumerate(self.shape))
        if plan is None:
            plan = draw_sample_plan(UniformDistribution(self.size), self.J, replacement=replacement, seed=seeds[-1])
        self.plan = self._check_plan(plan)
        self.replacement = self.plan.replacement

    def mix(self, factors):
        return [transform.apply(factor) for transform, factor in zip(self.transforms, factors)]

    def _apply_factors(self, factors):
        return self._sample(self.mix(factors))

    def apply_dense(self, x):
        x = self._as_dense(x)
        rest = x.shape[1:]
        tensor = x.reshape(self.shape + rest)
        for p, transform in enumerate(self.transforms):
            tensor = np.moveaxis(transform.apply(np.moveaxis(tensor, p, 0)), 0, p)
        return self._sample_dense(tensor.reshape((self.size,) + rest))

    def dense(self):
        check_cap(self.J * self.size, 'KFJLT of {} x {}'.format(self.J, self.size))
        rows = [transform.dense()[digit] for transform, digit in zip(self.transforms, self.digits)]
        matrix = functools.reduce(lambda a, b: (a[:, :, None] * b[:, None, :]).reshape(self.J, -1), rows)
        return matrix * self.plan.rescale[:, None]


class TRPSketch(SketchOperator):
    """
    Tensor random projection: the transposed Khatri-Rao product of Gaussian blocks ``G_p`` (``I_p x J``), over
    ``sqrt(J)``.
    """
    kind = 'trp'

    def __init__(self, shape, J, seed=None):
        super(TRPSketch, self).__init__(shape, J, seed)
        self.blocks = tuple(
            np.random.default_rng(child).standard_normal((n, self.J))
            for child, n in zip(child_seeds(self._sequence, self.P), self.shape)
        )
        for block in self.blocks:
            block.setflags(write=False)

    def _apply_factors(self, factors):
        result = functools.reduce(np.multiply, [block.T @ factor for block, factor in zip(self.blocks, factors)])
        return result / np.sqrt(self.J)

    def apply_dense(self, x):
        x = self._as_dense(x)
        rest = x.shape[1:]
        result = self.blocks[0].T @ x.reshape(self.shape[0], -1)
        for block, n in zip(self.blocks[1:], self.shape[1:]):
            result = np.einsum('jab,aj->jb', result.reshape(self.J, n, -1), block)
        return result.reshape((self.J,) + rest) / np.sqrt(self.J)

    def dense(self):
        check_cap(self.J * self.size, 'TRP sketch of {} x {}'.format(self.J, self.size))
        if self.P == 1:
            return self.blocks[0].T / np.sqrt(self.J)
        return functools.reduce(khatri_rao, self.blocks).T / np.sqrt(self.J)


def _poly_mod(coefficients, x, prime=MERSENNE_PRIME):
    value = 0
    for coefficient in reversed(coefficients):
        value = (value * x + coefficient) % prime
    return value


class HashPair(object):
    """
    Bucket and sign hashes for one mode of a :class:`TensorSketch`.

    Buckets come from a degree-1 (2-wise independent) polynomial and signs from a degree-3 (4-wise independent)
    polynomial, both over the Mersenne prime ``2**61 - 1``.
    """

    def __init__(self, size, J, seed=None):
        rng = make_rng(seed)
        self.size = int(size)
        self.J = int(J)
        self.bucket_coefficients = (int(rng.integers(0, MERSENNE_PRIME)), int(rng.integers(1, MERSENNE_PRIME)))
        self.sign_coefficients = tuple(int(c) for c in rng.integers(0, MERSENNE_PRIME, size=4))
        self.buckets = np.array(
            [_poly_mod(self.bucket_coefficients, i) % self.J for i in range(self.size)], dtype=np.intp)
        self.signs = np.array(
            [1.0 - 2.0 * (_poly_mod(self.sign_coefficients, i) & 1) for i in range(self.size)])
        self.buckets.setflags(write=False)
        self.signs.setflags(write=False)

    def count_sketch(self, factor):
        """
        ``C F`` for the ``J x size`` count sketch matrix ``C`` of this mode.
        """
        result = np.zeros((self.J,) + factor.shape[1:])
        np.add.at(result, self.buckets, self.signs.reshape((-1,) + (1,) * (factor.ndim - 1)) * factor)
        return result

    def __repr__(self):
        return '{0.__class__.__name__}(size={0.size}, J={0.J})'.format(self)


class TensorSketch(SketchOperator):
    """
    Count sketch of the Kronecker product with combined bucket ``(h_0 + ... + h_{P-1}) mod J`` and combined sign
    ``s_0 * ... * s_{P-1}``, evaluated as a circular convolution of per-mode count sketches through the FFT.
    """
    kind = 'tensorsketch'

    def __init__(self, shape, J, seed=None):
        super(TensorSketch, self).__init__(shape, J, seed)
        self.hashes = tuple(
            HashPair(n, self.J, seed=child)
            for child, n in zip(child_seeds(self._sequence, self.P), self.shape)
        )

    def _apply_factors(self, factors):
        sketches = [hashes.count_sketch(np.asarray(factor)) for hashes, factor in zip(self.hashes, factors)]
        if self.P == 1:
            return sketches[0]
        supports = [np.flatnonzero(np.any(sketch != 0, axis=1)) for sketch in sketches]
        if np.prod([support.size for support in supports], dtype=np.float64) <= self.J * max(np.log2(self.J), 1.0):
            return self._convolve_sparse(sketches, supports)
        spectrum = functools.reduce(np.multiply, [scipy.fft.rfft(sketch, axis=0) for sketch in sketches])
        return scipy.fft.irfft(spectrum, n=self.J, axis=0)

    def _convolve_sparse(self, sketches, supports):
        """
        Circular convolution over the nonzero buckets only. Exact: no round-off lands in empty buckets.
        """
        buckets = supports[0]
        values = sketches[0][buckets]
        for sketch, support in zip(sketches[1:], supports[1:]):
            buckets = (buckets[:, None] + support[None, :]).ravel() % self.J
            values = (values[:, None] * sketch[support][None, :]).reshape((buckets.size,) + values.shape[1:])
        result = np.zeros((self.J,) + sketches[0].shape[1:])
        np.add.at(result, buckets, values)
        return result

    @cached_property
    def matrix(self):
        """
        The combined count sketch as a sparse ``J x Ĩ`` matrix with one ``±1`` per column.
        """
        buckets = functools.reduce(np.add.outer, [hashes.buckets for hashes in self.hashes]).ravel() % self.J
        signs = functools.reduce(np.multiply.outer, [hashes.signs for hashes in self.hashes]).ravel()
        return scipy.sparse.csr_matrix((signs, (buckets, np.arange(self.size))), shape=(self.J, self.size))

    def apply_dense(self, x):
        return np.asarray(self.matrix @ self._as_dense(x))

    def dense(self):
        check_cap(self.J * self.size, 'TensorSketch of {} x {}'.format(self.J, self.size))
        return self.matrix.toarray()


def sampling_distribution(design):
    """
    Product of the factor leverage marginals ``ℓ(A_p) / R``, the estimated leverage distribution of ``design``.

    Factors of deficient rank have their marginal renormalized; an all-zero factor falls back to uniform. Both emit a
    :class:`RankDeficiencyWarning`.
    """
    marginals = []
    for position, factor in enumerate(design.factors):
        profile = leverage_scores(factor)
        marginal = profile.scores / design.R
        if profile.rank == 0:
            warnings.warn('Factor {} is all zeros, sampling its mode uniformly.'.format(position),
                          RankDeficiencyWarning, stacklevel=2)
            marginal = np.ones(profile.size)
        elif profile.rank < design.R:
            warnings.warn('Factor {} has rank {} < R={}, renormalizing its leverage marginal.'.format(
                position, profile.rank, design.R), RankDeficiencyWarning, stacklevel=2)
        marginals.append(marginal)
    return FactorizedDistribution(marginals)


class SamplingSketch(_RowSampler):
    """
    Row sampling with replacement from the estimated leverage distribution of a design Khatri-Rao matrix.

    Args:
        design (KrMatrix): Matrix whose leverage scores drive the sampling.
        distribution: Use this distribution (or probability vector) instead of the design's.
        replacement (bool): Default: ``True``.
        plan (SamplePlan): Use this plan instead of drawing one.
    """
    kind = 'sampling'

    def __init__(self, shape, J, seed=None, design=None, distribution=None, replacement=True, plan=None):
        super(SamplingSketch, self).__init__(shape, J, seed)
        if plan is None:
            if distribution is None:
                if design is None:
                    raise ValueError('The sampling sketch needs a design matrix, a distribution or a plan.')
                self._check_shape(design.shape)
                distribution = sampling_distribution(design)
            distribution = as_distribution(distribution)
            if distribution.size != self.size:
                raise ShapeError('Distribution over {} rows used for size {}.'.format(distribution.size, self.size))
            plan = draw_sample_plan(distribution, self.J, replacement=replacement, seed=self._sequence)
        self.plan = self._check_plan(plan)
        self.replacement = self.plan.replacement

    def _apply_factors(self, factors):
        return self._sample(factors)

    def apply_dense(self, x):
        return self._sample_dense(self._as_dense(x))

    def dense(self):
        check_cap(self.J * self.size, 'Sampling sketch of {} x {}'.format(self.J, self.size))
        matrix = np.zeros((self.J, self.size))
        matrix[np.arange(self.J), self.plan.indices] = self.plan.rescale
        return matrix


KINDS = {
    'gaussian': GaussianSketch,
    'kfjlt': KFJLT,
    'trp': TRPSketch,
    'tensorsketch': TensorSketch,
    'sampling': SamplingSketch,
}
assert tuple(KINDS) == SKETCH_KINDS


def make_sketch(kind, shape, J, seed=None, **options):
    """
    Build a sketch operator by name: one of ``gaussian``, ``kfjlt``, ``trp``, ``tensorsketch`` or ``sampling``.
    Extra keyword arguments go to the operator (``replacement``, ``plan``, ``design``, ``distribution``).
    """
    try:
        factory = KINDS[kind]
    except KeyError:
        raise ValueError('Unknown sketch kind {!r}, expected one of: {}.'.format(kind, ', '.join(SKETCH_KINDS)))
    return factory(shape, J, seed, **options)


def apply_kron(operator, v):
    return operator.apply_kron(v)


def apply_kr(operator, M):
    return operator.apply_kr(M)
