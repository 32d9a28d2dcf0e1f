"""
Leverage scores, sampling distributions over Kronecker indices, and sample plans.
"""
import numpy as np
import scipy.linalg

from . import config
from .const import DEFAULT_MATERIALIZE_CAP
from .const import DEFAULT_RANK_RTOL
from .core import KronVector
from .core import ambient_size
from .core import materialize_vector
from .core import ravel
from .core import unravel
from .util import frozen
from .util import make_rng

__all__ = (
    'DenseDistribution',
    'FactorizedDistribution',
    'LeverageProfile',
    'NegativeMassError',
    'SamplePlan',
    'UniformDistribution',

    'apply_sample_plan',
    'check_subspace_embedding',
    'draw_sample_plan',
    'full_plan',
    'kr_leverage_upper',
    'leverage_scores',
    'mixing_bound',
    'numerical_rank',
    'orthonormal_basis',
)


class NegativeMassError(ValueError):
    pass


def numerical_rank(singular_values, shape, rtol=config.Default('rank_rtol', DEFAULT_RANK_RTOL)):
    """
    Count singular values above ``max(shape) * sigma_max * rtol``. An all-zero matrix has rank 0.
    """
    singular_values = np.asarray(singular_values)
    if not singular_values.size or singular_values[0] <= 0:
        return 0
    tolerance = max(shape) * singular_values[0] * config.resolve(rtol)
    return int(np.count_nonzero(singular_values > tolerance))


def orthonormal_basis(A, method='qr', rtol=config.Default('rank_rtol', DEFAULT_RANK_RTOL)):
    """
    Orthonormal basis of ``range(A)`` with as many columns as the numerical rank of ``A``.

    Args:
        method (str): ``'qr'`` (column-pivoted QR) or ``'svd'``.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    if method == 'svd':
        U, s, _ = scipy.linalg.svd(A, full_matrices=False)
        return U[:, :numerical_rank(s, A.shape, rtol)]
    elif method == 'qr':
        Q, Rm, _ = scipy.linalg.qr(A, mode='economic', pivoting=True)
        s = scipy.linalg.svdvals(Rm)
        return Q[:, :numerical_rank(s, A.shape, rtol)]
    else:
        raise ValueError('Unknown method {!r}, expected "qr" or "svd".'.format(method))


class LeverageProfile(object):
    """
    Leverage scores of a matrix together with its numerical rank. ``scores.sum() == rank`` up to round-off.
    """

    def __init__(self, scores, rank):
        self.scores = frozen(scores, ndim=1)
        self.rank = int(rank)

    @property
    def size(self):
        return self.scores.size

    @property
    def coherence(self):
        return float(self.scores.max()) if self.scores.size else 0.0

    def __repr__(self):
        return '{0.__class__.__name__}(size={0.size}, rank={0.rank}, coherence={0.coherence:.4g})'.format(self)


def leverage_scores(A, method='qr', rtol=config.Default('rank_rtol', DEFAULT_RANK_RTOL)):
    """
    Row leverage scores ``ℓ_i = ||U[i, :]||²`` for an orthonormal basis ``U`` of ``range(A)``.
    """
    basis = orthonormal_basis(A, method=method, rtol=rtol)
    scores = np.clip(np.einsum('ij,ij->i', basis, basis), 0.0, 1.0)
    return LeverageProfile(scores, basis.shape[1])


def kr_leverage_upper(M, method='qr'):
    """
    Upper bound on the coherence of a Khatri-Rao matrix: the product of the factor coherences.
    """
    return float(np.prod([leverage_scores(factor, method=method).coherence for factor in M.factors]))


def mixing_bound(size, R, eta):
    """
    With probability ``1 - eta`` every leverage score of ``Φ U`` is at most this value, where ``U`` has ``R``
    orthonormal columns and ``Φ`` is a randomized Hadamard transform of length ``size``.
    """
    return 2.0 * R * np.log(2.0 * size * R / eta) / size


def check_subspace_embedding(sketched_basis, eps):
    """
    Whether ``S U`` (for an orthonormal ``U``) has all squared singular values within ``[1 - eps, 1 + eps]``.

    Returns: ``(squared_singular_values, ok)``.
    """
    squared = scipy.linalg.svdvals(np.asarray(sketched_basis, dtype=np.float64)) ** 2
    return squared, bool(np.all((squared >= 1 - eps) & (squared <= 1 + eps)))


class Distribution(object):
    size = None

    def prob(self, indices):
        raise NotImplementedError()

    def draw(self, rng, count):
        raise NotImplementedError()

    @property
    def support(self):
        raise NotImplementedError()

    def draw_distinct(self, rng, count):
        """
        ``count`` distinct indices, each drawn from the distribution renormalized over what is left.
        Duplicates of i.i.d. draws are rejected, which has the same law.
        """
        chosen = []
        seen = set()
        while len(chosen) < count:
            for index in self.draw(rng, 2 * (count - len(chosen))):
                index = int(index)
                if index not in seen:
                    seen.add(index)
                    chosen.append(index)
                    if len(chosen) == count:
                        break
        return np.array(chosen, dtype=np.intp)


class UniformDistribution(Distribution):
    """
    Uniform over ``range(size)``, kept symbolic so huge index spaces cost nothing.
    """

    def __init__(self, size):
        self.size = int(size)
        if self.size < 1:
            raise ValueError('Distribution needs a positive size, got {}.'.format(size))

    @property
    def support(self):
        return self.size

    def prob(self, indices):
        return np.full(np.shape(indices), 1.0 / self.size)

    def draw(self, rng, count):
        return rng.integers(0, self.size, size=count).astype(np.intp)

    def draw_distinct(self, rng, count):
        return rng.choice(self.size, size=count, replace=False).astype(np.intp)

    def __repr__(self):
        return '{0.__class__.__name__}(size={0.size})'.format(self)


class DenseDistribution(Distribution):
    """
    Explicit probability vector. Nonnegative weights are normalized to sum to one.
    """

    def __init__(self, probs):
        probs = np.asarray(probs, dtype=np.float64)
        if probs.ndim != 1 or not probs.size:
            raise ValueError('Probabilities must be a non-empty 1-d array, got shape {!r}.'.format(probs.shape))
        if not np.all(np.isfinite(probs)):
            raise ValueError('Probabilities must be finite.')
        if np.any(probs < 0):
            raise NegativeMassError('Probability vector has {} negative entries (min {!r}).'.format(
                int(np.count_nonzero(probs < 0)), float(probs.min())))
        total = probs.sum()
        if total <= 0:
            raise ValueError('Probability vector has no mass.')
        self.probs = frozen(probs / total)
        self.size = self.probs.size

    @property
    def support(self):
        return int(np.count_nonzero(self.probs))

    def prob(self, indices):
        return self.probs[np.asarray(indices, dtype=np.intp)]

    def draw(self, rng, count):
        return rng.choice(self.size, size=count, p=self.probs).astype(np.intp)

    def draw_distinct(self, rng, count):
        return rng.choice(self.size, size=count, replace=False, p=self.probs).astype(np.intp)

    def __repr__(self):
        return '{0.__class__.__name__}(size={0.size})'.format(self)


class FactorizedDistribution(Distribution):
    """
    Product distribution over Kronecker indices: ``q(i) = prod_p q_p(i_p)``. Drawing picks each digit independently.
    """

    def __init__(self, marginals):
        self.marginals = tuple(
            marginal if isinstance(marginal, DenseDistribution) else DenseDistribution(marginal)
            for marginal in marginals
        )
        if not self.marginals:
            raise ValueError('Need at least one marginal.')
        self.shape = tuple(marginal.size for marginal in self.marginals)
        self.size = ambient_size(self.shape)

    @property
    def support(self):
        support = 1
        for marginal in self.marginals:
            support *= marginal.support
        return support

    def prob(self, indices):
        digits = unravel(indices, self.shape)
        result = np.ones(np.shape(indices))
        for marginal, digit in zip(self.marginals, digits):
            result = result * marginal.probs[digit]
        return result

    def draw(self, rng, count):
        digits = [marginal.draw(rng, count) for marginal in self.marginals]
        return ravel(digits, self.shape).astype(np.intp)

    def dense(self, cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
        return materialize_vector(KronVector([marginal.probs for marginal in self.marginals]), cap)

    def draw_distinct(self, rng, count):
        if self.size <= config.resolve(config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
            return DenseDistribution(self.dense()).draw_distinct(rng, count)
        return super(FactorizedDistribution, self).draw_distinct(rng, count)

    def __repr__(self):
        return '{0.__class__.__name__}(shape={0.shape!r})'.format(self)


def as_distribution(q):
    if isinstance(q, Distribution):
        return q
    return DenseDistribution(q)


class SamplePlan(object):
    """
    ``J`` row indices drawn from ``q`` with the rescale ``1 / sqrt(J * q_i)`` applied to each selected row.
    """

    def __init__(self, indices, rescale, q, replacement):
        self.indices = frozen(indices, dtype=np.intp, ndim=1)
        self.rescale = frozen(rescale, ndim=1)
        if self.indices.shape != self.rescale.shape:
            raise ValueError('Got {} indices but {} rescale factors.'.format(self.indices.size, self.rescale.size))
        self.q = q
        self.replacement = bool(replacement)

    @property
    def J(self):
        return self.indices.size

    @property
    def size(self):
        return self.q.size

    def __eq__(self, other):
        return (
            isinstance(other, SamplePlan) and
            self.replacement == other.replacement and
            np.array_equal(self.indices, other.indices) and
            np.array_equal(self.rescale, other.rescale)
        )

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(J={0.J}, size={0.size}, replacement={0.replacement})'.format(self)


def draw_sample_plan(q, J, replacement=True, seed=None):
    """
    Draw ``J`` rows from ``q`` (a :class:`Distribution` or a probability vector).

    Raises:
        ValueError: if ``J < 1``, or without replacement when ``J`` exceeds the support of ``q``.
    """
    q = as_distribution(q)
    J = int(J)
    if J < 1:
        raise ValueError('Sample count J must be positive, got {}.'.format(J))
    rng = make_rng(seed)
    if replacement:
        indices = q.draw(rng, J)
    else:
        if J > q.size:
            raise ValueError('Cannot draw J={} distinct rows out of {} without replacement.'.format(J, q.size))
        if J > q.support:
            raise ValueError('Cannot draw J={} distinct rows from a distribution supported on {} rows.'.format(
                J, q.support))
        indices = q.draw_distinct(rng, J)
    rescale = 1.0 / np.sqrt(J * q.prob(indices))
    return SamplePlan(indices, rescale, q, replacement)


def full_plan(size):
    """
    The plan that keeps every row exactly once (``S = I``).
    """
    q = UniformDistribution(size)
    indices = np.arange(q.size, dtype=np.intp)
    return SamplePlan(indices, 1.0 / np.sqrt(q.size * q.prob(indices)), q, replacement=False)


def apply_sample_plan(plan, A):
    """
    ``S A``: the selected rows of ``A`` scaled by the plan's rescale.

    Args:
        A: Dense array, or anything with a ``shape`` and a ``rows(indices)`` method (like
            :class:`kronsketch.core.RowView`).
    """
    if hasattr(A, 'rows'):
        rows = A.rows(plan.indices)
        n = A.shape[0]
    else:
        A = np.asarray(A, dtype=np.float64)
        n = A.shape[0]
        if plan.J and plan.indices.max() >= n:
            raise IndexError('Plan index {} out of range for {} rows.'.format(int(plan.indices.max()), n))
        rows = A[plan.indices]
    if n != plan.size:
        raise ValueError('Plan drawn over {} rows applied to {} rows.'.format(plan.size, n))
    return rows * plan.rescale.reshape((-1,) + (1,) * (rows.ndim - 1))
