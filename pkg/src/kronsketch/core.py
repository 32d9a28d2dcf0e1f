"""
Kronecker vectors, Khatri-Rao matrices and the index arithmetic between them.

Ordering is row-major: in ``x[0] ⊗ x[1] ⊗ ... ⊗ x[P-1]`` the leftmost factor varies slowest, so the entry at digits
``(i_0, ..., i_{P-1})`` sits at ``sum(i_p * prod(I_q for q > p))``. All indices are 0-based; the mathematical
1-based index ``i`` is ``i - 1`` here.
"""
import functools

import numpy as np
from scipy.linalg import khatri_rao

from . import config
from .const import DEFAULT_MATERIALIZE_CAP
from .util import cached_property
from .util import frozen

__all__ = (
    'KrMatrix',
    'KronVector',
    'MultiIndex',
    'RowView',
    'ShapeError',
    'TooLargeError',

    'ambient_size',
    'kr_gram',
    'kr_matvec',
    'kr_norm',
    'kron_row',
    'kron_rows',
    'materialize_matrix',
    'materialize_vector',
    'ravel',
    'unravel',
)

INDEX_MAX = np.iinfo(np.intp).max


class TooLargeError(ValueError):
    pass


class ShapeError(ValueError):
    pass


def ambient_size(shape):
    """
    Product of the mode sizes, checked against the platform index type.

    Raises:
        OverflowError: if the product does not fit in ``numpy.intp``.
    """
    size = 1
    for n in shape:
        size *= int(n)
    if size > INDEX_MAX:
        raise OverflowError('Ambient dimension {} of shape {!r} overflows the index type (max {}).'.format(
            size, tuple(shape), INDEX_MAX))
    return size


def check_cap(entries, what, cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
    cap = config.resolve(cap)
    if entries > cap:
        raise TooLargeError('{} has {} entries, too large to materialize (cap is {}).'.format(what, entries, cap))


class KronVector(object):
    """
    A vector ``x = factors[0] ⊗ factors[1] ⊗ ... ⊗ factors[P-1]`` kept in factored form.

    Args:
        factors (sequence of 1-d arrays): The ``P >= 1`` factor vectors, each non-empty. They are copied and frozen.
    """

    def __init__(self, factors):
        factors = tuple(frozen(factor, ndim=1) for factor in factors)
        if not factors:
            raise ValueError('A KronVector needs at least one factor.')
        for position, factor in enumerate(factors):
            if not factor.size:
                raise ValueError('Factor {} of the KronVector is empty.'.format(position))
        self.factors = factors
        self.shape = tuple(factor.size for factor in factors)
        self.size = ambient_size(self.shape)

    @property
    def P(self):
        return len(self.factors)

    @cached_property
    def norm(self):
        """
        ``||x||_2``, the product of the factor norms.
        """
        return float(np.prod([np.linalg.norm(factor) for factor in self.factors]))

    def __eq__(self, other):
        return (
            isinstance(other, KronVector) and
            self.shape == other.shape and
            all(np.array_equal(a, b) for a, b in zip(self.factors, other.factors))
        )

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(shape={0.shape!r})'.format(self)


class KrMatrix(object):
    """
    A Khatri-Rao matrix ``factors[0] ⊙ ... ⊙ factors[P-1]``: column ``r`` is the Kronecker product of the ``r``-th
    columns of the factors.

    Args:
        factors (sequence of 2-d arrays): Factor ``p`` has shape ``(I_p, R)``, with the same ``R >= 1`` for all.
    """

    def __init__(self, factors):
        factors = tuple(frozen(factor, ndim=2) for factor in factors)
        if not factors:
            raise ValueError('A KrMatrix needs at least one factor.')
        columns = {factor.shape[1] for factor in factors}
        if len(columns) != 1:
            raise ShapeError('Factors must share their column count, got shapes {!r}.'.format(
                [factor.shape for factor in factors]))
        R = columns.pop()
        if R < 1:
            raise ShapeError('Factors need at least one column.')
        for position, factor in enumerate(factors):
            if not factor.shape[0]:
                raise ShapeError('Factor {} of the KrMatrix has no rows.'.format(position))
        self.factors = factors
        self.R = R
        self.shape = tuple(factor.shape[0] for factor in factors)
        self.size = ambient_size(self.shape)

    @classmethod
    def from_columns(cls, vectors):
        """
        Stack Kronecker vectors of the same shape as the columns of a Khatri-Rao matrix.
        """
        vectors = list(vectors)
        if not vectors:
            raise ValueError('Need at least one column.')
        shape = vectors[0].shape
        for vector in vectors:
            if vector.shape != shape:
                raise ShapeError('Column shapes differ: {!r} vs {!r}.'.format(shape, vector.shape))
        return cls([
            np.column_stack([vector.factors[p] for vector in vectors])
            for p in range(len(shape))
        ])

    @property
    def P(self):
        return len(self.factors)

    def column(self, r):
        return KronVector([factor[:, r] for factor in self.factors])

    def columns(self):
        return [self.column(r) for r in range(self.R)]

    def hstack(self, other):
        if other.shape != self.shape:
            raise ShapeError('Cannot stack {!r} next to {!r}.'.format(other.shape, self.shape))
        return KrMatrix([np.hstack([a, b]) for a, b in zip(self.factors, other.factors)])

    def __eq__(self, other):
        return (
            isinstance(other, KrMatrix) and
            self.shape == other.shape and
            self.R == other.R and
            all(np.array_equal(a, b) for a, b in zip(self.factors, other.factors))
        )

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(shape={0.shape!r}, R={0.R})'.format(self)


class MultiIndex(object):
    """
    A row address of a Kronecker product, both as per-mode ``digits`` and as the ``linear`` (row-major) index.
    Everything is 0-based.
    """

    def __init__(self, digits, shape):
        digits = tuple(int(d) for d in digits)
        shape = tuple(int(n) for n in shape)
        if len(digits) != len(shape):
            raise ShapeError('Got {} digits for a {}-mode shape.'.format(len(digits), len(shape)))
        linear = 0
        for digit, n in zip(digits, shape):
            if not 0 <= digit < n:
                raise IndexError('Digit {} out of range for mode size {}.'.format(digit, n))
            linear = linear * n + digit
        self.digits = digits
        self.shape = shape
        self.linear = linear

    @classmethod
    def from_linear(cls, linear, shape):
        shape = tuple(int(n) for n in shape)
        linear = int(linear)
        size = ambient_size(shape)
        if not 0 <= linear < size:
            raise IndexError('Linear index {} out of range for size {}.'.format(linear, size))
        digits = []
        for n in reversed(shape):
            linear, digit = divmod(linear, n)
            digits.append(digit)
        return cls(reversed(digits), shape)

    def __eq__(self, other):
        return isinstance(other, MultiIndex) and self.shape == other.shape and self.digits == other.digits

    def __hash__(self):
        return hash((self.shape, self.digits))

    def __repr__(self):
        return '{0.__class__.__name__}(digits={0.digits!r}, linear={0.linear})'.format(self)


def unravel(linear, shape):
    """
    Vectorized ``linear -> digits``: returns a tuple of ``P`` index arrays.
    """
    return np.unravel_index(np.asarray(linear, dtype=np.intp), shape)


def ravel(digits, shape):
    return np.ravel_multi_index(tuple(np.asarray(d, dtype=np.intp) for d in digits), shape)


def kron_row(v, i):
    """
    One entry of the Kronecker vector ``v`` in ``O(P)``, without materializing it.

    Args:
        v (KronVector):
        i (MultiIndex, int or sequence of digits): The 0-based row.
    """
    if isinstance(i, MultiIndex):
        if i.shape != v.shape:
            raise ShapeError('Index for shape {!r} used on a vector of shape {!r}.'.format(i.shape, v.shape))
    elif isinstance(i, (int, np.integer)):
        i = MultiIndex.from_linear(i, v.shape)
    else:
        i = MultiIndex(i, v.shape)
    value = 1.0
    for factor, digit in zip(v.factors, i.digits):
        value *= factor[digit]
    return float(value)


def kron_rows(factors, digits):
    """
    Rows ``digits`` of the Khatri-Rao product of ``factors`` (2-d arrays), as a ``len(digits[0]) x R`` array.
    """
    rows = factors[0][digits[0]]
    for factor, digit in zip(factors[1:], digits[1:]):
        rows = rows * factor[digit]
    return rows


class RowView(object):
    """
    Lazy row access to a :class:`KronVector` or :class:`KrMatrix`, usable wherever a dense array's rows are taken.
    """

    def __init__(self, structured):
        self.structured = structured
        if isinstance(structured, KronVector):
            self._factors = [factor[:, None] for factor in structured.factors]
            self.shape = (structured.size,)
        else:
            self._factors = list(structured.factors)
            self.shape = (structured.size, structured.R)

    def rows(self, indices):
        indices = np.asarray(indices, dtype=np.intp)
        if indices.size and (indices.min() < 0 or indices.max() >= self.shape[0]):
            raise IndexError('Row index out of range for {} rows.'.format(self.shape[0]))
        rows = kron_rows(self._factors, unravel(indices, self.structured.shape))
        if len(self.shape) == 1:
            return rows[:, 0]
        return rows


def materialize_vector(v, cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
    """
    The dense length-``Ĩ`` vector of ``v``.

    Raises:
        TooLargeError: if ``Ĩ`` exceeds the materialization cap.
    """
    check_cap(v.size, 'Kronecker vector of shape {!r}'.format(v.shape), cap)
    return functools.reduce(np.kron, v.factors)


def materialize_matrix(M, cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
    """
    The dense ``Ĩ x R`` Khatri-Rao matrix of ``M``.

    Raises:
        TooLargeError: if ``Ĩ`` exceeds the materialization cap.
    """
    check_cap(M.size, 'Khatri-Rao matrix of shape {!r}'.format(M.shape), cap)
    if M.P == 1:
        return np.array(M.factors[0])
    return functools.reduce(khatri_rao, M.factors)


def kr_gram(M):
    """
    ``M^T M`` as the entrywise product of the factor Gram matrices.
    """
    return functools.reduce(np.multiply, [factor.T @ factor for factor in M.factors])


def kr_norm(M, z):
    """
    ``||M z||_2`` via the Gram identity. Round-off that makes ``z^T G z`` slightly negative is clamped to zero.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (M.R,):
        raise ShapeError('Coefficient vector of shape {!r} does not match R={}.'.format(z.shape, M.R))
    return float(np.sqrt(max(z @ kr_gram(M) @ z, 0.0)))


def kr_matvec(M, z, cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
    """
    Dense ``M z`` of length ``Ĩ``, accumulated column by column so only one ``Ĩ``-vector is live at a time.
    """
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (M.R,):
        raise ShapeError('Coefficient vector of shape {!r} does not match R={}.'.format(z.shape, M.R))
    check_cap(M.size, 'Khatri-Rao product of shape {!r}'.format(M.shape), cap)
    result = np.zeros(M.size)
    for r in range(M.R):
        if z[r]:
            result += z[r] * functools.reduce(np.kron, [factor[:, r] for factor in M.factors])
    return result
