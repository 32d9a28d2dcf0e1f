"""
Normalized Walsh-Hadamard transforms and randomized Hadamard transforms ``Φ = H D``.

``H_n`` is the Sylvester Hadamard matrix scaled by ``1/sqrt(n)`` so it is orthonormal and symmetric. The fast
transform runs in ``O(n log n)``; an optional Cython kernel is used for 1-d inputs unless the
``PUREPYTHONKRONSKETCH`` environment variable is set.
"""
import os

import numpy as np
from scipy.linalg import hadamard as sylvester

from .util import frozen
from .util import is_pow2
from .util import make_rng
from .util import next_pow2

try:
    if os.environ.get('PUREPYTHONKRONSKETCH'):
        raise ImportError('Cython speedups are disabled.')
    from ._hadamard import fwht_inplace as _fwht_inplace
except ImportError:
    _fwht_inplace = None

__all__ = (
    'NotPowerOfTwoError',
    'RHT',
    'RademacherDiagonal',

    'fwht',
    'fwht_pure',
    'hadamard_matrix',
    'pad_pow2',
    'rht_apply',
)


class NotPowerOfTwoError(ValueError):
    pass


def check_length(n):
    if not is_pow2(n):
        raise NotPowerOfTwoError('Length {} is not a power of two; zero-pad it to {} with pad_pow2().'.format(
            n, next_pow2(n)))


def fwht_pure(x):
    """
    ``H_n x`` along the first axis with numpy butterflies. Trailing axes are transformed independently.
    """
    x = np.array(x, dtype=np.float64, copy=True, order='C')
    n = x.shape[0]
    check_length(n)
    rest = x.shape[1:]
    h = 1
    while h < n:
        blocks = x.reshape((n // (2 * h), 2, h) + rest)
        top = blocks[:, 0].copy()
        blocks[:, 0] += blocks[:, 1]
        blocks[:, 1] *= -1
        blocks[:, 1] += top
        h *= 2
    x /= np.sqrt(n)
    return x


def fwht(x, axis=0):
    """
    Fast normalized Walsh-Hadamard transform of ``x`` along ``axis``. Returns a new array.

    Raises:
        NotPowerOfTwoError: if the transformed axis is not a power of two.
    """
    x = np.asarray(x, dtype=np.float64)
    if axis != 0:
        return np.moveaxis(fwht(np.moveaxis(x, axis, 0)), 0, axis)
    if x.ndim == 1 and _fwht_inplace is not None:
        check_length(x.shape[0])
        buf = np.array(x, dtype=np.float64, copy=True, order='C')
        _fwht_inplace(buf)
        return buf
    return fwht_pure(x)


def hadamard_matrix(n):
    """
    Dense ``H_n``, for tests and small cases.
    """
    check_length(n)
    return sylvester(n).astype(np.float64) / np.sqrt(n)


def pad_pow2(x, axis=0):
    """
    Zero-pad ``x`` along ``axis`` up to the next power of two. Already conforming inputs are returned as is.
    """
    x = np.asarray(x)
    n = x.shape[axis]
    target = next_pow2(n)
    if target == n:
        return x
    widths = [(0, 0)] * x.ndim
    widths[axis] = (0, target - n)
    return np.pad(x, widths, mode='constant')


class RademacherDiagonal(object):
    """
    Diagonal of independent ``±1`` signs.
    """

    def __init__(self, signs, seed=None):
        signs = frozen(signs, ndim=1)
        if not np.all(np.abs(signs) == 1):
            raise ValueError('Rademacher signs must all be +1 or -1.')
        self.signs = signs
        self.size = signs.size
        self.seed = seed

    @classmethod
    def draw(cls, size, seed=None):
        rng = make_rng(seed)
        return cls(rng.integers(0, 2, size=int(size)) * 2 - 1, seed=seed)

    def __eq__(self, other):
        return isinstance(other, RademacherDiagonal) and np.array_equal(self.signs, other.signs)

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(size={0.size}, seed={0.seed!r})'.format(self)


class RHT(object):
    """
    Randomized Hadamard transform ``Φ = H_n D`` for one mode.

    Args:
        size (int): Power of two.
        seed: Seed for the sign diagonal; ignored when ``diag`` is given.
        diag (RademacherDiagonal): Explicit signs.
    """

    def __init__(self, size, seed=None, diag=None):
        size = int(size)
        check_length(size)
        if diag is None:
            diag = RademacherDiagonal.draw(size, seed)
        elif diag.size != size:
            raise ValueError('Diagonal of size {} does not fit a transform of size {}.'.format(diag.size, size))
        self.size = size
        self.seed = seed
        self.diag = diag

    def _signs_for(self, x):
        if x.shape[0] != self.size:
            raise ValueError('Expected {} rows, got shape {!r}.'.format(self.size, x.shape))
        return self.diag.signs.reshape((-1,) + (1,) * (x.ndim - 1))

    def apply(self, x):
        """
        ``H D x`` along the first axis.
        """
        x = np.asarray(x, dtype=np.float64)
        return fwht(self._signs_for(x) * x)

    def transpose_apply(self, y):
        """
        ``D H y``, the inverse of :meth:`apply`.
        """
        y = np.asarray(y, dtype=np.float64)
        return self._signs_for(y) * fwht(y)

    def dense(self):
        return hadamard_matrix(self.size) * self.diag.signs[None, :]

    def __eq__(self, other):
        return isinstance(other, RHT) and self.diag == other.diag

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(size={0.size}, seed={0.seed!r})'.format(self)


def rht_apply(transform, x):
    return transform.apply(x)
