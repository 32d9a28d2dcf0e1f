"""
CP tensors ``T = sum_r a_r^(0) ∘ ... ∘ a_r^(P-1)``, their distances, a plain CP-ALS and the on-disk factor format.
"""
import functools
import os
import re
import warnings

import numpy as np
import scipy.linalg
from scipy.linalg import khatri_rao

from . import config
from .const import DEFAULT_MATERIALIZE_CAP
from .core import KrMatrix
from .core import ShapeError
from .core import check_cap
from .core import kr_norm
from .core import materialize_matrix
from .hadamard import pad_pow2
from .util import make_rng

__all__ = (
    'CpTensor',
    'GramClampWarning',
    'StackedKr',
    'ZeroDistanceError',

    'cp_als',
    'cp_distance_exact',
    'cp_distance_sketched',
    'random_cp',
    'read_cp',
    'write_cp',
)

FACTOR_FILE = 'factor_{}.bin'
FACTOR_FILE_RE = re.compile(r'^factor_(\d+)\.bin$')
HEADER_DTYPE = np.dtype('<u8')
DATA_DTYPE = np.dtype('<f8')


class ZeroDistanceError(ValueError):
    pass


class GramClampWarning(UserWarning):
    pass


class CpTensor(object):
    """
    A CP tensor held by its factor matrices (``I_p x R`` each).
    """

    def __init__(self, factors):
        self.kr = KrMatrix(factors)
        self.factors = self.kr.factors

    @property
    def shape(self):
        return self.kr.shape

    @property
    def rank(self):
        return self.kr.R

    @property
    def P(self):
        return self.kr.P

    def norm(self):
        return kr_norm(self.kr, np.ones(self.rank))

    def full(self, cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
        """
        Dense tensor of shape :attr:`shape`.
        """
        return materialize_matrix(self.kr, cap).sum(axis=1).reshape(self.shape)

    def padded(self):
        """
        The same tensor with every mode zero-padded to a power of two.
        """
        return CpTensor([pad_pow2(factor, axis=0) for factor in self.factors])

    def __eq__(self, other):
        return isinstance(other, CpTensor) and self.kr == other.kr

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(shape={0.shape!r}, rank={0.rank})'.format(self)


class StackedKr(object):
    """
    The difference ``A - B`` of two CP tensors as one Khatri-Rao matrix ``[A_p B_p]`` and coefficients
    ``u = [1 .. 1, -1 .. -1]``, so that ``vec(A - B) = matrix @ u``.
    """

    def __init__(self, a, b):
        if a.shape != b.shape:
            raise ShapeError('CP tensors have different shapes: {!r} vs {!r}.'.format(a.shape, b.shape))
        self.a = a
        self.b = b
        self.matrix = a.kr.hstack(b.kr)
        self.u = np.concatenate([np.ones(a.rank), -np.ones(b.rank)])

    @property
    def shape(self):
        return self.matrix.shape

    def norm(self):
        return kr_norm(self.matrix, self.u)

    def padded(self):
        return StackedKr(self.a.padded(), self.b.padded())


def cp_distance_exact(a, b, method='gram'):
    """
    ``||A - B||_F``. ``'gram'`` uses the factor Gram identity and never forms the tensors; ``'dense'`` subtracts the
    materialized tensors.
    """
    if method == 'gram':
        return StackedKr(a, b).norm()
    elif method == 'dense':
        if a.shape != b.shape:
            raise ShapeError('CP tensors have different shapes: {!r} vs {!r}.'.format(a.shape, b.shape))
        return float(np.linalg.norm(a.full() - b.full()))
    else:
        raise ValueError('Unknown method {!r}, expected "gram" or "dense".'.format(method))


def cp_distance_sketched(a, b, operator):
    """
    ``||S (A ⊙ ... ) u||`` for the stacked difference, i.e. the sketched estimate of ``||A - B||_F``.
    """
    stacked = StackedKr(a, b)
    if operator.shape != stacked.shape:
        raise ShapeError('Sketch built for shape {!r} used on CP tensors of shape {!r}.'.format(
            operator.shape, stacked.shape))
    return float(np.linalg.norm(operator.apply_kr(stacked.matrix) @ stacked.u))


def random_cp(shape, rank, seed=None):
    rng = make_rng(seed)
    return CpTensor([rng.standard_normal((n, rank)) for n in shape])


def _solve_gram(mttkrp, gram, position):
    U, s, _ = scipy.linalg.svd(gram)
    if not s.size or s[0] <= 0:
        return np.zeros_like(mttkrp)
    floor = 1e-12 * s[0]
    if s[-1] < floor:
        warnings.warn('Gram matrix of mode {} is near singular (condition {:.3g}); clamping its spectrum.'.format(
            position, s[0] / max(s[-1], np.finfo(float).tiny)), GramClampWarning, stacklevel=3)
        s = np.maximum(s, floor)
    return (mttkrp @ U / s) @ U.T


def cp_als(tensor, rank, iters=50, tol=1e-6, seed=None, callback=None,
           cap=config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
    """
    Rank-``rank`` CP approximation of a dense tensor by alternating least squares.

    Each sweep solves for one factor at a time against the matricized tensor and the Khatri-Rao product of the
    others. After a sweep the columns of factors ``1 .. P-1`` are normalized and their norms moved into factor 0.

    Args:
        iters (int): Maximum number of sweeps.
        tol (float): Stop when the relative error changes by less than this between sweeps.
        seed: Seed of the random initial factors.
        callback: Called as ``callback(sweep, relative_error)`` after every sweep.

    Returns: :class:`CpTensor`
    """
    tensor = np.asarray(tensor, dtype=np.float64)
    check_cap(tensor.size, 'Tensor of shape {!r}'.format(tensor.shape), cap)
    if rank < 1:
        raise ValueError('CP rank must be positive, got {}.'.format(rank))
    rng = make_rng(seed)
    shape = tensor.shape
    P = tensor.ndim
    factors = [rng.standard_normal((n, rank)) for n in shape]
    grams = [factor.T @ factor for factor in factors]
    tensor_norm = np.linalg.norm(tensor)
    last = np.moveaxis(tensor, P - 1, 0).reshape(shape[P - 1], -1)
    previous = None
    for sweep in range(iters):
        for n in range(P):
            others = [factors[q] for q in range(P) if q != n]
            if others:
                kr = functools.reduce(khatri_rao, others)
                gram = functools.reduce(np.multiply, [grams[q] for q in range(P) if q != n])
            else:
                kr = np.ones((1, rank))
                gram = np.ones((rank, rank))
            mttkrp = np.moveaxis(tensor, n, 0).reshape(shape[n], -1) @ kr
            factors[n] = _solve_gram(mttkrp, gram, n)
            grams[n] = factors[n].T @ factors[n]

        # kr holds the factors other than the last one, so this is the mode-(P-1) unfolding of the model.
        error = np.linalg.norm(last - factors[P - 1] @ kr.T)
        relative = error / tensor_norm if tensor_norm > 0 else error

        for n in range(1, P):
            norms = np.linalg.norm(factors[n], axis=0)
            nonzero = norms > 0
            factors[n][:, nonzero] /= norms[nonzero]
            factors[0][:, nonzero] *= norms[nonzero]
        grams = [factor.T @ factor for factor in factors]

        if callback is not None:
            callback(sweep, relative)
        if previous is not None and abs(previous - relative) < tol:
            break
        previous = relative
    return CpTensor(factors)


def write_cp(path, cp):
    """
    Store ``cp`` as ``path/factor_<p>.bin``: two little-endian ``uint64`` (rows, columns), then the factor in
    column-major little-endian ``float64``.
    """
    os.makedirs(path, exist_ok=True)
    for position, factor in enumerate(cp.factors):
        with open(os.path.join(path, FACTOR_FILE.format(position)), 'wb') as fh:
            fh.write(np.array(factor.shape, dtype=HEADER_DTYPE).tobytes())
            fh.write(np.asarray(factor, dtype=DATA_DTYPE).tobytes(order='F'))


def _read_factor(filename):
    with open(filename, 'rb') as fh:
        payload = fh.read()
    if len(payload) < 2 * HEADER_DTYPE.itemsize:
        raise ValueError('{}: file too short for the factor header.'.format(filename))
    rows, columns = (int(n) for n in np.frombuffer(payload[:2 * HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE))
    expected = 2 * HEADER_DTYPE.itemsize + rows * columns * DATA_DTYPE.itemsize
    if len(payload) != expected:
        raise ValueError('{}: expected {} bytes for a {} x {} factor, got {}.'.format(
            filename, expected, rows, columns, len(payload)))
    data = np.frombuffer(payload[2 * HEADER_DTYPE.itemsize:], dtype=DATA_DTYPE)
    return data.reshape((rows, columns), order='F').astype(np.float64)


def read_cp(path):
    """
    Load a CP tensor written by :func:`write_cp`. Factor files must be numbered ``0 .. P-1`` without gaps.
    """
    positions = sorted(
        int(match.group(1))
        for match in (FACTOR_FILE_RE.match(name) for name in os.listdir(path))
        if match
    )
    if not positions:
        raise ValueError('{}: no factor_<p>.bin files found.'.format(path))
    if positions != list(range(len(positions))):
        raise ValueError('{}: factor files are not numbered 0..{} ({!r}).'.format(path, len(positions) - 1, positions))
    return CpTensor([_read_factor(os.path.join(path, FACTOR_FILE.format(p))) for p in positions])
