"""
Embedding-dimension calculators. Each returns the right-hand side ``value`` of a ``J > value`` condition.

``ln`` is always the natural logarithm. The asymptotic bounds (:func:`j_simplified`, :func:`j_jin`) write a bare
``log`` whose base is selectable through ``log_base`` (``'e'``, ``'2'`` or ``'10'``); their absolute constants are
caller parameters defaulting to 1, so comparing them against the explicit bounds is qualitative only.
"""
import math
import warnings

from . import config
from .const import LOG_BASES

__all__ = (
    'BetaClampWarning',
    'BoundDomainError',
    'BoundInputs',

    'beta_kfjlt',
    'bound_rows',
    'j_combined',
    'j_jin',
    'j_jlt',
    'j_sampling',
    'j_simplified',
    'j_subspace',
    'j_subspace_eta',
    'jlt_via_subspace',
)


class BoundDomainError(ValueError):
    pass


class BetaClampWarning(UserWarning):
    pass


def _open_unit(name, value):
    value = float(value)
    if not 0 < value < 1:
        raise ValueError('{} must lie strictly between 0 and 1, got {!r}.'.format(name, value))
    return value


class BoundInputs(object):
    """
    Parameters shared by the calculators.

    Args:
        dims (sequence of int): Mode sizes ``I_0 .. I_{P-1}``.
        R (int): Number of columns of the embedded Khatri-Rao matrix.
        N (int): Number of vectors for the JL-type bounds.
        eps (float): Distortion, in ``(0, 1)``.
        delta (float): Failure probability, in ``(0, 1)``.
        eta (float): Failure probability of each mixing step, in ``(0, 1)``. Default: ``delta / (P + 1)``.
    """

    def __init__(self, dims, R=1, N=2, eps=0.5, delta=0.01, eta=None):
        self.dims = tuple(int(n) for n in dims)
        if not self.dims:
            raise ValueError('Need at least one mode size.')
        for n in self.dims:
            if n < 1:
                raise ValueError('Mode sizes must be at least 1, got {!r}.'.format(self.dims))
        self.R = int(R)
        self.N = int(N)
        if self.R < 1 or self.N < 1:
            raise ValueError('R and N must be at least 1, got R={} and N={}.'.format(R, N))
        self.eps = _open_unit('eps', eps)
        self.delta = _open_unit('delta', delta)
        self.eta = _open_unit('eta', self.delta / (self.P + 1) if eta is None else eta)

    @property
    def P(self):
        return len(self.dims)

    def replace(self, **changes):
        options = dict(dims=self.dims, R=self.R, N=self.N, eps=self.eps, delta=self.delta, eta=self.eta)
        if 'delta' in changes and 'eta' not in changes:
            options['eta'] = None
        options.update(changes)
        return BoundInputs(**options)

    def __eq__(self, other):
        return isinstance(other, BoundInputs) and (
            (self.dims, self.R, self.N, self.eps, self.delta, self.eta) ==
            (other.dims, other.R, other.N, other.eps, other.delta, other.eta)
        )

    __hash__ = None

    def __repr__(self):
        return '{0.__class__.__name__}(dims={0.dims!r}, R={0.R}, N={0.N}, eps={0.eps!r}, delta={0.delta!r}, ' \
               'eta={0.eta!r})'.format(self)


def log_function(base=config.Default('log_base', 'e')):
    base = str(config.resolve(base))
    if base == 'e':
        return math.log
    elif base == '2':
        return math.log2
    elif base == '10':
        return math.log10
    else:
        raise ValueError('Unknown log base {!r}, expected one of: {}.'.format(base, ', '.join(LOG_BASES)))


def j_subspace_eta(b):
    """
    Subspace embedding dimension for a given per-step failure probability ``b.eta``::

        (8/3) 2^P R^(P+1) eps^-2 ln(2R/eta) prod_p ln(2 I_p R/eta)
    """
    value = 8.0 / 3.0 * 2.0 ** b.P * float(b.R) ** (b.P + 1) / b.eps ** 2
    value *= math.log(2.0 * b.R / b.eta)
    for n in b.dims:
        value *= math.log(2.0 * n * b.R / b.eta)
    return value


def j_subspace(b):
    """
    Subspace embedding dimension of the KFJLT with the failure probability split as ``eta = delta / (P + 1)``::

        (8/3) 2^P R^(P+1) eps^-2 ln(2R(P+1)/delta) prod_p ln(2 I_p R (P+1)/delta)
    """
    value = 8.0 / 3.0 * 2.0 ** b.P * float(b.R) ** (b.P + 1) / b.eps ** 2
    value *= math.log(2.0 * b.R * (b.P + 1) / b.delta)
    for n in b.dims:
        value *= math.log(2.0 * n * b.R * (b.P + 1) / b.delta)
    return value


def j_jlt(b):
    """
    JL embedding dimension of the KFJLT for ``N`` vectors::

        (16/3) 4^P eps^-2 ln(4 N^2 (P+1)/delta) prod_p ln(4 I_p N^2 (P+1)/delta)
    """
    scale = 4.0 * b.N ** 2 * (b.P + 1) / b.delta
    value = 16.0 / 3.0 * 4.0 ** b.P / b.eps ** 2 * math.log(scale)
    for n in b.dims:
        value *= math.log(n * scale)
    return value


def jlt_via_subspace(b):
    """
    :func:`j_jlt` obtained from :func:`j_subspace` by embedding each pair difference as a 2-column Khatri-Rao matrix
    and union-bounding over the ``N**2`` pairs.
    """
    return j_subspace(b.replace(R=2, delta=b.delta / b.N ** 2))


def j_sampling(R, eps, eta, beta=1.0):
    """
    Rows needed by leverage score sampling with quality ``beta``: ``(8/3) R ln(2R/eta) / (beta eps^2)``.
    """
    eps = _open_unit('eps', eps)
    eta = _open_unit('eta', eta)
    if not 0 < beta <= 1:
        raise ValueError('beta must lie in (0, 1], got {!r}.'.format(beta))
    return 8.0 / 3.0 * R * math.log(2.0 * R / eta) / (beta * eps ** 2)


def j_simplified(b, C1=1.0, C2=1.0, log_base=config.Default('log_base', 'e')):
    """
    Simplified JL dimension ``C1 eps^-2 C2^P log(N/delta) prod_p log(I_p N/delta)``.

    Raises:
        BoundDomainError: unless ``N > max(P, 4)``, the assumption the simplification rests on.
    """
    if not b.N > max(b.P, 4):
        raise BoundDomainError('The simplified bound assumes N > max(P, 4); got N={} with P={}.'.format(b.N, b.P))
    log = log_function(log_base)
    value = C1 / b.eps ** 2 * float(C2) ** b.P * log(b.N / b.delta)
    for n in b.dims:
        value *= log(n * b.N / b.delta)
    return value


def j_jin(b, C=1.0, log_base=config.Default('log_base', 'e')):
    """
    Comparison bound ``C eps^-2 log^(2P-1)(PN/delta) log^4(eps^-1 log^P(PN/delta)) log(prod_p I_p)``, with the last
    log evaluated as a sum so huge ambient dimensions never overflow.

    Raises:
        BoundDomainError: if any log argument is not greater than 1.
    """
    log = log_function(log_base)
    outer = b.P * b.N / b.delta
    if outer <= 1:
        raise BoundDomainError('log argument PN/delta = {!r} must exceed 1.'.format(outer))
    inner = log(outer) ** b.P / b.eps
    if inner <= 1:
        raise BoundDomainError('log argument eps^-1 log^P(PN/delta) = {!r} must exceed 1.'.format(inner))
    if all(n == 1 for n in b.dims):
        raise BoundDomainError('log argument prod(I_p) = 1 must exceed 1.')
    return C / b.eps ** 2 * log(outer) ** (2 * b.P - 1) * log(inner) ** 4 * sum(log(n) for n in b.dims)


def j_combined(b, C=1.0, log_base=config.Default('log_base', 'e')):
    """
    The better of :func:`j_jlt` and :func:`j_jin`: either guarantee suffices on its own.
    """
    return min(j_jlt(b), j_jin(b, C=C, log_base=log_base))


def beta_kfjlt(b):
    """
    Sampling quality of the mixed Khatri-Rao matrix: ``beta^-1 = prod_p 2R ln(2 I_p R / eta)``, clamped to 1.
    """
    inverse = 1.0
    for n in b.dims:
        inverse *= 2.0 * b.R * math.log(2.0 * n * b.R / b.eta)
    beta = 1.0 / inverse
    if beta > 1:
        warnings.warn('beta={!r} exceeds 1 for {!r}; clamping to 1.'.format(beta, b), BetaClampWarning, stacklevel=2)
        beta = 1.0
    return beta


def bound_rows(dims, R, N, eps_values, delta_values, C=1.0, C1=1.0, C2=1.0,
               log_base=config.Default('log_base', 'e')):
    """
    Evaluate every calculator over the ``eps x delta`` grid. Bounds whose domain excludes a point yield ``None``.

    Yields: dicts with ``eps``, ``delta``, ``subspace``, ``jlt``, ``simplified``, ``jin``, ``combined``, ``beta``.
    """
    for eps in eps_values:
        for delta in delta_values:
            b = BoundInputs(dims, R=R, N=N, eps=eps, delta=delta)
            row = {
                'eps': b.eps,
                'delta': b.delta,
                'subspace': j_subspace(b),
                'jlt': j_jlt(b),
            }
            try:
                row['simplified'] = j_simplified(b, C1=C1, C2=C2, log_base=log_base)
            except BoundDomainError:
                row['simplified'] = None
            try:
                row['jin'] = j_jin(b, C=C, log_base=log_base)
                row['combined'] = min(row['jlt'], row['jin'])
            except BoundDomainError:
                row['jin'] = None
                row['combined'] = row['jlt']
            with warnings.catch_warnings():
                warnings.simplefilter('ignore', BetaClampWarning)
                row['beta'] = beta_kfjlt(b)
            yield row
