"""
Sketched least squares ``min_z ||S (X z - y)||`` over a Khatri-Rao design ``X`` and the audit of the two conditions
that make the sketched solution near-optimal.
"""
import numpy as np
import scipy.linalg

from . import config
from .const import DEFAULT_MATERIALIZE_CAP
from .const import DEFAULT_RANK_RTOL
from .core import ShapeError
from .core import TooLargeError
from .core import kr_gram
from .core import kr_matvec
from .core import materialize_matrix
from .leverage import numerical_rank
from .sketch import SketchRankError
from .util import frozen

__all__ = (
    'ConsistentSystemError',
    'LsProblem',
    'LsReport',

    'audit_perp',
    'solve_sketched',
)


class ConsistentSystemError(ValueError):
    pass


class LsProblem(object):
    """
    Overdetermined system ``X z ≈ y`` with a full column rank Khatri-Rao design.

    Args:
        design (KrMatrix): ``X``, ``Ĩ x R``.
        rhs (array): Dense ``y`` of length ``Ĩ``.
    """

    def __init__(self, design, rhs, rtol=config.Default('rank_rtol', DEFAULT_RANK_RTOL)):
        self.design = design
        self.rhs = frozen(rhs, ndim=1)
        if self.rhs.size != design.size:
            raise ShapeError('Right-hand side has {} entries, the design has {} rows.'.format(
                self.rhs.size, design.size))
        if design.size < design.R:
            raise ValueError('Design with {} rows and R={} columns is not overdetermined.'.format(
                design.size, design.R))
        if design.size * design.R <= config.resolve(config.Default('materialize_cap', DEFAULT_MATERIALIZE_CAP)):
            singular_values = scipy.linalg.svdvals(materialize_matrix(design))
        else:
            singular_values = np.sqrt(np.clip(scipy.linalg.eigvalsh(kr_gram(design))[::-1], 0, None))
        rank = numerical_rank(singular_values, (design.size, design.R), rtol)
        if rank < design.R:
            raise ValueError('Design matrix has rank {} < R={}; it must have full column rank.'.format(
                rank, design.R))

    @property
    def R(self):
        return self.design.R


class LsReport(object):
    """
    Outcome of :func:`solve_sketched`. ``opt`` and ``ratio`` are ``None`` when the exact optimum was not computed
    (design too large) or is zero.
    """

    def __init__(self, z, residual, sketched_residual, opt=None, ratio=None, sigma2_min=None, perp_ratio=None):
        self.z = frozen(z, ndim=1)
        self.residual = float(residual)
        self.sketched_residual = float(sketched_residual)
        self.opt = opt
        self.ratio = ratio
        self.sigma2_min = sigma2_min
        self.perp_ratio = perp_ratio

    def __repr__(self):
        return '{0.__class__.__name__}(residual={0.residual!r}, opt={0.opt!r}, ratio={0.ratio!r})'.format(self)


def solve_sketched(problem, operator, audit=False):
    """
    Solve the sketched problem with a thin QR of ``S X``, then report the true residual of the sketched solution.

    Args:
        audit (bool): Also run :func:`audit_perp` and store its two quantities on the report.

    Raises:
        SketchRankError: if ``S X`` is rank deficient (``J`` too small or an unlucky draw).
    """
    design = problem.design
    if operator.shape != design.shape:
        raise ShapeError('Sketch built for shape {!r} used on a design of shape {!r}.'.format(
            operator.shape, design.shape))
    if operator.J < problem.R:
        raise SketchRankError('J={} is smaller than R={}; the sketched design cannot have full rank.'.format(
            operator.J, problem.R))
    sketched_design = operator.apply_kr(design)
    sketched_rhs = operator.apply_dense(problem.rhs)
    Q, Rm = scipy.linalg.qr(sketched_design, mode='economic')
    rank = numerical_rank(scipy.linalg.svdvals(Rm), sketched_design.shape)
    if rank < problem.R:
        raise SketchRankError('Sketched design has rank {} < R={} (J={}, seed={!r}).'.format(
            rank, problem.R, operator.J, operator.seed))
    z = scipy.linalg.solve_triangular(Rm, Q.T @ sketched_rhs)
    sketched_residual = np.linalg.norm(sketched_design @ z - sketched_rhs)
    residual = np.linalg.norm(kr_matvec(design, z) - problem.rhs)

    opt = ratio = None
    try:
        X = materialize_matrix(design)
    except TooLargeError:
        pass
    else:
        z_opt = scipy.linalg.lstsq(X, problem.rhs)[0]
        opt = float(np.linalg.norm(X @ z_opt - problem.rhs))
        if opt > 0:
            ratio = float(residual / opt)

    report = LsReport(z, residual, sketched_residual, opt=opt, ratio=ratio)
    if audit:
        report.sigma2_min, report.perp_ratio = audit_perp(problem, operator)
    return report


def audit_perp(problem, operator):
    """
    The two quantities behind the near-optimality guarantee:
    ``sigma_min^2(S Φ U)`` and ``||(S Φ U)^T S Φ y_perp||^2 / OPT^2``, with ``U`` an orthonormal basis of
    ``range(X)`` and ``y_perp`` the part of ``y`` outside it.

    Raises:
        ConsistentSystemError: if ``OPT`` is zero, which makes the second quantity undefined.
        TooLargeError: if the design is too large to materialize.
    """
    X = materialize_matrix(problem.design)
    U = scipy.linalg.svd(X, full_matrices=False)[0][:, :problem.R]
    y = np.asarray(problem.rhs)
    y_perp = y - U @ (U.T @ y)
    opt = np.linalg.norm(y_perp)
    if opt <= 1e-12 * max(np.linalg.norm(y), np.finfo(float).tiny):
        raise ConsistentSystemError('The system is consistent (OPT = {!r}); the audit ratio is undefined.'.format(opt))
    sketched_basis = operator.apply_dense(U)
    sigma2_min = float(scipy.linalg.svdvals(sketched_basis)[-1] ** 2)
    cross = sketched_basis.T @ operator.apply_dense(y_perp)
    return sigma2_min, float(cross @ cross / opt ** 2)
