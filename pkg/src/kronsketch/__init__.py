from .bounds import BoundInputs
from .bounds import beta_kfjlt
from .bounds import j_combined
from .bounds import j_jin
from .bounds import j_jlt
from .bounds import j_sampling
from .bounds import j_simplified
from .bounds import j_subspace
from .config import load_config
from .core import KrMatrix
from .core import KronVector
from .core import MultiIndex
from .core import kr_norm
from .core import kron_row
from .core import materialize_matrix
from .core import materialize_vector
from .cp import CpTensor
from .cp import cp_als
from .cp import cp_distance_exact
from .cp import cp_distance_sketched
from .cp import read_cp
from .cp import write_cp
from .hadamard import RHT
from .hadamard import fwht
from .hadamard import pad_pow2
from .hadamard import rht_apply
from .ingest import build_digit_tensor
from .ingest import read_idx
from .ingest import write_idx
from .leverage import apply_sample_plan
from .leverage import draw_sample_plan
from .leverage import kr_leverage_upper
from .leverage import leverage_scores
from .regress import LsProblem
from .regress import audit_perp
from .regress import solve_sketched
from .sketch import apply_kr
from .sketch import apply_kron
from .sketch import make_sketch
from .sketch import sampling_distribution

try:
    from ._version import version as __version__
except ImportError:
    __version__ = '0.1.0'

__all__ = (
    'BoundInputs',
    'CpTensor',
    'KrMatrix',
    'KronVector',
    'LsProblem',
    'MultiIndex',
    'RHT',

    'apply_kr',
    'apply_kron',
    'apply_sample_plan',
    'audit_perp',
    'beta_kfjlt',
    'build_digit_tensor',
    'cp_als',
    'cp_distance_exact',
    'cp_distance_sketched',
    'draw_sample_plan',
    'fwht',
    'j_combined',
    'j_jin',
    'j_jlt',
    'j_sampling',
    'j_simplified',
    'j_subspace',
    'kr_leverage_upper',
    'kr_norm',
    'kron_row',
    'leverage_scores',
    'load_config',
    'make_sketch',
    'materialize_matrix',
    'materialize_vector',
    'pad_pow2',
    'read_cp',
    'read_idx',
    'rht_apply',
    'sampling_distribution',
    'solve_sketched',
    'write_cp',
    'write_idx',
)

load_config()
