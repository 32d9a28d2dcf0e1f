import numpy as np
import pytest

from kronsketch.core import KrMatrix
from kronsketch.core import KronVector
from kronsketch.core import MultiIndex
from kronsketch.core import RowView
from kronsketch.core import ShapeError
from kronsketch.core import TooLargeError
from kronsketch.core import ambient_size
from kronsketch.core import kr_gram
from kronsketch.core import kr_matvec
from kronsketch.core import kr_norm
from kronsketch.core import kron_row
from kronsketch.core import materialize_matrix
from kronsketch.core import materialize_vector
from kronsketch.core import unravel


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def test_materialize_basis_vectors():
    v = KronVector([[1, 0], [0, 1]])
    assert materialize_vector(v).tolist() == [0, 1, 0, 0]


def test_materialize_row_major():
    v = KronVector([[1, 2], [10, 20, 30]])
    assert materialize_vector(v).tolist() == [10, 20, 30, 20, 40, 60]


def test_materialize_identity_factors():
    M = KrMatrix([np.eye(2), np.eye(2)])
    dense = materialize_matrix(M)
    assert dense.shape == (4, 2)
    assert dense[:, 0].tolist() == [1, 0, 0, 0]
    assert dense[:, 1].tolist() == [0, 0, 0, 1]


def test_materialize_single_factor(rng):
    factor = rng.standard_normal((5, 3))
    dense = materialize_matrix(KrMatrix([factor]))
    assert np.array_equal(dense, factor)
    dense[0, 0] = 99
    assert factor[0, 0] != 99


def test_matrix_columns_match_vectors(rng):
    M = KrMatrix([rng.standard_normal((n, 3)) for n in (4, 2, 8)])
    dense = materialize_matrix(M)
    for r in range(3):
        assert np.allclose(dense[:, r], materialize_vector(M.column(r)), rtol=0, atol=1e-14)


def test_too_large():
    v = KronVector([np.ones(4), np.ones(4)])
    with pytest.raises(TooLargeError) as excinfo:
        materialize_vector(v, cap=10)
    assert 'too large to materialize' in str(excinfo.value)
    with pytest.raises(TooLargeError):
        materialize_matrix(KrMatrix([np.ones((4, 1)), np.ones((4, 1))]), cap=15)


def test_ambient_size_overflow():
    with pytest.raises(OverflowError):
        ambient_size((2 ** 32, 2 ** 32))
    assert ambient_size((16, 16, 16)) == 4096


def test_mismatched_rank():
    with pytest.raises(ShapeError):
        KrMatrix([np.ones((4, 2)), np.ones((4, 3))])


@pytest.mark.parametrize('factors', [
    [],
    [[]],
    [[1.0, 2.0], []],
])
def test_bad_vector(factors):
    with pytest.raises(ValueError):
        KronVector(factors)


def test_factors_are_frozen(rng):
    source = rng.standard_normal(4)
    v = KronVector([source, source])
    source[0] = 1e9
    assert v.factors[0][0] != 1e9
    with pytest.raises(ValueError):
        v.factors[0][0] = 1.0


def test_kron_row_example():
    v = KronVector([[1, 2], [3, 4]])
    assert kron_row(v, (1, 0)) == 6
    assert kron_row(v, MultiIndex((1, 0), v.shape)) == 6
    assert kron_row(v, 2) == 6


def test_kron_row_out_of_range():
    v = KronVector([[1, 2], [3, 4]])
    with pytest.raises(IndexError):
        kron_row(v, (2, 0))
    with pytest.raises(IndexError):
        kron_row(v, 4)
    with pytest.raises(ShapeError):
        kron_row(v, MultiIndex((0, 0, 0), (2, 2, 2)))


def test_kron_row_full_sweep(rng):
    v = KronVector([rng.standard_normal(n) for n in (3, 4, 5)])
    dense = materialize_vector(v)
    assert np.allclose([kron_row(v, i) for i in range(v.size)], dense, rtol=1e-15, atol=0)


def test_multi_index_round_trip():
    shape = (16, 16, 16)
    for linear in range(4096):
        index = MultiIndex.from_linear(linear, shape)
        assert index.linear == linear
        assert MultiIndex(index.digits, shape).linear == linear


def test_multi_index_matches_unravel():
    shape = (3, 5, 2)
    linear = np.arange(30)
    digits = unravel(linear, shape)
    for i in linear:
        assert MultiIndex.from_linear(i, shape).digits == tuple(int(d[i]) for d in digits)


def test_multi_index_huge_shape():
    shape = (2 ** 20, 2 ** 20, 2 ** 20)
    index = MultiIndex((1, 2, 3), shape)
    assert index.linear == (1 * 2 ** 20 + 2) * 2 ** 20 + 3
    assert MultiIndex.from_linear(index.linear, shape) == index


def test_norm_identity(rng):
    for _ in range(20):
        v = KronVector([rng.standard_normal(n) for n in (4, 8, 2)])
        assert v.norm == pytest.approx(np.linalg.norm(materialize_vector(v)), rel=1e-12)


def test_gram_and_norm(rng):
    M = KrMatrix([rng.standard_normal((n, 4)) for n in (3, 4, 5)])
    dense = materialize_matrix(M)
    assert np.allclose(kr_gram(M), dense.T @ dense, rtol=1e-12, atol=1e-12)
    z = rng.standard_normal(4)
    assert kr_norm(M, z) == pytest.approx(np.linalg.norm(dense @ z), rel=1e-10)
    assert np.allclose(kr_matvec(M, z), dense @ z, rtol=1e-12, atol=1e-12)


def test_kr_norm_of_zero_difference(rng):
    x = KronVector([rng.standard_normal(n) for n in (4, 4)])
    M = KrMatrix.from_columns([x, x])
    assert kr_norm(M, [1, -1]) == pytest.approx(0, abs=1e-7)


def test_kr_norm_bad_coefficients(rng):
    M = KrMatrix([rng.standard_normal((3, 2))])
    with pytest.raises(ShapeError):
        kr_norm(M, [1, 2, 3])


def test_hstack_and_columns(rng):
    a = KrMatrix([rng.standard_normal((n, 2)) for n in (3, 4)])
    b = KrMatrix([rng.standard_normal((n, 1)) for n in (3, 4)])
    stacked = a.hstack(b)
    assert stacked.R == 3
    assert stacked.column(2) == b.column(0)
    assert len(stacked.columns()) == 3
    with pytest.raises(ShapeError):
        a.hstack(KrMatrix([np.ones((3, 1)), np.ones((5, 1))]))


def test_row_view(rng):
    M = KrMatrix([rng.standard_normal((n, 2)) for n in (4, 2, 3)])
    dense = materialize_matrix(M)
    rows = [0, 5, 23, 5]
    assert np.allclose(RowView(M).rows(rows), dense[rows], rtol=1e-15, atol=0)
    v = M.column(1)
    assert np.allclose(RowView(v).rows(rows), materialize_vector(v)[rows], rtol=1e-15, atol=0)
    with pytest.raises(IndexError):
        RowView(M).rows([24])


def test_repr():
    assert repr(KronVector([[1.0], [1.0, 2.0]])) == 'KronVector(shape=(1, 2))'
    assert repr(KrMatrix([np.ones((2, 3))])) == 'KrMatrix(shape=(2,), R=3)'
    assert repr(MultiIndex((1, 1), (2, 2))) == 'MultiIndex(digits=(1, 1), linear=3)'
