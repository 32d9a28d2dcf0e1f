import math

import numpy as np
import pytest

from kronsketch.bounds import j_sampling
from kronsketch.core import KrMatrix
from kronsketch.core import RowView
from kronsketch.core import materialize_matrix
from kronsketch.core import materialize_vector
from kronsketch.leverage import DenseDistribution
from kronsketch.leverage import FactorizedDistribution
from kronsketch.leverage import NegativeMassError
from kronsketch.leverage import UniformDistribution
from kronsketch.leverage import apply_sample_plan
from kronsketch.leverage import check_subspace_embedding
from kronsketch.leverage import draw_sample_plan
from kronsketch.leverage import full_plan
from kronsketch.leverage import kr_leverage_upper
from kronsketch.leverage import leverage_scores
from kronsketch.leverage import orthonormal_basis


def test_orthonormal_columns():
    A = np.zeros((4, 2))
    A[0, 0] = A[1, 1] = 1
    profile = leverage_scores(A)
    assert np.allclose(profile.scores, [1, 1, 0, 0], rtol=0, atol=1e-14)
    assert profile.coherence == pytest.approx(1)
    assert profile.rank == 2


def test_flat_column():
    profile = leverage_scores(np.full((4, 1), 0.5))
    assert np.allclose(profile.scores, 0.25, rtol=0, atol=1e-14)
    assert profile.coherence == pytest.approx(0.25)
    assert profile.rank == 1


def test_qr_matches_svd():
    rng = np.random.default_rng(0)
    for _ in range(20):
        A = rng.standard_normal((8, 3))
        assert np.allclose(leverage_scores(A, 'qr').scores, leverage_scores(A, 'svd').scores, rtol=0, atol=1e-10)


def test_all_zero():
    profile = leverage_scores(np.zeros((5, 2)))
    assert profile.rank == 0
    assert profile.coherence == 0
    assert not profile.scores.any()


def test_rank_deficient():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((10, 1))
    A = np.hstack([a, 2 * a, rng.standard_normal((10, 1))])
    for method in ('qr', 'svd'):
        profile = leverage_scores(A, method)
        assert profile.rank == 2
        assert profile.scores.sum() == pytest.approx(2)


def test_scores_sum_to_rank():
    rng = np.random.default_rng(2)
    for shape in [(16, 3), (5, 5), (3, 7)]:
        A = rng.standard_normal(shape)
        profile = leverage_scores(A)
        assert profile.rank == min(shape)
        assert profile.scores.sum() == pytest.approx(min(shape))
        assert np.all(profile.scores <= 1)
        assert profile.coherence >= profile.rank / shape[0] - 1e-12


def test_unknown_method():
    with pytest.raises(ValueError):
        orthonormal_basis(np.eye(3), method='lu')


def test_kr_leverage_flat():
    H4 = np.array([[1, 1], [1, -1], [1, 1], [1, -1]]) / 2.0
    assert kr_leverage_upper(KrMatrix([H4])) == pytest.approx(2 / 4.0)
    assert kr_leverage_upper(KrMatrix([H4, H4])) == pytest.approx(2 / 4.0 * 2 / 4.0)
    spiked = [np.vstack([np.eye(2), np.zeros((n - 2, 2))]) for n in (4, 8)]
    assert kr_leverage_upper(KrMatrix(spiked)) == pytest.approx(1.0)


def test_kr_leverage_upper_bound():
    rng = np.random.default_rng(3)
    for _ in range(200):
        P = int(rng.integers(2, 4))
        R = int(rng.integers(1, 4))
        dims = rng.choice([4, 8, 16], size=P)
        M = KrMatrix([rng.standard_normal((n, R)) for n in dims])
        exact = leverage_scores(materialize_matrix(M)).coherence
        assert exact <= kr_leverage_upper(M) + 1e-10


def test_uniform_plan_rescale():
    plan = draw_sample_plan(UniformDistribution(4096), 100, replacement=True, seed=0)
    assert np.allclose(plan.rescale, math.sqrt(4096 / 100.0), rtol=1e-14, atol=0)
    assert plan.J == 100
    assert plan.replacement


def test_without_replacement_distinct():
    plan = draw_sample_plan(UniformDistribution(50), 50, replacement=False, seed=1)
    assert sorted(plan.indices.tolist()) == list(range(50))
    plan = draw_sample_plan(np.arange(1.0, 11.0), 7, replacement=False, seed=2)
    assert len(set(plan.indices.tolist())) == 7


def test_without_replacement_too_many():
    with pytest.raises(ValueError):
        draw_sample_plan(UniformDistribution(10), 11, replacement=False)
    with pytest.raises(ValueError):
        draw_sample_plan([0.5, 0.5, 0, 0], 3, replacement=False)
    with pytest.raises(ValueError):
        draw_sample_plan(UniformDistribution(10), 0)


def test_negative_mass():
    with pytest.raises(NegativeMassError):
        draw_sample_plan([0.5, 0.7, -0.2], 2)


def test_dense_distribution_normalizes():
    q = DenseDistribution([1, 1, 2])
    assert q.probs.tolist() == [0.25, 0.25, 0.5]
    assert q.support == 3


def test_empirical_frequency():
    plan = draw_sample_plan(UniformDistribution(16), 10 ** 5, replacement=True, seed=3)
    counts = np.bincount(plan.indices, minlength=16) / 10 ** 5
    standard_error = math.sqrt(1 / 16.0 * 15 / 16.0 / 10 ** 5)
    assert np.all(np.abs(counts - 1 / 16.0) <= 4 * standard_error)


def test_factorized_distribution():
    marginals = [[0.5, 0.5, 0], [0.1, 0.2, 0.3, 0.4]]
    q = FactorizedDistribution(marginals)
    dense = q.dense()
    assert dense.sum() == pytest.approx(1)
    assert np.allclose(q.prob(np.arange(12)), dense, rtol=1e-15, atol=0)
    assert q.support == 8
    plan = draw_sample_plan(q, 8, replacement=False, seed=4)
    assert set(plan.indices.tolist()) == set(np.flatnonzero(dense).tolist())
    assert np.all(q.draw(np.random.default_rng(5), 1000) < 12)
    assert not np.any(dense[q.draw(np.random.default_rng(5), 1000)] == 0)


def test_full_plan_is_identity():
    A = np.random.default_rng(6).standard_normal((32, 3))
    plan = full_plan(32)
    assert np.array_equal(apply_sample_plan(plan, A), A)


def test_apply_plan_to_row_view():
    rng = np.random.default_rng(7)
    M = KrMatrix([rng.standard_normal((n, 2)) for n in (4, 4)])
    plan = draw_sample_plan(UniformDistribution(16), 5, seed=8)
    assert np.allclose(apply_sample_plan(plan, RowView(M)), apply_sample_plan(plan, materialize_matrix(M)),
                       rtol=1e-15, atol=0)
    v = M.column(0)
    assert np.allclose(apply_sample_plan(plan, RowView(v)), apply_sample_plan(plan, materialize_vector(v)),
                       rtol=1e-15, atol=0)


def test_apply_plan_wrong_size():
    plan = draw_sample_plan(UniformDistribution(16), 5, seed=9)
    with pytest.raises((ValueError, IndexError)):
        apply_sample_plan(plan, np.ones((8, 2)))


def test_unbiased_with_replacement():
    rng = np.random.default_rng(10)
    x = rng.standard_normal(16)
    q = DenseDistribution(rng.uniform(0.5, 1.5, size=16))
    values = np.array([
        np.sum(apply_sample_plan(draw_sample_plan(q, 4, seed=seed), x) ** 2)
        for seed in range(10 ** 4)
    ])
    standard_error = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean() - x @ x) <= 3.5 * standard_error


def test_exact_leverage_sampling_embeds():
    rng = np.random.default_rng(11)
    U = orthonormal_basis(rng.standard_normal((256, 4)))
    q = leverage_scores(U).scores
    eps, eta = 0.5, 0.1
    J = int(math.ceil(j_sampling(4, eps, eta))) + 1
    good = 0
    for seed in range(200):
        squared, ok = check_subspace_embedding(apply_sample_plan(draw_sample_plan(q, J, seed=seed), U), eps)
        assert squared.size == 4
        good += ok
    assert good >= 0.85 * 200


def test_check_subspace_embedding():
    squared, ok = check_subspace_embedding(np.eye(3), 0.1)
    assert ok
    assert np.allclose(squared, 1)
    squared, ok = check_subspace_embedding(np.diag([1.0, 2.0]), 0.5)
    assert not ok
