import itertools
import math

import bounds_reference as reference
import pytest

from kronsketch.bounds import BoundDomainError
from kronsketch.bounds import BoundInputs
from kronsketch.bounds import beta_kfjlt
from kronsketch.bounds import bound_rows
from kronsketch.bounds import j_combined
from kronsketch.bounds import j_jin
from kronsketch.bounds import j_jlt
from kronsketch.bounds import j_sampling
from kronsketch.bounds import j_simplified
from kronsketch.bounds import j_subspace
from kronsketch.bounds import j_subspace_eta
from kronsketch.bounds import jlt_via_subspace
from kronsketch.bounds import log_function

GRID = list(itertools.product(
    [(16, 16, 16), (4, 8), (1024,)],
    [0.1, 0.5, 0.9],
    [0.001, 0.01, 0.1],
))


@pytest.mark.parametrize('dims,eps,delta', GRID)
def test_matches_reference(dims, eps, delta):
    b = BoundInputs(dims, R=2, N=8, eps=eps, delta=delta)
    assert j_subspace(b) == pytest.approx(reference.subspace(dims, 2, eps, delta), rel=1e-10)
    assert j_subspace_eta(b) == pytest.approx(reference.subspace_eta(dims, 2, eps, b.eta), rel=1e-10)
    assert j_jlt(b) == pytest.approx(reference.jlt(dims, 8, eps, delta), rel=1e-10)
    assert j_simplified(b) == pytest.approx(reference.simplified(dims, 8, eps, delta), rel=1e-10)
    assert j_jin(b) == pytest.approx(reference.jin(dims, 8, eps, delta), rel=1e-10)
    assert beta_kfjlt(b) == pytest.approx(reference.beta(dims, 2, b.eta), rel=1e-10)


@pytest.mark.parametrize('dims,eps,delta', GRID)
def test_jlt_from_subspace(dims, eps, delta):
    b = BoundInputs(dims, R=1, N=3, eps=eps, delta=delta)
    assert jlt_via_subspace(b) == pytest.approx(j_jlt(b), rel=1e-10)
    eta = delta / (b.N ** 2 * (b.P + 1))
    assert j_subspace_eta(b.replace(R=2, eta=eta)) == pytest.approx(j_jlt(b), rel=1e-10)


def test_default_eta_matches_subspace():
    b = BoundInputs((16, 16, 16), R=2, eps=0.5, delta=0.01)
    assert b.eta == pytest.approx(0.01 / 4)
    assert j_subspace_eta(b) == pytest.approx(j_subspace(b), rel=1e-12)


def test_subspace_unit_logs():
    b = BoundInputs((1,), R=1, eps=0.5, eta=2 / math.e)
    assert j_subspace_eta(b) == pytest.approx(8 / 3.0 * 2 / 0.25, rel=1e-12)


def test_documented_instances():
    b = BoundInputs((16, 16, 16), R=2, N=2, eps=0.5, delta=0.01)
    assert j_subspace(b) == pytest.approx(reference.subspace((16, 16, 16), 2, 0.5, 0.01), rel=1e-10)
    assert j_jlt(b) == pytest.approx(reference.jlt((16, 16, 16), 2, 0.5, 0.01), rel=1e-10)
    assert j_jin(b) == pytest.approx(reference.jin((16, 16, 16), 2, 0.5, 0.01), rel=1e-10)
    b = BoundInputs((16, 16, 16), R=2, eps=0.5, delta=0.01, eta=0.01)
    assert beta_kfjlt(b) == pytest.approx(reference.beta((16, 16, 16), 2, 0.01), rel=1e-10)


@pytest.mark.parametrize('bound', [j_subspace, j_jlt, j_simplified, j_jin])
def test_eps_scaling(bound):
    b = BoundInputs((8, 8), R=2, N=6, eps=0.5, delta=0.01)
    halved = b.replace(eps=0.25)
    if bound is j_jin:
        # The inner log also depends on eps.
        assert bound(halved) > 4 * bound(b)
    else:
        assert bound(halved) == pytest.approx(4 * bound(b), rel=1e-12)


@pytest.mark.parametrize('bound', [j_subspace, j_jlt, j_simplified])
def test_monotone(bound):
    b = BoundInputs((8, 8, 8), R=2, N=6, eps=0.5, delta=0.01)
    assert bound(b.replace(delta=0.001)) > bound(b)
    assert bound(b.replace(eps=0.4)) > bound(b)
    for p in range(3):
        dims = list(b.dims)
        dims[p] *= 2
        assert bound(b.replace(dims=dims)) > bound(b)


def test_simplified_unit_logs():
    b = BoundInputs((1,), N=5, eps=0.5, delta=0.5)
    assert j_simplified(b, log_base='10') == pytest.approx(4.0, rel=1e-12)


def test_simplified_c2_power():
    b = BoundInputs((4, 4, 4), N=6, eps=0.5, delta=0.01)
    assert j_simplified(b, C2=2.0) == pytest.approx(8 * j_simplified(b), rel=1e-12)
    assert j_simplified(b, C1=3.0) == pytest.approx(3 * j_simplified(b), rel=1e-12)


@pytest.mark.parametrize('N,P', [(4, 1), (4, 3), (5, 5), (2, 2)])
def test_simplified_domain(N, P):
    with pytest.raises(BoundDomainError) as excinfo:
        j_simplified(BoundInputs((4,) * P, N=N))
    assert 'N > max(P, 4)' in str(excinfo.value)


def test_jin_log_of_product():
    b = BoundInputs((8, 16, 4), N=2, eps=0.5, delta=0.01)
    doubled = b.replace(dims=(16, 32, 8))
    total = sum(math.log(n) for n in b.dims)
    assert j_jin(doubled) / j_jin(b) == pytest.approx((total + 3 * math.log(2)) / total, rel=1e-12)


def test_jin_huge_dimensions():
    b = BoundInputs((2 ** 40,) * 20, N=2, eps=0.5, delta=0.01)
    assert math.isfinite(j_jin(b))


def test_jin_domain():
    with pytest.raises(BoundDomainError):
        j_jin(BoundInputs((1, 1), N=2))
    with pytest.raises(BoundDomainError):
        j_jin(BoundInputs((4,), N=1, eps=0.9, delta=0.5))


def test_combined_is_minimum():
    for dims, eps, delta in GRID:
        b = BoundInputs(dims, N=2, eps=eps, delta=delta)
        combined = j_combined(b)
        assert combined <= j_jlt(b)
        assert combined <= j_jin(b)
        assert combined in (j_jlt(b), j_jin(b))


def test_beta_unit_case():
    b = BoundInputs((1,), R=1, eta=2 / math.e ** 2)
    assert beta_kfjlt(b) == pytest.approx(0.25, rel=1e-12)


def test_beta_decreasing():
    values = [beta_kfjlt(BoundInputs((n, 8), R=2, eta=0.01)) for n in (2, 4, 8, 16, 1024)]
    assert values == sorted(values, reverse=True)
    assert all(0 < value <= 1 for value in values)


def test_sampling_rows():
    assert j_sampling(4, 0.5, 0.1) == pytest.approx(8 / 3.0 * 4 * math.log(80) / 0.25, rel=1e-12)
    assert j_sampling(4, 0.5, 0.1, beta=0.5) == pytest.approx(2 * j_sampling(4, 0.5, 0.1), rel=1e-12)
    with pytest.raises(ValueError):
        j_sampling(4, 0.5, 0.1, beta=0)
    with pytest.raises(ValueError):
        j_sampling(4, 1.0, 0.1)


@pytest.mark.parametrize('options', [
    dict(dims=()),
    dict(dims=(0, 4)),
    dict(dims=(4,), eps=0),
    dict(dims=(4,), eps=1),
    dict(dims=(4,), delta=1.5),
    dict(dims=(4,), eta=-0.1),
    dict(dims=(4,), R=0),
    dict(dims=(4,), N=0),
])
def test_bad_inputs(options):
    with pytest.raises(ValueError):
        BoundInputs(**options)


def test_replace():
    b = BoundInputs((4, 4), R=3, delta=0.03)
    assert b.eta == pytest.approx(0.01)
    changed = b.replace(delta=0.3)
    assert changed.eta == pytest.approx(0.1)
    assert changed.R == 3
    assert b.replace(eps=0.2).eta == b.eta
    assert b.replace() == b


def test_log_function():
    assert log_function('2')(8) == 3
    assert log_function('10')(1000) == pytest.approx(3)
    assert log_function('e') is math.log
    with pytest.raises(ValueError):
        log_function('7')


def test_bound_rows():
    rows = list(bound_rows((16, 16, 16), 1, 2, [0.25, 0.5], [0.01, 0.1, 0.2]))
    assert len(rows) == 6
    assert [(row['eps'], row['delta']) for row in rows][:3] == [(0.25, 0.01), (0.25, 0.1), (0.25, 0.2)]
    for row in rows:
        assert row['simplified'] is None
        assert row['combined'] <= row['jlt']
        assert row['combined'] == min(row['jlt'], row['jin'])
        assert 0 < row['beta'] <= 1
    rows = list(bound_rows((16,), 1, 8, [0.5], [0.01]))
    assert rows[0]['simplified'] == pytest.approx(reference.simplified((16,), 8, 0.5, 0.01), rel=1e-10)
