import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpucb.errors import InputError, NumericalError
from gpucb.kernels import gram, matern, mercer_synthetic, squared_exponential
from gpucb.posterior import KernelRidge, elliptical_potential_audit, rkhs_norm

SE = squared_exponential(0.2)


def test_single_observation_closed_forms():
    s = KernelRidge(SE, 1.0).update(0.3, 2.0)
    np.testing.assert_allclose(s.chol, [[math.sqrt(2.0)]])
    np.testing.assert_allclose(s.alpha, [1.0])
    assert s.mean(0.3) == pytest.approx(1.0)
    assert s.width(0.3) == pytest.approx(math.sqrt(0.5), abs=1e-12)


def test_empty_state():
    s = KernelRidge(SE, 1.0)
    assert s.logdet == 0.0
    assert s.mean(0.7) == 0.0
    assert s.width(0.7) == 1.0
    np.testing.assert_array_equal(s.mean([0.1, 0.2]), [0.0, 0.0])


def test_duplicate_points_do_not_break():
    s = KernelRidge(SE, 1.0).update(0.5, 1.0).update(0.5, -1.0)
    assert s.logdet_reg == pytest.approx(math.log(3.0), abs=1e-14)
    np.testing.assert_allclose(s.chol @ s.chol.T, [[2.0, 1.0], [1.0, 2.0]], atol=1e-14)


@pytest.mark.parametrize("rho,expected", [(1.0, 1.0), (4.0, 0.4), (9.0, 0.2)])
def test_mean_shrinks_with_rho(rho, expected):
    assert KernelRidge(SE, rho).update(0.0, 2.0).mean(0.0) == pytest.approx(expected)


def test_width_at_rho_two():
    assert KernelRidge(SE, 2.0).update(0.1, 0.0).width(0.1) == pytest.approx(math.sqrt((1 - 1 / 3) / 2), abs=1e-12)


def test_cholesky_breakdown_carries_pivot():
    s = KernelRidge(SE, 1.0)
    s.rho = -2.0  # force a non-positive pivot
    with pytest.raises(NumericalError) as err:
        s.update(0.0, 1.0)
    assert err.value.value == pytest.approx(-1.0)


def test_bad_inputs():
    with pytest.raises(InputError):
        KernelRidge(SE, 0.0)
    with pytest.raises(InputError):
        KernelRidge(SE, 1.0).update(0.0, math.nan)
    with pytest.raises(InputError):
        KernelRidge(SE, 1.0).update(None, 1.0, index=0)


def _random_trajectory(kernel, t, seed, grid=None):
    rng = np.random.default_rng(seed)
    if grid is None:
        X = rng.uniform(0, 1, size=t)
    else:
        X = grid[rng.integers(0, grid.shape[0], t), 0]
    return X, rng.standard_normal(t)


@settings(max_examples=30, deadline=None)
@given(t=st.integers(1, 60), rho=st.sampled_from([0.1, 1.0, 3.0]), seed=st.integers(0, 2**31))
def test_state_invariants(t, rho, seed):
    k = matern(1.5, 0.2)
    X, Y = _random_trajectory(k, t, seed)
    s = KernelRidge(k, rho, capacity=2)
    logdets = [0.0]
    for x, y in zip(X, Y):
        s.update(x, y)
        logdets.append(s.logdet)
    A = gram(k, X) + rho * np.eye(t)
    assert np.linalg.norm(s.chol @ s.chol.T - A) <= 1e-8 * np.linalg.norm(A)
    assert np.linalg.norm(A @ s.alpha - Y) <= 1e-8 * max(1.0, np.linalg.norm(Y))
    assert s.logdet == pytest.approx(np.linalg.slogdet(np.eye(t) + gram(k, X) / rho)[1], abs=1e-9)
    assert min(logdets) >= 0 and np.all(np.diff(logdets) >= -1e-12)


@settings(max_examples=30, deadline=None)
@given(t=st.integers(1, 40), rank=st.integers(1, 10), rho=st.sampled_from([0.5, 1.0, 4.0]),
       seed=st.integers(0, 2**31))
def test_dual_matches_feature_space(t, rank, rho, seed):
    k, fmap = mercer_synthetic(rank, 1.0, 2.0)
    X, Y = _random_trajectory(k, t, seed)
    s = KernelRidge(k, rho)
    for x, y in zip(X, Y):
        s.update(x, y)
    E = fmap.embed(X)
    A = rho * np.eye(rank) + E.T @ E
    theta = np.linalg.solve(A, E.T @ Y)
    Q = np.linspace(0, 1, 23)
    Eq = fmap.embed(Q)
    np.testing.assert_allclose(s.mean(Q), Eq @ theta, atol=1e-7)
    primal_width = np.sqrt(np.einsum("ij,ji->i", Eq, np.linalg.solve(A, Eq.T)))
    np.testing.assert_allclose(s.width(Q), primal_width, atol=1e-7)
    assert s.logdet == pytest.approx(np.linalg.slogdet(np.eye(rank) + E.T @ E / rho)[1], abs=1e-8)


def test_grid_cache_matches_direct_queries():
    k = matern(2.5, 0.15)
    grid = np.linspace(0, 1, 31)[:, None]
    s = KernelRidge(k, 0.7, grid=grid, capacity=1)
    rng = np.random.default_rng(0)
    for _ in range(25):
        s.update(None, rng.standard_normal(), index=int(rng.integers(0, 31)))
    np.testing.assert_allclose(s.grid_mean(), s.mean(grid), atol=1e-10)
    np.testing.assert_allclose(s.grid_width(), s.width(grid), atol=1e-8)


def test_incremental_equals_batch():
    k = matern(1.5, 0.3)
    X, Y = _random_trajectory(k, 35, 11)
    inc = KernelRidge(k, 0.5)
    for x, y in zip(X, Y):
        inc.update(x, y)
    batch = KernelRidge.from_batch(k, 0.5, X, Y)
    np.testing.assert_allclose(inc.alpha, batch.alpha, atol=1e-8)
    assert inc.logdet == pytest.approx(batch.logdet, abs=1e-8)


def test_width_shrinks_after_update():
    k = squared_exponential(0.1)
    grid = np.linspace(0, 1, 51)[:, None]
    s = KernelRidge(k, 1.0, grid=grid)
    rng = np.random.default_rng(2)
    for _ in range(30):
        before = s.grid_width()
        s.update(None, 0.0, index=int(rng.integers(0, 51)))
        assert np.all(s.grid_width() <= before + 1e-12)


def test_copy_is_independent():
    s = KernelRidge(SE, 1.0).update(0.2, 1.0)
    c = s.copy().update(0.4, 2.0)
    assert s.t == 1 and c.t == 2
    assert s.mean(0.2) == pytest.approx(0.5)


def test_potential_audit_single_step():
    s = KernelRidge(SE, 2.0).update(0.0, 0.0)
    a = elliptical_potential_audit(s)
    assert a.product == pytest.approx(1.5)
    assert math.exp(a.logdet) == pytest.approx(1.5)


def test_potential_audit_empty_and_mismatch():
    s = KernelRidge(SE, 1.0)
    a = elliptical_potential_audit(s)
    assert (a.product, a.logdet, a.sum_sq) == (1.0, 0.0, 0.0)
    with pytest.raises(InputError):
        elliptical_potential_audit(s.update(0.0, 0.0), widths=[0.1, 0.2])


def test_potential_identity_and_sum_bound():
    k, _ = mercer_synthetic(8, 1.0, 2.0)
    rho = max(1.0, k.L)
    grid = np.linspace(0, 1, 41)[:, None]
    for seed in range(10):
        s = KernelRidge(k, rho, grid=grid)
        rng = np.random.default_rng(seed)
        for _ in range(50):
            s.update(None, 0.0, index=int(rng.integers(0, 41)))
        a = elliptical_potential_audit(s)
        assert a.residual <= 1e-6 * max(1.0, a.logdet)
        assert a.sum_sq <= 2.0 * a.logdet


def test_rkhs_norm_examples():
    assert rkhs_norm(SE, [0.5], [1.0]) == pytest.approx(1.0)
    assert rkhs_norm(SE, [0.1, 0.9], [0.0, 0.0]) == 0.0
    # k(z1, z2) = 0.5 for the squared exponential at distance s sqrt(2 ln 2)
    d = 0.2 * math.sqrt(2 * math.log(2))
    assert rkhs_norm(SE, [0.0, d], [1.0, 1.0]) == pytest.approx(math.sqrt(3.0))
    with pytest.raises(InputError):
        rkhs_norm(SE, [0.0, 0.1], [1.0])
