import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gpucb.confidence import (
    FeatureEllipsoid,
    RadiusSpec,
    abbasi_radius,
    chowdhury_radius,
    draw_noise,
    ellipsoid_contains,
    log_mixture,
    mixture_batch,
    mixture_trajectory,
    noise_radius,
    selfnorm_stat_chowdhury,
    selfnorm_stat_features,
    selfnorm_stat_gram,
    trajectory_seeds,
    truncated_mixture,
)
from gpucb.errors import ConfigurationError, InputError, NumericalError, UnsupportedOperation
from gpucb.kernels import gram, matern, mercer_synthetic
from gpucb.posterior import KernelRidge

GRID = np.linspace(0, 1, 41)


def test_abbasi_radius_examples():
    spec = RadiusSpec("abbasi", sigma=1.0, delta=0.05, D=1.0, rho=4.0)
    assert abbasi_radius(0.0, spec) == pytest.approx(math.sqrt(2 * math.log(20)) + 2, abs=1e-12)
    assert abbasi_radius(0.0, spec) == pytest.approx(4.44775, abs=1e-5)
    assert abbasi_radius(0.0, RadiusSpec("abbasi", delta=1.0, D=0.0, rho=1.0)) == 0.0
    assert abbasi_radius(2 * math.log(2), RadiusSpec("abbasi", delta=1.0, D=0.0, rho=1.0)) == pytest.approx(
        math.sqrt(2 * math.log(2)), abs=1e-12)


def test_chowdhury_radius_examples():
    spec = RadiusSpec("chowdhury", sigma=1.0, delta=1.0, eta=0.0)
    assert chowdhury_radius([[1.0]], spec) == pytest.approx(math.sqrt(math.log(2)), abs=1e-12)
    spec = RadiusSpec("chowdhury", sigma=2.0, delta=0.1, eta=0.5)
    assert chowdhury_radius(np.zeros((0, 0)), spec) == pytest.approx(2 * math.sqrt(2 * math.log(10)))


def test_radius_spec_validation():
    with pytest.raises(ConfigurationError):
        RadiusSpec("abbasi", rho=None)
    with pytest.raises(ConfigurationError):
        RadiusSpec("chowdhury", eta=-1.0)
    with pytest.raises(ConfigurationError):
        RadiusSpec("other")
    with pytest.raises(ConfigurationError):
        abbasi_radius(0.0, RadiusSpec("chowdhury", eta=0.0))


def test_rules_coincide_at_rho_one_eta_zero():
    K = gram(matern(1.5, 0.3), np.linspace(0, 1, 12))
    a = noise_radius(np.linalg.slogdet(np.eye(12) + K)[1], 1.3, 0.05)
    c = chowdhury_radius(K, RadiusSpec("chowdhury", sigma=1.3, delta=0.05, eta=0.0))
    assert a == pytest.approx(c, rel=1e-12)


def test_statistic_examples():
    assert selfnorm_stat_gram([[1.0]], [0.0], 1.0) == 0.0
    assert selfnorm_stat_gram([[1.0]], [2.0], 1.0) == pytest.approx(math.sqrt(2))
    assert selfnorm_stat_chowdhury([[1.0]], [0.0], 0.0) == 0.0
    assert selfnorm_stat_chowdhury([[1.0]], [2.0], 0.0) == pytest.approx(math.sqrt(2))
    assert selfnorm_stat_gram(np.zeros((0, 0)), [], 1.0) == 0.0


def test_statistic_input_errors():
    with pytest.raises(InputError):
        selfnorm_stat_gram([[1.0, 0.0], [0.0, 1.0]], [1.0], 1.0)
    with pytest.raises(NumericalError):
        selfnorm_stat_chowdhury(np.ones((2, 2)), [1.0, 1.0], 0.0)


def test_chowdhury_continuity_in_eta():
    K = gram(matern(2.5, 0.2), np.linspace(0, 1, 10))
    eps = np.random.default_rng(0).standard_normal(10)
    a = selfnorm_stat_chowdhury(K, eps, 0.0)
    b = selfnorm_stat_chowdhury(K, eps, 1e-10)
    assert abs(a - b) <= 1e-6


@settings(max_examples=50, deadline=None)
@given(rank=st.integers(1, 8), t=st.integers(1, 30), rho=st.sampled_from([0.5, 1.0, 4.0]),
       seed=st.integers(0, 2**31))
def test_gram_form_equals_feature_form(rank, t, rho, seed):
    k, fmap = mercer_synthetic(rank, 1.0, 2.0)
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, t)
    eps = rng.standard_normal(t)
    g = selfnorm_stat_gram(gram(k, X), eps, rho)
    f = selfnorm_stat_features(fmap.embed(X), eps, rho)
    assert g == pytest.approx(f, rel=1e-7, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31), t=st.integers(2, 25))
def test_monotone_in_rho_and_eta(seed, t):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 1, t)
    K = gram(matern(1.5, 0.3), X)
    eps = rng.standard_normal(t)
    stats = [selfnorm_stat_gram(K, eps, r) for r in (1.0, 2.0, 4.0, 8.0)]
    assert all(b <= a + 1e-12 for a, b in zip(stats, stats[1:]))
    cstats = [selfnorm_stat_chowdhury(K, eps, e) for e in (1e-6, 0.5, 1.0)]
    assert all(b >= a - 1e-12 for a, b in zip(cstats, cstats[1:]))


def test_log_mixture_formula():
    assert log_mixture(2.0, 1.0, 2.0) == pytest.approx(0.5 - 0.5)
    with pytest.raises(InputError):
        log_mixture(1.0, 0.0, 0.0)


def test_trajectory_zero_horizon():
    tr = mixture_trajectory(matern(1.5, 0.2), 1.0, 1.0, GRID, 0)
    np.testing.assert_array_equal(tr.M, [1.0])


@pytest.mark.parametrize("design", ["fixed", "random", "width_greedy"])
@pytest.mark.parametrize("noise", ["gaussian", "rademacher"])
def test_trajectory_matches_batch_gram_formula(design, noise):
    k = matern(1.5, 0.2)
    tr = mixture_trajectory(k, 0.7, 0.5, GRID, 30, seed=(3, 4), design=design, noise=noise)
    assert tr.log_M[0] == 0.0
    for t in (1, 10, 30):
        K = gram(k, tr.points[:t])
        stat = selfnorm_stat_gram(K, tr.eps[:t], 0.7)
        logdet = np.linalg.slogdet(np.eye(t) + K / 0.7)[1]
        assert tr.stat[t] == pytest.approx(stat, rel=1e-8, abs=1e-10)
        assert tr.log_M[t] == pytest.approx(stat**2 / (2 * 0.25) - 0.5 * logdet, rel=1e-8, abs=1e-8)
    batch = mixture_batch(k, 0.7, 0.5, GRID, 30, 3, master=3, design=design, noise=noise, start=3)
    np.testing.assert_allclose(batch[1], tr.log_M, rtol=1e-9, atol=1e-9)


def test_trajectory_is_deterministic():
    k = matern(2.5, 0.2)
    a = mixture_trajectory(k, 1.0, 1.0, GRID, 40, seed=(9, 2))
    b = mixture_trajectory(k, 1.0, 1.0, GRID, 40, seed=(9, 2))
    np.testing.assert_array_equal(a.log_M, b.log_M)


def test_seed_children_are_distinct():
    d0, n0 = trajectory_seeds(0, 0)
    d1, n1 = trajectory_seeds(0, 1)
    draws = {tuple(np.random.default_rng(s).integers(0, 2**32, 4)) for s in (d0, n0, d1, n1)}
    assert len(draws) == 4


def test_noise_kinds():
    rng = np.random.default_rng(0)
    r = draw_noise("rademacher", 0.5, 1000, rng)
    assert set(np.unique(r)) == {-0.5, 0.5}
    with pytest.raises(ConfigurationError):
        draw_noise("cauchy", 1.0, 3, rng)


def test_truncation_at_full_rank_matches():
    k, _ = mercer_synthetic(4, 1.0, 2.0)
    tr = mixture_trajectory(k, 1.0, 1.0, GRID, 40, seed=(0, 1))
    full = truncated_mixture(tr, k, 4)
    np.testing.assert_allclose(full.log_M, tr.log_M, atol=1e-9)
    np.testing.assert_allclose(truncated_mixture(tr, k, 10).log_M, tr.log_M, atol=1e-9)


def test_truncated_components_converge_monotonically():
    k, _ = mercer_synthetic(6, 1.0, 2.0)
    for s in range(10):
        tr = mixture_trajectory(k, 1.0, 1.0, GRID, 60, seed=(1, s))
        parts = [truncated_mixture(tr, k, N) for N in range(1, 7)]
        stat_gap = [abs(p.stat[-1] - tr.stat[-1]) for p in parts]
        logdet_gap = [abs(p.logdet[-1] - tr.logdet[-1]) for p in parts]
        assert np.all(np.diff(stat_gap) <= 1e-9)
        assert np.all(np.diff(logdet_gap) <= 1e-9)


def test_truncation_with_zero_noise():
    k, _ = mercer_synthetic(5, 1.0, 2.0)
    tr = mixture_trajectory(k, 1.0, 1.0, GRID, 20, seed=(0, 0))
    tr.eps = np.zeros_like(tr.eps)
    for N in range(1, 6):
        m = truncated_mixture(tr, k, N)
        assert np.all(m.log_M <= 1e-15)


def test_truncation_errors():
    k, _ = mercer_synthetic(3, 1.0, 2.0)
    tr = mixture_trajectory(k, 1.0, 1.0, GRID, 5)
    with pytest.raises(InputError):
        truncated_mixture(tr, k, 0)
    with pytest.raises(UnsupportedOperation):
        truncated_mixture(tr, matern(1.5, 0.2), 2)


def test_ellipsoid_trivial_cases():
    k, _ = mercer_synthetic(5, 1.0, 2.0)
    s = KernelRidge(k, 4.0)
    assert ellipsoid_contains(s, (np.zeros((0, 1)), []), 0.0)
    centers = np.array([[0.2], [0.7]])
    coef = np.array([1.0, -0.5])
    from gpucb.posterior import rkhs_norm

    coef = coef / rkhs_norm(k, centers, coef)
    spec = RadiusSpec("abbasi", sigma=1.0, delta=0.05, D=1.0, rho=4.0)
    tracker = FeatureEllipsoid(k, 4.0, (centers, coef))
    assert tracker.distance() == pytest.approx(2.0)
    assert ellipsoid_contains(s, (centers, coef), abbasi_radius(0.0, spec))
    with pytest.raises(UnsupportedOperation):
        ellipsoid_contains(KernelRidge(matern(1.5, 0.2), 1.0), (centers, coef), 1.0)


def test_trajectory_csv_rows():
    k, _ = mercer_synthetic(4, 1.0, 2.0)
    tr = mixture_trajectory(k, 1.0, 1.0, GRID, 5)
    rows = tr.rows(0.05, kernel=k)
    assert len(rows) == 6 and rows[0][0] == 0
    # at rho = 1 the two noise radii differ only through the jitter
    for row in rows:
        assert row[4] == pytest.approx(row[5], rel=1e-8)
