import math

import numpy as np
import pytest

from gpucb.bandit import (
    REGRET_HEADER,
    Environment,
    gp_ucb_step,
    make_environment,
    matern_regret_exponent,
    regret_exponent,
    rho_schedule,
    run_episode,
)
from gpucb.confidence import RadiusSpec
from gpucb.errors import ConfigurationError
from gpucb.kernels import matern, matern_eigendecay_beta, mercer_synthetic, squared_exponential
from gpucb.posterior import KernelRidge, rkhs_norm

GRID = np.linspace(0, 1, 41)


def test_rho_schedule_examples():
    assert rho_schedule(1024, 2) == pytest.approx(10.079368399, rel=1e-9)
    assert rho_schedule(1, 3.7, c=2.5) == 2.5
    assert rho_schedule(4096, 3) == pytest.approx(8.0, rel=1e-15)
    with pytest.raises(ConfigurationError):
        rho_schedule(100, 1.0)


def test_regret_exponents():
    assert regret_exponent(2) == pytest.approx(5 / 6)
    assert matern_regret_exponent(0.5, 1) == pytest.approx(5 / 6)
    assert regret_exponent(1e6) == pytest.approx(0.5, abs=1e-5)
    for nu in (0.5, 1.5, 2.5, 3.7):
        for d in (1, 2, 3, 5):
            assert matern_regret_exponent(nu, d) == regret_exponent(matern_eigendecay_beta(nu, d))
            closed_form = (nu + 2 * d) / (2 * nu + 2 * d)
            assert matern_regret_exponent(nu, d) == pytest.approx(closed_form, rel=4 * np.finfo(float).eps)


def test_environment_norm_check():
    k = matern(1.5, 0.2)
    with pytest.raises(ConfigurationError):
        Environment(k, [0.5], [2.0], GRID, 0.1, D=1.0)
    env = Environment(k, [0.5], [1.0], GRID, 0.1, D=1.0)
    assert env.x_star[0] == 0.5
    assert env.f_max == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        Environment(k, [0.5], [1.0], np.zeros((0, 1)), 0.1)


def test_make_environment_scales_norm():
    k, _ = mercer_synthetic(6, 1.0, 2.0)
    env = make_environment(k, GRID, 0.1, D=2.0, norm_fraction=0.5, seed=3)
    assert rkhs_norm(k, *env.f_star) == pytest.approx(1.0)
    assert env.values[env.star_index] == env.values.max()


def test_first_step_breaks_ties_at_lowest_index():
    k = squared_exponential(0.2)
    env = Environment(k, [0.3], [0.5], GRID, 0.0, D=1.0)
    state = KernelRidge(k, 1.0, grid=GRID)
    j, state, rec = gp_ucb_step(state, RadiusSpec("abbasi", sigma=0.0, rho=1.0), env)
    assert j == 0
    assert rec.width[0] == pytest.approx(1.0)


def test_chowdhury_rule_rejected_in_loop():
    k = squared_exponential(0.2)
    env = Environment(k, [0.3], [0.5], GRID, 0.0, D=1.0)
    with pytest.raises(ConfigurationError):
        gp_ucb_step(KernelRidge(k, 1.0, grid=GRID), RadiusSpec("chowdhury", eta=0.1), env)


def test_single_point_grid():
    k = matern(1.5, 0.2)
    env = Environment(k, [0.4], [0.3], [0.4], 0.1, D=1.0, seed=0)
    res = run_episode(env, 1.0, 25)
    assert set(res.record.index) == {0}
    assert res.final_regret == 0.0


def test_noiseless_run_locks_onto_peak():
    grid = np.linspace(0, 1, 6)
    env = Environment(squared_exponential(0.15), grid[2:3], [1.0], grid, 0.0, D=1.0)
    res = run_episode(env, 1.0, 400)
    idx = np.array(res.record.index)
    # last miss on this fixture is round 235
    assert np.all(idx[250:] == 2)
    assert np.all(np.array(res.record.r)[250:] == 0.0)


def test_record_invariants():
    k, _ = mercer_synthetic(6, 1.0, 2.0)
    env = make_environment(k, GRID, 0.3, D=1.0, seed=5)
    res = run_episode(env, 1.0, 60)
    r = np.array(res.record.r)
    R = np.array(res.record.R)
    assert np.all(r >= 0)
    assert np.all(np.diff(R) >= 0)
    assert R.tolist() == np.cumsum(r).tolist()
    prefix_min = np.minimum.accumulate(r)
    assert np.all(np.diff(prefix_min) <= 0)
    rows = res.record.rows()
    assert len(rows[0]) == len(REGRET_HEADER)
    assert [row[0] for row in rows] == list(range(1, 61))


def test_episode_is_deterministic():
    k, _ = mercer_synthetic(6, 1.0, 2.0)
    a = run_episode(make_environment(k, GRID, 0.3, seed=(4, 2)), 2.0, 50)
    b = run_episode(make_environment(k, GRID, 0.3, seed=(4, 2)), 2.0, 50)
    assert a.record.rows() == b.record.rows()


def test_optimism_and_chain_on_covered_rounds():
    k, _ = mercer_synthetic(5, 1.0, 2.0)
    rho = max(1.0, k.L)
    for seed in range(20):
        env = make_environment(k, GRID, 0.5, D=1.0, seed=(8, seed))
        res = run_episode(env, rho, 60)
        rec = res.record
        for t in range(60):
            if res.covered[t]:
                assert rec.ucb[t] >= env.f_max - 1e-9
                assert rec.r[t] <= 2 * rec.U[t] * rec.width[t] + 1e-9


def test_summary_keys():
    k, _ = mercer_synthetic(4, 1.0, 2.0)
    res = run_episode(make_environment(k, GRID, 0.1, seed=1), 1.0, 10)
    s = res.summary()
    assert set(s) == {"T", "final_R", "rho", "final_U", "final_logdet", "coverage", "audit"}
    assert s["coverage"] in (True, False)
    assert res.audit.residual < 1e-9
