import math

import numpy as np
import pytest

from gpucb.bandit import regret_exponent, rho_schedule
from gpucb.errors import ConfigurationError, InputError
from gpucb.infogain import greedy_infogain, loglog_slope, schedule_consistency_check, vakili_bound
from gpucb.kernels import gram, matern, mercer_synthetic, squared_exponential

GRID = np.linspace(0, 1, 101)


def test_greedy_first_steps():
    curve = greedy_infogain(squared_exponential(0.2), GRID, 1.0, 3)
    assert curve.gamma_hat[0] == 0.0
    assert curve.gamma_hat[1] == pytest.approx(0.5 * math.log(2.0))


def test_single_point_grid_repeats():
    curve = greedy_infogain(squared_exponential(0.2), [0.5], 1.0, 2)
    assert curve.gamma_hat[2] == pytest.approx(0.5 * math.log(3.0))
    assert curve.selected.tolist() == [0, 0]


def test_greedy_matches_direct_logdet():
    k = matern(2.5, 0.1)
    curve = greedy_infogain(k, GRID, 0.5, 30)
    X = GRID[curve.selected]
    for t in (1, 7, 30):
        ref = 0.5 * np.linalg.slogdet(np.eye(t) + gram(k, X[:t]) / 0.5)[1]
        assert curve.gamma_hat[t] == pytest.approx(ref, abs=1e-9)


def test_curve_invariants():
    k, _ = mercer_synthetic(12, 1.0, 2.0)
    curve = greedy_infogain(k, GRID, 1.0, 80)
    assert np.all(curve.gamma_hat >= 0)
    assert np.all(np.diff(curve.gamma_hat) >= 0)
    assert np.all(np.diff(curve.increments) <= 1e-9)
    assert curve.certified
    assert np.all(curve.gamma_hat[1:] <= curve.gamma_bound[1:])


def test_gamma_shrinks_with_rho_on_fixed_selection():
    k, _ = mercer_synthetic(10, 1.0, 2.0)
    X = GRID[greedy_infogain(k, GRID, 1.0, 40).selected]
    K = gram(k, X)
    vals = [np.linalg.slogdet(np.eye(40) + K / r)[1] for r in (1.0, 2.0, 4.0, 8.0)]
    assert np.all(np.diff(vals) < 0)


def test_matern_curve_is_uncertified():
    curve = greedy_infogain(matern(1.5, 0.2), GRID, 1.0, 10, B=1.0)
    assert curve.gamma_bound is not None and not curve.certified
    assert greedy_infogain(matern(1.5, 0.2), GRID, 1.0, 10).gamma_bound is None


def test_vakili_spot_value():
    ln101 = math.log(101)
    assert vakili_bound(100, 1, 1, 1, 1, 2) == pytest.approx(10 * math.sqrt(ln101) + ln101, rel=1e-14)
    assert vakili_bound(100, 1, 1, 1, 1, 2) == pytest.approx(26.098, abs=1e-3)


def test_vakili_substitution_rho_equals_Lt():
    C, B, L, beta = 1.7, 1.3, 2.2, 2.5
    expected = ((C * B * B / L) ** (1 / beta) * math.log(2) ** (-1 / beta) + 1) * math.log(2)
    for t in (1, 10, 1000):
        assert vakili_bound(t, L * t, C, B, L, beta) == pytest.approx(expected, rel=1e-12)


def test_vakili_decreases_in_rho():
    vals = [vakili_bound(50, r, 1, 1, 1, 2) for r in (1, 2, 4, 8)]
    assert np.all(np.diff(vals) < 0)


def test_vakili_errors():
    with pytest.raises(ConfigurationError):
        vakili_bound(10, 1, 1, 1, 1, 1.0)
    with pytest.raises(InputError):
        vakili_bound(0, 1, 1, 1, 1, 2)


def test_loglog_slope_exact_power():
    x = np.array([1.0, 10.0, 100.0])
    assert loglog_slope(x, 3 * x**0.75) == pytest.approx(0.75)


def test_schedule_identity_power_of_two():
    rho = rho_schedule(4096, 3)
    assert rho == pytest.approx(8.0)
    assert (4096 / rho) ** (1 / 3) == pytest.approx(8.0)


@pytest.mark.parametrize("beta", [2.0, 3.0])
def test_schedule_consistency(beta):
    rep = schedule_consistency_check(beta)
    assert rep.passed
    assert rep.target_exponent == regret_exponent(beta)
    assert rep.power_error <= 1e-9


def test_schedule_slope_range_beta_two():
    rep = schedule_consistency_check(2.0)
    assert 0.73 <= rep.slope_sqrt_rho_gamma_T <= 0.93
