"""
Information gain: greedy estimate against the eigendecay bound
==============================================================
"""

# %%
import numpy as np

from gpucb import greedy_infogain, mercer_synthetic, rho_schedule, schedule_consistency_check

grid = np.linspace(0, 1, 101)
for beta in (1.5, 2.0, 3.0):
    kernel, _ = mercer_synthetic(30, 1.0, beta)
    for rho in (1.0, rho_schedule(200, beta)):
        curve = greedy_infogain(kernel, grid, rho, 200)
        print(f"beta={beta} rho={rho:6.3f}: gamma_hat(200)={curve.gamma_hat[-1]:7.3f}"
              f"  bound={curve.gamma_bound[-1]:8.3f}")

# %%
# Both regret terms built from the bound grow like T^((3 + beta) / (2 + 2 beta)).
for beta in (2.0, 3.0):
    rep = schedule_consistency_check(beta)
    print(beta, round(rep.target_exponent, 4), round(rep.slope_sqrt_rho_gamma_T, 4), round(rep.slope_gamma_sqrtT, 4))
