"""
The mixture supermartingale and Ville's inequality
==================================================

With a width-greedy design that reacts to past noise, the crossing
frequency of log M_t >= log(1/delta) stays below delta.
"""

# %%
import math

import numpy as np

from gpucb import mercer_synthetic, mixture_batch, mixture_trajectory, truncated_mixture

kernel, _ = mercer_synthetic(6, 1.0, 2.0)
grid = np.linspace(0, 1, 101)
log_M = mixture_batch(kernel, rho=1.0, sigma=1.0, grid=grid, T=200, n=2000, master=0)
peak = log_M.max(axis=1)
for delta in (0.01, 0.05, 0.1):
    print(f"delta={delta}: crossing rate {np.mean(peak >= math.log(1 / delta)):.4f}")

# %%
# Projecting onto the first N basis functions recovers the full process at N = rank.
traj = mixture_trajectory(kernel, 1.0, 1.0, grid, 100, seed=(0, 3))
for N in range(1, 7):
    print(N, round(float(truncated_mixture(traj, kernel, N).log_M[-1]), 4), "vs", round(float(traj.log_M[-1]), 4))
