"""
Incremental kernel ridge regression
===================================

The regression state grows by one Cholesky row per observation. The widths
recorded at selection time multiply out to the information-gain determinant.
"""

# %%
import numpy as np

from gpucb import KernelRidge, elliptical_potential_audit, matern

grid = np.linspace(0, 1, 201)
f = np.sin(6 * grid)
state = KernelRidge(matern(2.5, 0.15), rho=0.1, grid=grid)
rng = np.random.default_rng(1)
for j in rng.integers(0, grid.size, 15):
    state.update(None, f[j] + 0.05 * rng.standard_normal(), index=j)

mean, width = state.grid_mean(), state.grid_width()
print("max |mean - f| on the grid:", round(float(np.abs(mean - f).max()), 3))
print("width range:", round(float(width.min()), 4), "to", round(float(width.max()), 4))

# %%
# log prod(1 + w_s^2) equals log det(I + K / rho).
audit = elliptical_potential_audit(state)
print("log product:", audit.log_product, " logdet:", audit.logdet, " residual:", audit.residual)
