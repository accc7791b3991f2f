"""Kernel ridge regression maintained by rank-one Cholesky bordering.

The state holds the lower Cholesky factor ``L`` of ``K_t + rho I`` and the
forward-solved responses ``z = L^{-1} Y``. From those:

* posterior mean     ``f_t(x) = k_t(x)^T (K_t + rho I)^{-1} Y = (L^{-1} k_t(x)) . z``
* posterior width    ``||(rho id + V_t)^{-1/2} k(., x)||_H``
                     ``= sqrt((k(x, x) - ||L^{-1} k_t(x)||^2) / rho)``
* log-determinant    ``log det(K_t + rho I) = 2 sum log L_ss``

When a candidate grid is attached, ``W = L^{-1} K(X_t, grid)`` is bordered
alongside ``L`` so that mean and width over the whole grid cost ``O(t G)`` per
round, and selecting a grid point needs no triangular solve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import InputError, NumericalError
from .kernels import KernelSpec, as_points, cross_gram, gram

__all__ = ["KernelRidge", "PotentialAudit", "elliptical_potential_audit", "rkhs_norm"]

RADICAND_TOL = 1e-9


def _clamp_radicand(v, what="width"):
    v = np.asarray(v, dtype=float)
    if np.any(v < -RADICAND_TOL):
        raise NumericalError(f"{what} radicand is negative beyond roundoff: {v.min():.3e}",
                             float(v.min()))
    return np.maximum(v, 0.0)


class KernelRidge:
    """Incremental regression state for GP-UCB.

    Parameters
    ----------
    kernel : KernelSpec
    rho : float
        Regularisation, added once to the Gram matrix.
    grid : array-like, optional
        Candidate points whose mean and width are kept up to date.
    """

    def __init__(self, kernel: KernelSpec, rho: float, grid=None, capacity: int = 64):
        if not rho > 0:
            raise InputError(f"rho must be positive, got {rho}")
        self.kernel = kernel
        self.rho = float(rho)
        self.t = 0
        self._cap = max(int(capacity), 1)
        self._dim = None
        self._X = None
        self._y = np.zeros(self._cap)
        self._L = np.zeros((self._cap, self._cap))
        self._z = np.zeros(self._cap)
        self.logdet_reg = 0.0
        # width of each point at the moment it was added (before the update)
        self.selection_widths = []
        self._alpha = None

        self.grid = None
        if grid is not None:
            self.grid = as_points(grid, kernel.dim)
            G = self.grid.shape[0]
            self._dim = self.grid.shape[1]
            self._X = np.zeros((self._cap, self._dim))
            self._W = np.zeros((self._cap, G))
            self._grid_diag = kernel.diag(self.grid)
            self._grid_var = self._grid_diag.copy()  # k(x,x) - ||W[:, x]||^2
            self._grid_mean = np.zeros(G)

    # -- storage -----------------------------------------------------------
    def _grow(self):
        cap = 2 * self._cap
        L = np.zeros((cap, cap))
        L[: self.t, : self.t] = self._L[: self.t, : self.t]
        self._L = L
        for name in ("_y", "_z"):
            a = np.zeros(cap)
            a[: self.t] = getattr(self, name)[: self.t]
            setattr(self, name, a)
        X = np.zeros((cap, self._dim))
        X[: self.t] = self._X[: self.t]
        self._X = X
        if self.grid is not None:
            W = np.zeros((cap, self.grid.shape[0]))
            W[: self.t] = self._W[: self.t]
            self._W = W
        self._cap = cap

    @property
    def points(self) -> np.ndarray:
        if self._X is None:
            return np.zeros((0, self.kernel.dim or 1))
        return self._X[: self.t]

    @property
    def responses(self) -> np.ndarray:
        return self._y[: self.t]

    @property
    def chol(self) -> np.ndarray:
        return self._L[: self.t, : self.t]

    @property
    def alpha(self) -> np.ndarray:
        """``(K_t + rho I)^{-1} Y``."""
        if self._alpha is None:
            if self.t == 0:
                self._alpha = np.zeros(0)
            else:
                self._alpha = solve_triangular(self.chol, self._z[: self.t], lower=True, trans="T")
        return self._alpha

    @property
    def logdet(self) -> float:
        """``log det(I_t + K_t / rho)``, the information-gain log-determinant."""
        return self.logdet_reg - self.t * math.log(self.rho)

    # -- updates -----------------------------------------------------------
    def update(self, x, y, index=None) -> "KernelRidge":
        """Add the observation ``(x, y)``; returns ``self``.

        ``index`` may name the grid row of ``x``, which reuses the cached
        forward solve instead of computing it.
        """
        if index is not None:
            if self.grid is None:
                raise InputError("index given but no grid is attached")
            x = self.grid[index]
        x = as_points(np.atleast_1d(np.asarray(x, dtype=float)).reshape(1, -1), self.kernel.dim)[0]
        y = float(y)
        if not math.isfinite(y):
            raise InputError(f"response must be finite, got {y}")
        if self._X is None:
            self._dim = x.shape[0]
            self._X = np.zeros((self._cap, self._dim))
        elif x.shape[0] != self._dim:
            raise InputError(f"expected a point of dimension {self._dim}, got {x.shape[0]}")
        if self.t == self._cap:
            self._grow()

        t = self.t
        kxx = float(self.kernel.diag(x[None, :])[0])
        if t == 0:
            l = np.zeros(0)
        elif index is not None:
            l = self._W[:t, index].copy()
        else:
            kvec = cross_gram(self.kernel, self._X[:t], x[None, :])[:, 0]
            l = solve_triangular(self._L[:t, :t], kvec, lower=True)
        resid = kxx - float(l @ l)
        pivot_sq = resid + self.rho
        if not pivot_sq > 0:
            raise NumericalError(
                f"Cholesky breakdown: pivot^2 = {pivot_sq:.3e}; rho too small for this Gram matrix",
                pivot_sq)
        pivot = math.sqrt(pivot_sq)
        self.selection_widths.append(math.sqrt(max(resid, 0.0) / self.rho))

        self._L[t, :t] = l
        self._L[t, t] = pivot
        self._X[t] = x
        self._y[t] = y
        z_new = (y - float(l @ self._z[:t])) / pivot
        self._z[t] = z_new
        self.logdet_reg += math.log(pivot_sq)

        if self.grid is not None:
            kg = cross_gram(self.kernel, x[None, :], self.grid)[0]
            w = (kg - l @ self._W[:t]) / pivot
            self._W[t] = w
            self._grid_var -= w * w
            self._grid_mean += w * z_new

        self.t = t + 1
        self._alpha = None
        return self

    def copy(self) -> "KernelRidge":
        other = object.__new__(KernelRidge)
        other.__dict__.update(self.__dict__)
        for name, val in self.__dict__.items():
            if isinstance(val, np.ndarray):
                setattr(other, name, val.copy())
        other.selection_widths = list(self.selection_widths)
        return other

    @classmethod
    def from_batch(cls, kernel: KernelSpec, rho: float, X, Y, grid=None) -> "KernelRidge":
        """Build the state from a full Cholesky factorisation rather than by bordering."""
        X = as_points(X, kernel.dim)
        Y = np.asarray(Y, dtype=float)
        state = cls(kernel, rho, grid=grid, capacity=max(X.shape[0], 1))
        t = X.shape[0]
        if t == 0:
            return state
        L = np.linalg.cholesky(gram(kernel, X) + rho * np.eye(t))
        if state._X is None:
            state._dim = X.shape[1]
            state._X = np.zeros((state._cap, state._dim))
        state._X[:t] = X
        state._y[:t] = Y
        state._L[:t, :t] = L
        state._z[:t] = solve_triangular(L, Y, lower=True)
        state.logdet_reg = 2.0 * float(np.sum(np.log(np.diag(L))))
        state.t = t
        if state.grid is not None:
            state._W[:t] = solve_triangular(L, cross_gram(kernel, X, state.grid), lower=True)
            state._grid_var = state._grid_diag - np.sum(state._W[:t] ** 2, axis=0)
            state._grid_mean = state._W[:t].T @ state._z[:t]
        return state

    # -- queries -----------------------------------------------------------
    def _forward(self, X):
        K = cross_gram(self.kernel, self.points, X)
        return solve_triangular(self.chol, K, lower=True)

    def _query(self, x):
        dim = self.kernel.dim or self._dim
        scalar = np.ndim(x) == 0 or (np.ndim(x) == 1 and dim not in (None, 1))
        return as_points(x, dim), scalar

    def mean(self, x):
        """Posterior mean ``k_t(x)^T alpha``; zero before any data."""
        X, scalar = self._query(x)
        if self.t == 0:
            out = np.zeros(X.shape[0])
        else:
            out = self._forward(X).T @ self._z[: self.t]
        return float(out[0]) if scalar else out

    def width(self, x):
        """``sqrt((k(x, x) - k_t(x)^T (K_t + rho I)^{-1} k_t(x)) / rho)``."""
        X, scalar = self._query(x)
        var = self.kernel.diag(X)
        if self.t:
            W = self._forward(X)
            var = var - np.sum(W * W, axis=0)
        out = np.sqrt(_clamp_radicand(var) / self.rho)
        return float(out[0]) if scalar else out

    def grid_mean(self) -> np.ndarray:
        self._need_grid()
        return self._grid_mean.copy()

    def grid_width(self) -> np.ndarray:
        self._need_grid()
        return np.sqrt(_clamp_radicand(self._grid_var) / self.rho)

    def _need_grid(self):
        if self.grid is None:
            raise InputError("no candidate grid attached to this state")


@dataclass(frozen=True)
class PotentialAudit:
    product: float
    logdet: float
    sum_sq: float
    log_product: float

    @property
    def residual(self) -> float:
        return abs(self.log_product - self.logdet)


def elliptical_potential_audit(state: KernelRidge, widths=None) -> PotentialAudit:
    """Compare ``prod_s (1 + w_s^2)`` against ``det(I + K_t / rho)``.

    ``widths`` defaults to the widths the state recorded at each update,
    each evaluated at the incoming point before it was added.
    """
    w = np.asarray(state.selection_widths if widths is None else widths, dtype=float)
    if w.shape != (state.t,):
        raise InputError(f"expected {state.t} widths, got {w.shape[0] if w.ndim else w}")
    sq = w * w
    log_product = float(np.sum(np.log1p(sq)))
    with np.errstate(over="ignore"):
        product = float(np.exp(log_product))
    return PotentialAudit(product=product, logdet=state.logdet, sum_sq=float(sq.sum()),
                          log_product=log_product)


def rkhs_norm(kernel: KernelSpec, centers, coefficients) -> float:
    """``||sum_i a_i k(., z_i)||_H = sqrt(a^T K_z a)``."""
    a = np.atleast_1d(np.asarray(coefficients, dtype=float))
    Z = as_points(centers, kernel.dim)
    if Z.shape[0] != a.shape[0]:
        raise InputError(f"{Z.shape[0]} centers but {a.shape[0]} coefficients")
    if a.shape[0] == 0:
        return 0.0
    q = float(a @ gram(kernel, Z) @ a)
    return float(np.sqrt(_clamp_radicand(q, "RKHS norm")))
