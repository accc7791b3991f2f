"""Maximum information gain: greedy lower estimates and the eigendecay upper bound."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, InputError
from .kernels import KernelSpec, as_points
from .posterior import KernelRidge

__all__ = [
    "InfoGainCurve",
    "ScheduleReport",
    "greedy_infogain",
    "loglog_slope",
    "schedule_consistency_check",
    "vakili_bound",
]


@dataclass
class InfoGainCurve:
    """``gamma_hat[t]`` for ``t = 0..T`` and, when constants are known, ``gamma_bound[t]``.

    ``certified`` is False when the bound uses constants the kernel does not
    guarantee (e.g. Matérn with a user-supplied ``C`` or ``B``).
    """

    rho: float
    gamma_hat: np.ndarray
    increments: np.ndarray
    selected: np.ndarray
    gamma_bound: Optional[np.ndarray] = None
    certified: bool = False

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.gamma_hat.shape[0])

    def rows(self):
        bound = self.gamma_bound if self.gamma_bound is not None else np.full_like(self.gamma_hat, np.nan)
        return [(int(t), float(g), float(b)) for t, g, b in zip(self.t, self.gamma_hat, bound)]


def greedy_infogain(kernel: KernelSpec, grid, rho: float, T: int,
                    C: Optional[float] = None, B: Optional[float] = None) -> InfoGainCurve:
    """Greedy lower estimate of ``gamma_t(rho)`` on a candidate grid.

    Each step adds the grid point with the largest ``log(1 + width^2)``,
    i.e. the largest log-determinant increment. Ties go to the lowest index.
    Points may repeat.
    """
    grid = as_points(grid, kernel.dim)
    if grid.shape[0] == 0:
        raise InputError("grid is empty")
    if not rho > 0:
        raise InputError(f"rho must be positive, got {rho}")
    state = KernelRidge(kernel, rho, grid=grid, capacity=max(T, 1))
    gamma = np.zeros(T + 1)
    inc = np.zeros(T)
    sel = np.zeros(T, dtype=int)
    for t in range(T):
        w = state.grid_width()
        j = int(np.argmax(w))
        sel[t] = j
        inc[t] = math.log1p(w[j] * w[j])
        state.update(None, 0.0, index=j)
        gamma[t + 1] = 0.5 * state.logdet
    curve = InfoGainCurve(rho=float(rho), gamma_hat=gamma, increments=inc, selected=sel)

    decay = kernel.eigendecay
    C = C if C is not None else (decay[0] if decay else None)
    B = B if B is not None else kernel.B
    if decay is not None and C is not None and B is not None:
        bound = np.full(T + 1, np.nan)
        for t in range(1, T + 1):
            bound[t] = vakili_bound(t, rho, C, B, kernel.L, decay[1])
        curve.gamma_bound = bound
        curve.certified = kernel.family == "mercer"
    return curve


def vakili_bound(t: float, rho: float, C: float, B: float, L: float, beta: float) -> float:
    """Upper bound on ``gamma_t(rho)`` under ``(C, beta)``-polynomial eigendecay:

    ``((C B^2 t / rho)^(1/beta) log(1 + L t / rho)^(-1/beta) + 1) log(1 + L t / rho)``
    """
    if not beta > 1:
        raise ConfigurationError(f"beta must exceed 1, got {beta}")
    if min(t, rho, C, B, L) <= 0:
        raise InputError("t, rho, C, B and L must all be positive")
    lg = math.log1p(L * t / rho)
    if lg <= 0:
        raise InputError("log(1 + L t / rho) underflowed to zero")
    return ((C * B * B * t / rho) ** (1.0 / beta) * lg ** (-1.0 / beta) + 1.0) * lg


def loglog_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(x, y, 1)[0])


@dataclass
class ScheduleReport:
    beta: float
    T: np.ndarray
    rho: np.ndarray
    balance_error: float  # max rel. gap between rho and (T / rho)^(1/beta)
    power_error: float  # max rel. gap between rho^(1 + beta) and T
    target_exponent: float
    slope_gamma_sqrtT: float
    slope_sqrt_rho_gamma_T: float
    tolerance: float = 0.1
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return (self.balance_error <= 1e-12 and self.power_error <= 1e-9
                and abs(self.slope_gamma_sqrtT - self.target_exponent) <= self.tolerance
                and abs(self.slope_sqrt_rho_gamma_T - self.target_exponent) <= self.tolerance)


def schedule_consistency_check(beta: float, T_values=None, C: float = 1.0, B: float = 1.0,
                               L: float = 1.0, c: float = 1.0, tolerance: float = 0.1) -> ScheduleReport:
    """Check the balance ``rho = (T / rho)^(1/beta)`` behind ``rho = T^(1/(1+beta))``,
    and that both regret terms built from the closed-form bound grow like
    ``T^((3 + beta) / (2 + 2 beta))`` up to logarithms."""
    from .bandit import regret_exponent, rho_schedule

    if T_values is None:
        T_values = np.logspace(3, 6, 13)
    T = np.asarray(T_values, dtype=float)
    # the balance identity is scale-free: check it on c = 1, use c for the slopes
    base = np.array([rho_schedule(t, beta) for t in T])
    rho = c * base
    gam = np.array([vakili_bound(t, r, C, B, L, beta) for t, r in zip(T, rho)])
    return ScheduleReport(
        beta=float(beta), T=T, rho=rho,
        balance_error=float(np.max(np.abs((T / base) ** (1.0 / beta) - base) / base)),
        power_error=float(np.max(np.abs(base ** (1.0 + beta) - T) / T)),
        target_exponent=regret_exponent(beta),
        slope_gamma_sqrtT=loglog_slope(T, gam * np.sqrt(T)),
        slope_sqrt_rho_gamma_T=loglog_slope(T, np.sqrt(rho * gam * T)),
        tolerance=tolerance,
        details={"gamma_bound": gam},
    )
