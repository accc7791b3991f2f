"""Confidence radii and the mixture supermartingale.

For actions ``X_1, X_2, ...`` and noise ``eps_1, eps_2, ...`` let
``S_t = sum eps_s k(., X_s)`` and ``V_t = sum k(., X_s) k(., X_s)^T``. The
process

    M_t = exp(||(rho id + V_t)^{-1/2} S_t||^2 / (2 sigma^2)) / sqrt(det(id + V_t / rho))

is a nonnegative supermartingale with ``M_0 = 1`` whenever the actions are
predictable and the noise is conditionally sigma-subGaussian. All of it is
computed in log space here; ``M_t`` itself overflows easily.

The self-normalised statistic has the Gram form

    ||(rho id + V_t)^{-1/2} S_t||^2 = eps^T K_t (K_t + rho I)^{-1} eps

which never inverts ``K_t`` and so tolerates repeated actions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import cho_factor, cho_solve, solve_triangular

from .errors import ConfigurationError, InputError, NumericalError, UnsupportedOperation
from .kernels import KernelSpec, as_points
from .posterior import KernelRidge, _clamp_radicand

__all__ = [
    "ACTION_RULES",
    "FeatureEllipsoid",
    "MixtureTrajectory",
    "NOISE_KINDS",
    "RadiusSpec",
    "abbasi_radius",
    "chowdhury_radius",
    "draw_noise",
    "ellipsoid_contains",
    "ellipsoid_distance",
    "log_mixture",
    "mixture_batch",
    "mixture_trajectory",
    "noise_radius",
    "selfnorm_stat_chowdhury",
    "selfnorm_stat_features",
    "selfnorm_stat_gram",
    "trajectory_seeds",
    "truncated_mixture",
]

NOISE_KINDS = ("gaussian", "rademacher")
ACTION_RULES = ("fixed", "random", "width_greedy")
CHOWDHURY_JITTER = 1e-10


@dataclass(frozen=True)
class RadiusSpec:
    """A confidence-radius rule.

    ``rule="abbasi"`` is the regularised Hilbert-space radius
    ``sigma sqrt(2 log(sqrt(det(I + K/rho)) / delta)) + sqrt(rho) D``;
    ``rule="chowdhury"`` is the ``eta``-parameterised comparison bound.
    """

    rule: str = "abbasi"
    sigma: float = 1.0
    delta: float = 0.05
    D: float = 1.0
    rho: Optional[float] = None
    eta: Optional[float] = None

    def __post_init__(self):
        if self.rule not in ("abbasi", "chowdhury"):
            raise ConfigurationError(f"unknown radius rule {self.rule!r}")
        if not 0 < self.delta <= 1:
            raise ConfigurationError(f"delta must lie in (0, 1], got {self.delta}")
        if self.sigma < 0 or self.D < 0:
            raise ConfigurationError("sigma and D must be nonnegative")
        if self.rule == "abbasi" and not (self.rho is not None and self.rho > 0):
            raise ConfigurationError("the abbasi rule needs rho > 0")
        if self.rule == "chowdhury" and not (self.eta is not None and self.eta >= 0):
            raise ConfigurationError("the chowdhury rule needs eta >= 0")


def noise_radius(logdet: float, sigma: float, delta: float) -> float:
    """``sigma sqrt(2 (logdet / 2 + log(1 / delta)))``."""
    return sigma * math.sqrt(2.0 * (0.5 * logdet + math.log(1.0 / delta)))


def abbasi_radius(logdet: float, spec: RadiusSpec) -> float:
    """Radius ``U_t`` from ``logdet = log det(I + K_t / rho)``."""
    if spec.rule != "abbasi":
        raise ConfigurationError("abbasi_radius needs an abbasi RadiusSpec")
    if logdet < -1e-12:
        raise InputError(f"logdet must be nonnegative, got {logdet}")
    return noise_radius(max(logdet, 0.0), spec.sigma, spec.delta) + math.sqrt(spec.rho) * spec.D


def _logdet_pd(A: np.ndarray) -> float:
    if A.shape[0] == 0:
        return 0.0
    try:
        c, _ = cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("matrix is not positive definite") from exc
    return 2.0 * float(np.sum(np.log(np.diag(c))))


def chowdhury_radius(K, spec: RadiusSpec) -> float:
    """Noise term ``sigma sqrt(2 log(sqrt(det((1 + eta) I + K)) / delta))``.

    The RKHS-norm part of the comparison radius is left to the caller.
    """
    if spec.rule != "chowdhury":
        raise ConfigurationError("chowdhury_radius needs a chowdhury RadiusSpec")
    K = np.atleast_2d(np.asarray(K, dtype=float)) if np.size(K) else np.zeros((0, 0))
    logdet = _logdet_pd(K + (1.0 + spec.eta) * np.eye(K.shape[0]))
    return noise_radius(logdet, spec.sigma, spec.delta)


def _check_pair(K, eps):
    K = np.asarray(K, dtype=float)
    eps = np.asarray(eps, dtype=float).ravel()
    if eps.size == 0:
        return np.zeros((0, 0)), eps
    K = np.atleast_2d(K)
    if K.shape != (eps.size, eps.size):
        raise InputError(f"Gram matrix of shape {K.shape} does not match {eps.size} residuals")
    return K, eps


def selfnorm_stat_gram(K, eps, rho: float) -> float:
    """``sqrt(eps^T K (K + rho I)^{-1} eps)``, the Gram form of the statistic."""
    K, eps = _check_pair(K, eps)
    if not rho > 0:
        raise InputError(f"rho must be positive, got {rho}")
    if eps.size == 0:
        return 0.0
    u = cho_solve(cho_factor(K + rho * np.eye(eps.size), lower=True), eps)
    q = float(eps @ (K @ u))
    return float(np.sqrt(_clamp_radicand(q, "self-normalised statistic")))


def selfnorm_stat_features(E, eps, rho: float) -> float:
    """``||(rho I + E^T E)^{-1/2} E^T eps||`` computed in feature coordinates."""
    E = np.atleast_2d(np.asarray(E, dtype=float))
    eps = np.asarray(eps, dtype=float).ravel()
    if eps.size == 0:
        return 0.0
    b = E.T @ eps
    A = rho * np.eye(E.shape[1]) + E.T @ E
    q = float(b @ cho_solve(cho_factor(A, lower=True), b))
    return float(np.sqrt(_clamp_radicand(q, "self-normalised statistic")))


def selfnorm_stat_chowdhury(K, eps, eta: float) -> float:
    """``||((K + eta I)^{-1} + I)^{-1/2} eps||``.

    Uses ``((A^{-1} + I))^{-1} = (I + A)^{-1} A`` with ``A = K + eta I``, after
    confirming ``A`` is invertible.
    """
    K, eps = _check_pair(K, eps)
    if eta < 0:
        raise InputError(f"eta must be nonnegative, got {eta}")
    if eps.size == 0:
        return 0.0
    A = K + eta * np.eye(eps.size)
    try:
        cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("K + eta I is singular; use eta > 0") from exc
    u = cho_solve(cho_factor(A + np.eye(eps.size), lower=True), eps)
    q = float(eps @ (A @ u))
    return float(np.sqrt(_clamp_radicand(q, "self-normalised statistic")))


def log_mixture(stat, logdet, sigma: float):
    """``log M = stat^2 / (2 sigma^2) - logdet / 2``."""
    stat = np.asarray(stat, dtype=float)
    logdet = np.asarray(logdet, dtype=float)
    if sigma == 0:
        raise InputError("sigma must be positive for the mixture process")
    return stat * stat / (2.0 * sigma * sigma) - 0.5 * logdet


# -- randomness -------------------------------------------------------------

def trajectory_seeds(master: int, i: int) -> tuple:
    """Design and noise seed sequences for trajectory ``i``.

    Child seeds depend only on ``(master, i)``, never on how work is split.
    """
    ss = np.random.SeedSequence(int(master), spawn_key=(int(i),))
    design, noise = ss.spawn(2)
    return design, noise


def draw_noise(kind: str, sigma: float, n: int, rng: np.random.Generator) -> np.ndarray:
    """Conditionally mean-zero, exactly sigma-subGaussian noise."""
    if kind == "gaussian":
        return sigma * rng.standard_normal(n)
    if kind == "rademacher":
        return sigma * (2.0 * rng.integers(0, 2, size=n) - 1.0)
    raise ConfigurationError(f"unknown noise kind {kind!r}; expected one of {NOISE_KINDS}")


def _design_rule(rule: str, grid_size: int, T: int, rng: np.random.Generator) -> Callable:
    if rule == "fixed":
        return lambda state, t: t % grid_size
    if rule == "random":
        picks = rng.integers(0, grid_size, size=T)
        return lambda state, t: int(picks[t])
    if rule == "width_greedy":
        # maximises the current width; depends on past actions only
        return lambda state, t: int(np.argmax(state.grid_width()))
    raise ConfigurationError(f"unknown action rule {rule!r}; expected one of {ACTION_RULES}")


# -- trajectories -----------------------------------------------------------

@dataclass
class MixtureTrajectory:
    """One path of the mixture process, indexed by ``t = 0..T``."""

    stat: np.ndarray
    logdet: np.ndarray
    log_M: np.ndarray
    sigma: float
    rho: float
    points: np.ndarray = field(repr=False)
    eps: np.ndarray = field(repr=False)
    indices: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.log_M.shape[0])

    @property
    def M(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return np.exp(self.log_M)

    def crossed(self, delta: float) -> bool:
        """Whether ``M_t >= 1 / delta`` for some ``t``."""
        return bool(np.any(self.log_M >= math.log(1.0 / delta)))

    def rows(self, delta: float = 0.05, eta: float = CHOWDHURY_JITTER, kernel=None):
        """CSV rows ``t, logdet, stat, logM, radius_abbasi, radius_chowdhury``.

        Both radii are noise terms only, directly comparable to ``stat``.
        """
        chow = None
        if kernel is not None:
            chow_state = KernelRidge(kernel, 1.0 + eta)
            chow = [0.0]
            for x in self.points:
                chow_state.update(x, 0.0)
                chow.append(chow_state.logdet_reg)
        out = []
        for t in range(self.log_M.shape[0]):
            ra = noise_radius(self.logdet[t], self.sigma, delta)
            rc = noise_radius(chow[t], self.sigma, delta) if chow is not None else float("nan")
            out.append((t, float(self.logdet[t]), float(self.stat[t]), float(self.log_M[t]), ra, rc))
        return out


def mixture_trajectory(kernel: KernelSpec, rho: float, sigma: float, grid, T: int,
                       seed=0, design: str = "width_greedy", noise: str = "gaussian",
                       f_values=None) -> MixtureTrajectory:
    """Simulate one path of ``M_t`` under a predictable design.

    ``seed`` is an int (master seed, trajectory 0) or a ``(master, i)`` pair.
    Responses fed to the regression are the noise alone, so ``S_t`` and the
    regression residuals coincide; ``f_values`` is accepted for symmetry with
    the bandit harness but does not enter ``M_t``.
    """
    master, i = (seed, 0) if np.ndim(seed) == 0 else seed
    design_ss, noise_ss = trajectory_seeds(master, i)
    grid = as_points(grid, kernel.dim)
    eps = draw_noise(noise, sigma, T, np.random.default_rng(noise_ss))
    rule = _design_rule(design, grid.shape[0], T, np.random.default_rng(design_ss))

    state = KernelRidge(kernel, rho, grid=grid, capacity=max(T, 1))
    stat_sq = np.zeros(T + 1)
    logdet = np.zeros(T + 1)
    idx = np.zeros(T, dtype=int)
    eps_sq = 0.0
    z_sq = 0.0
    for t in range(T):
        j = rule(state, t)
        idx[t] = j
        state.update(None, eps[t], index=j)
        eps_sq += eps[t] * eps[t]
        z_sq += state._z[t] ** 2
        # eps^T K (K + rho I)^{-1} eps = ||eps||^2 - rho ||L^{-1} eps||^2
        stat_sq[t + 1] = eps_sq - rho * z_sq
        logdet[t + 1] = state.logdet
    stat = np.sqrt(_clamp_radicand(stat_sq, "self-normalised statistic"))
    return MixtureTrajectory(stat=stat, logdet=logdet, log_M=log_mixture(stat, logdet, sigma),
                             sigma=sigma, rho=rho, points=grid[idx], eps=eps, indices=idx)


def mixture_batch(kernel: KernelSpec, rho: float, sigma: float, grid, T: int, n: int,
                  master: int = 0, design: str = "width_greedy", noise: str = "gaussian",
                  start: int = 0):
    """``log M_t`` for trajectories ``start .. start + n - 1``, shape ``(n, T + 1)``.

    Row ``i`` equals ``mixture_trajectory(..., seed=(master, start + i)).log_M``.
    Noise-independent deterministic designs share one factorisation, so the
    whole batch costs a single triangular solve.
    """
    grid = as_points(grid, kernel.dim)
    if design == "random":
        return np.stack([
            mixture_trajectory(kernel, rho, sigma, grid, T, (master, start + i), design, noise).log_M
            for i in range(n)])
    rule = _design_rule(design, grid.shape[0], T, np.random.default_rng(0))
    state = KernelRidge(kernel, rho, grid=grid, capacity=max(T, 1))
    logdet = np.zeros(T + 1)
    for t in range(T):
        state.update(None, 0.0, index=rule(state, t))
        logdet[t + 1] = state.logdet
    eps = np.empty((n, T))
    for i in range(n):
        _, noise_ss = trajectory_seeds(master, start + i)
        eps[i] = draw_noise(noise, sigma, T, np.random.default_rng(noise_ss))
    if T == 0:
        return np.zeros((n, 1))
    Z = solve_triangular(state.chol, eps.T, lower=True).T
    stat_sq = np.zeros((n, T + 1))
    stat_sq[:, 1:] = np.cumsum(eps * eps, axis=1) - rho * np.cumsum(Z * Z, axis=1)
    stat_sq = _clamp_radicand(stat_sq, "self-normalised statistic")
    return stat_sq / (2.0 * sigma * sigma) - 0.5 * logdet[None, :]


def truncated_mixture(trajectory: MixtureTrajectory, kernel: KernelSpec, N: int) -> MixtureTrajectory:
    """Recompute the path with ``S_t`` and ``V_t`` projected on the first ``N`` basis functions."""
    if kernel.features is None:
        raise UnsupportedOperation("truncation needs a kernel with an explicit feature map")
    if int(N) != N or N < 1:
        raise InputError(f"projection dimension must be a positive integer, got {N}")
    N = min(int(N), kernel.features.rank)
    rho, sigma = trajectory.rho, trajectory.sigma
    E = kernel.features.embed(trajectory.points)[:, :N] if trajectory.points.size else np.zeros((0, N))
    T = E.shape[0]
    A = rho * np.eye(N)
    b = np.zeros(N)
    stat = np.zeros(T + 1)
    logdet = np.zeros(T + 1)
    for t in range(T):
        e = E[t]
        A += np.outer(e, e)
        b += trajectory.eps[t] * e
        c = cho_factor(A, lower=True)
        stat[t + 1] = math.sqrt(max(float(b @ cho_solve(c, b)), 0.0))
        logdet[t + 1] = 2.0 * float(np.sum(np.log(np.diag(c[0])))) - N * math.log(rho)
    return MixtureTrajectory(stat=stat, logdet=logdet, log_M=log_mixture(stat, logdet, sigma),
                             sigma=sigma, rho=rho, points=trajectory.points, eps=trajectory.eps,
                             indices=trajectory.indices)


# -- confidence ellipsoid in feature space ----------------------------------

def _feature_star(kernel: KernelSpec, f_star) -> np.ndarray:
    centers, coefficients = f_star
    coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
    if coefficients.size == 0:
        return np.zeros(kernel.features.rank)
    return kernel.features.embed(centers).T @ coefficients


class FeatureEllipsoid:
    """Tracks ``||(rho I + E^T E)^{1/2} (theta_t - theta*)||`` round by round.

    ``theta_t = (rho I + E^T E)^{-1} E^T Y`` is the regression estimate in
    explicit coordinates, so the check is exact for finite-rank kernels.
    """

    def __init__(self, kernel: KernelSpec, rho: float, f_star):
        if kernel.features is None:
            raise UnsupportedOperation("the ellipsoid check needs a kernel with an explicit feature map")
        self.kernel = kernel
        self.rho = float(rho)
        r = kernel.features.rank
        self.A = self.rho * np.eye(r)
        self.b = np.zeros(r)
        self.theta_star = _feature_star(kernel, f_star)

    def update(self, x, y):
        e = self.kernel.features.embed(np.atleast_1d(x).reshape(1, -1))[0]
        self.A += np.outer(e, e)
        self.b += y * e

    def distance(self) -> float:
        theta = cho_solve(cho_factor(self.A, lower=True), self.b)
        d = theta - self.theta_star
        return float(np.sqrt(max(float(d @ self.A @ d), 0.0)))


def ellipsoid_distance(state: KernelRidge, f_star) -> float:
    tracker = FeatureEllipsoid(state.kernel, state.rho, f_star)
    for x, y in zip(state.points, state.responses):
        tracker.update(x, y)
    return tracker.distance()


def ellipsoid_contains(state: KernelRidge, f_star, radius: float) -> bool:
    """Whether ``f*`` lies in ``{f : ||(V_t + rho id)^{1/2}(f_t - f)|| <= radius}``."""
    return ellipsoid_distance(state, f_star) <= radius
