"""GP-UCB on a finite candidate grid, with regret accounting.

The optimistic choice ``argmax_{x, f in E_{t-1}} f(x)`` over the ellipsoid
``||(V + rho id)^{1/2}(f - f_{t-1})|| <= U_{t-1}`` has the closed form

    X_t = argmax_x  mean_{t-1}(x) + U_{t-1} * width_{t-1}(x)

which is what :func:`gp_ucb_step` evaluates. Ties go to the lowest grid index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .confidence import FeatureEllipsoid, RadiusSpec, abbasi_radius, draw_noise
from .errors import ConfigurationError, InputError
from .kernels import KernelSpec, as_points, cross_gram, matern_eigendecay_beta
from .posterior import KernelRidge, PotentialAudit, elliptical_potential_audit, rkhs_norm

__all__ = [
    "EpisodeResult",
    "Environment",
    "RegretRecord",
    "gp_ucb_step",
    "make_environment",
    "matern_regret_exponent",
    "regret_exponent",
    "rho_schedule",
    "run_episode",
]

REGRET_HEADER = ("t", "x", "y", "r", "R", "U", "width", "logdet")


def rho_schedule(T: float, beta: float, c: float = 1.0) -> float:
    """Regularisation ``c T^(1 / (1 + beta))`` balancing ``rho`` against ``(T / rho)^(1/beta)``."""
    if not beta > 1:
        raise ConfigurationError(f"beta must exceed 1, got {beta}")
    if not T >= 1:
        raise ConfigurationError(f"horizon must be at least 1, got {T}")
    if not c > 0:
        raise ConfigurationError(f"scale must be positive, got {c}")
    return c * float(T) ** (1.0 / (1.0 + beta))


def regret_exponent(beta: float) -> float:
    return (3.0 + beta) / (2.0 + 2.0 * beta)


def matern_regret_exponent(nu: float, d: int) -> float:
    """``(nu + 2d) / (2 nu + 2d)``, routed through the eigendecay exponent so the
    two forms agree bit for bit."""
    return regret_exponent(matern_eigendecay_beta(nu, d))


class Environment:
    """Noisy evaluations of ``f* = sum_i a_i k(., z_i)`` on a candidate grid.

    ``D`` is the norm bound handed to the learner and must dominate
    ``||f*||_H``. Noise is drawn from ``seed`` in the order rounds are played.
    """

    def __init__(self, kernel: KernelSpec, centers, coefficients, grid, sigma: float,
                 noise: str = "gaussian", D: Optional[float] = None, seed=0):
        self.kernel = kernel
        self.centers = as_points(centers, kernel.dim)
        self.coefficients = np.atleast_1d(np.asarray(coefficients, dtype=float))
        self.grid = as_points(grid, kernel.dim)
        if self.grid.shape[0] == 0:
            raise ConfigurationError("candidate grid is empty")
        if sigma < 0:
            raise ConfigurationError(f"sigma must be nonnegative, got {sigma}")
        self.sigma = float(sigma)
        self.noise = noise
        self.norm = rkhs_norm(kernel, self.centers, self.coefficients)
        self.D = self.norm if D is None else float(D)
        if self.norm > self.D * (1 + 1e-12) + 1e-15:
            raise ConfigurationError(f"||f*||_H = {self.norm:.6g} exceeds the declared bound D = {self.D:.6g}")
        self.seed = seed
        self.values = self.f(self.grid)
        self.star_index = int(np.argmax(self.values))
        self.x_star = self.grid[self.star_index]
        self.f_max = float(self.values[self.star_index])
        self._rng = np.random.default_rng(seed)

    @property
    def f_star(self):
        return self.centers, self.coefficients

    def f(self, X) -> np.ndarray:
        return cross_gram(self.kernel, X, self.centers) @ self.coefficients

    def sample(self, index: int) -> float:
        eps = draw_noise(self.noise, self.sigma, 1, self._rng)[0] if self.sigma > 0 else 0.0
        return float(self.values[index] + eps)

    def regret(self, index: int) -> float:
        return self.f_max - float(self.values[index])


def make_environment(kernel: KernelSpec, grid, sigma: float, D: float = 1.0, n_centers: int = 5,
                     norm_fraction: float = 1.0, noise: str = "gaussian", seed=0) -> Environment:
    """Random ``f*`` built from grid centres, rescaled to ``||f*||_H = norm_fraction * D``.

    ``seed`` is a ``SeedSequence``-compatible value; the function and the noise
    stream use independent children of it.
    """
    grid = as_points(grid, kernel.dim)
    ss = np.random.SeedSequence(seed) if not isinstance(seed, np.random.SeedSequence) else seed
    f_ss, noise_ss = ss.spawn(2)
    rng = np.random.default_rng(f_ss)
    m = min(n_centers, grid.shape[0])
    centers = grid[np.sort(rng.choice(grid.shape[0], size=m, replace=False))]
    coef = rng.standard_normal(m)
    norm = rkhs_norm(kernel, centers, coef)
    if norm == 0:
        coef = np.ones(m)
        norm = rkhs_norm(kernel, centers, coef)
    coef *= norm_fraction * D / norm
    return Environment(kernel, centers, coef, grid, sigma, noise=noise, D=D, seed=noise_ss)


@dataclass
class RegretRecord:
    """Per-round trace of an episode.

    ``U`` and ``width`` are the radius and width used to select ``X_t``
    (both at time ``t - 1``); ``logdet`` is ``log det(I + K_t / rho)`` after
    the update.
    """

    index: list = field(default_factory=list)
    x: list = field(default_factory=list)
    y: list = field(default_factory=list)
    r: list = field(default_factory=list)
    R: list = field(default_factory=list)
    U: list = field(default_factory=list)
    width: list = field(default_factory=list)
    logdet: list = field(default_factory=list)
    ucb: list = field(default_factory=list)

    def __len__(self):
        return len(self.r)

    def append(self, index, x, y, r, U, width, logdet, ucb):
        self.index.append(int(index))
        self.x.append(np.asarray(x, dtype=float).copy())
        self.y.append(float(y))
        self.r.append(float(r))
        self.R.append((self.R[-1] if self.R else 0.0) + float(r))
        self.U.append(float(U))
        self.width.append(float(width))
        self.logdet.append(float(logdet))
        self.ucb.append(float(ucb))

    def rows(self):
        out = []
        for t in range(len(self)):
            xs = self.x[t]
            x = repr(float(xs[0])) if xs.shape[0] == 1 else ";".join(repr(float(v)) for v in xs)
            out.append((t + 1, x, self.y[t], self.r[t], self.R[t], self.U[t], self.width[t], self.logdet[t]))
        return out


def gp_ucb_step(state: KernelRidge, spec: RadiusSpec, env: Environment, record: Optional[RegretRecord] = None):
    """Play one GP-UCB round on ``env.grid``; returns ``(index, state, row)``.

    ``state`` must carry ``env.grid`` as its candidate grid.
    """
    if spec.rule != "abbasi":
        raise ConfigurationError("GP-UCB runs with the abbasi radius; the chowdhury rule is a comparison only")
    if state.grid is None or state.grid.shape != env.grid.shape:
        raise InputError("state must be built on the environment's candidate grid")
    U = abbasi_radius(state.logdet, spec)
    widths = state.grid_width()
    ucb = state.grid_mean() + U * widths
    j = int(np.argmax(ucb))
    y = env.sample(j)
    state.update(None, y, index=j)
    record = record if record is not None else RegretRecord()
    record.append(j, env.grid[j], y, env.regret(j), U, widths[j], state.logdet, ucb[j])
    return j, state, record


@dataclass
class EpisodeResult:
    record: RegretRecord
    audit: PotentialAudit
    state: KernelRidge
    spec: RadiusSpec
    # covered[t] is whether f* was inside the ellipsoid built from t observations
    covered: Optional[np.ndarray] = None
    distances: Optional[np.ndarray] = None
    radii: Optional[np.ndarray] = None

    @property
    def final_regret(self) -> float:
        return self.record.R[-1] if len(self.record) else 0.0

    @property
    def always_covered(self) -> Optional[bool]:
        return None if self.covered is None else bool(np.all(self.covered))

    def summary(self) -> dict:
        return {
            "T": len(self.record),
            "final_R": self.final_regret,
            "rho": self.state.rho,
            "final_U": abbasi_radius(self.state.logdet, self.spec),
            "final_logdet": self.state.logdet,
            "coverage": self.always_covered,
            "audit": {
                "log_product": self.audit.log_product,
                "logdet": self.audit.logdet,
                "sum_sq": self.audit.sum_sq,
                "residual": self.audit.residual,
            },
        }


def run_episode(env: Environment, rho: float, T: int, delta: float = 0.05,
                sigma: Optional[float] = None, track_coverage: Optional[bool] = None) -> EpisodeResult:
    """Run GP-UCB for ``T`` rounds.

    ``sigma`` is the subGaussian scale the radius assumes (defaults to the
    environment's). For finite-rank kernels the ellipsoid check is run after
    every update unless ``track_coverage=False``.
    """
    sigma = env.sigma if sigma is None else sigma
    spec = RadiusSpec("abbasi", sigma=sigma, delta=delta, D=env.D, rho=rho)
    state = KernelRidge(env.kernel, rho, grid=env.grid, capacity=max(T, 1))
    record = RegretRecord()
    if track_coverage is None:
        track_coverage = env.kernel.features is not None
    tracker = FeatureEllipsoid(env.kernel, rho, env.f_star) if track_coverage else None
    dist, radii = [], []
    if tracker is not None:
        dist.append(tracker.distance())
        radii.append(abbasi_radius(0.0, spec))
    for _ in range(T):
        j, state, record = gp_ucb_step(state, spec, env, record)
        if tracker is not None:
            tracker.update(env.grid[j], record.y[-1])
            dist.append(tracker.distance())
            radii.append(abbasi_radius(state.logdet, spec))
    result = EpisodeResult(record=record, audit=elliptical_potential_audit(state), state=state, spec=spec)
    if tracker is not None:
        result.distances = np.array(dist)
        result.radii = np.array(radii)
        result.covered = result.distances <= result.radii
    return result
