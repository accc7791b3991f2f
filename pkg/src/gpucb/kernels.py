"""Kernels, Gram matrices and kernel metadata.

Three families are provided:

* squared exponential, ``exp(-r^2 / (2 s^2))``;
* Matérn with smoothness ``nu`` and bandwidth ``s`` (closed forms for
  ``nu`` in {1/2, 3/2, 5/2}; other values through :func:`scipy.special.kv`
  when ``bessel=True``);
* a finite-rank Mercer kernel on ``[0, 1]^d`` built from a cosine basis with
  eigenvalues ``C n^-beta``.  This is the only family with an explicit
  feature map, and is what the identity and coverage checks run on.

Points are ``(n, d)`` arrays.  One-dimensional inputs of shape ``(n,)`` are
read as ``n`` points in dimension one.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import special

from .errors import ConfigurationError, InputError

__all__ = [
    "FeatureMap",
    "KernelSpec",
    "as_points",
    "cross_gram",
    "evaluate",
    "gram",
    "matern",
    "matern_eigendecay_beta",
    "mercer_synthetic",
    "squared_exponential",
]

CLOSED_FORM_NU = (0.5, 1.5, 2.5)


def as_points(X, dim=None) -> np.ndarray:
    """Coerce ``X`` to a finite ``(n, d)`` float array."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 0:
        X = X.reshape(1, 1)
    elif X.ndim == 1:
        X = X.reshape(-1, 1) if dim in (None, 1) else X.reshape(1, -1)
    elif X.ndim != 2:
        raise InputError(f"points must be at most 2-dimensional, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise InputError("points contain non-finite coordinates")
    if dim is not None and X.shape[0] and X.shape[1] != dim:
        raise InputError(f"expected points of dimension {dim}, got {X.shape[1]}")
    return X


def _as_point(x, dim=None) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.ndim != 1:
        raise InputError(f"a single point must be a scalar or vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise InputError("point has non-finite coordinates")
    if dim is not None and x.shape[0] != dim:
        raise InputError(f"expected a point of dimension {dim}, got {x.shape[0]}")
    return x


@dataclass(frozen=True, eq=False)
class FeatureMap:
    """Explicit coordinates of ``k(., x)`` in the orthonormal basis ``sqrt(mu_n) phi_n``.

    ``embed(x) @ embed(y)`` reproduces ``k(x, y)`` exactly at finite rank.
    """

    eigenvalues: np.ndarray
    indices: np.ndarray  # (rank, d) cosine frequencies per coordinate, 0 = constant

    @property
    def rank(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def dim(self) -> int:
        return self.indices.shape[1]

    def basis(self, X) -> np.ndarray:
        """Eigenfunction values ``phi_n(x)``, shape ``(n_points, rank)``."""
        X = as_points(X, self.dim)
        out = np.ones((X.shape[0], self.rank))
        for j in range(self.dim):
            freq = self.indices[:, j]
            col = np.cos(np.pi * X[:, j : j + 1] * freq[None, :])
            col[:, freq > 0] *= math.sqrt(2.0)
            out *= col
        return out

    def embed(self, X) -> np.ndarray:
        return self.basis(X) * np.sqrt(self.eigenvalues)[None, :]


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """A positive semidefinite kernel together with the constants the theory needs.

    Attributes
    ----------
    family : {"squared_exponential", "matern", "mercer"}
    L : float
        Uniform bound on ``|k(x, y)|``.
    B : float or None
        Uniform bound on the eigenfunctions, when known.
    eigendecay : (C, beta) or None
        Polynomial eigendecay constants. For Matérn only beta is certified;
        C is a user parameter.
    """

    family: str
    L: float
    B: Optional[float] = None
    eigendecay: Optional[tuple] = None
    bandwidth: Optional[float] = None
    nu: Optional[float] = None
    bessel: bool = False
    dim: Optional[int] = None
    features: Optional[FeatureMap] = field(default=None, repr=False)

    def __call__(self, x, y) -> float:
        return evaluate(self, x, y)

    @property
    def rank(self) -> Optional[int]:
        return None if self.features is None else self.features.rank

    def diag(self, X) -> np.ndarray:
        """``k(x, x)`` for each row of ``X``."""
        X = as_points(X, self.dim)
        if self.features is not None:
            phi = self.features.basis(X)
            return (phi * phi) @ self.features.eigenvalues
        return np.full(X.shape[0], _stationary_profile(self, np.zeros(1))[0])


def squared_exponential(bandwidth: float = 1.0) -> KernelSpec:
    if not bandwidth > 0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth}")
    return KernelSpec("squared_exponential", L=1.0, bandwidth=float(bandwidth))


def matern(nu: float = 1.5, bandwidth: float = 1.0, *, C: float = 1.0, dim: int = 1,
           bessel: bool = False, B: Optional[float] = None) -> KernelSpec:
    """Matérn kernel normalised so that ``k(x, x) = 1``.

    The stored eigendecay is ``(C, (2 nu + d) / d)``; ``C`` has no closed form
    and is left to the caller. ``B`` is uncertified and only recorded if given.
    """
    if not bandwidth > 0:
        raise ConfigurationError(f"bandwidth must be positive, got {bandwidth}")
    if nu < 0.5:
        raise ConfigurationError(f"Matern smoothness must be >= 1/2, got {nu}")
    if not bessel and not any(math.isclose(nu, v) for v in CLOSED_FORM_NU):
        raise ConfigurationError(
            f"nu={nu} has no closed form; pass bessel=True for general smoothness")
    for v in CLOSED_FORM_NU:
        if math.isclose(nu, v):
            nu = v
    beta = matern_eigendecay_beta(nu, dim)
    return KernelSpec("matern", L=1.0, B=B, eigendecay=(float(C), beta),
                      bandwidth=float(bandwidth), nu=float(nu), bessel=bessel, dim=dim)


def _multi_indices(rank: int, dim: int) -> np.ndarray:
    # graded order: total frequency first, then lexicographic
    out = []
    total = 0
    while len(out) < rank:
        level = [m for m in itertools.product(range(total + 1), repeat=dim) if sum(m) == total]
        out.extend(sorted(level))
        total += 1
    return np.array(out[:rank], dtype=int)


def mercer_synthetic(rank: int, C: float = 1.0, beta: float = 2.0, dim: int = 1):
    """Finite-rank kernel ``sum_n C n^-beta phi_n(x) phi_n(y)`` on ``[0, 1]^dim``.

    ``phi_1 = 1`` and ``phi_n(x) = sqrt(2) cos((n - 1) pi x)`` in one dimension;
    higher dimensions use tensor products of that basis in graded order.

    Returns
    -------
    (KernelSpec, FeatureMap)
    """
    if int(rank) != rank or rank < 1:
        raise ConfigurationError(f"rank must be a positive integer, got {rank}")
    if not C > 0:
        raise ConfigurationError(f"C must be positive, got {C}")
    if not beta > 1:
        raise ConfigurationError(f"beta must exceed 1 for polynomial eigendecay, got {beta}")
    if int(dim) != dim or dim < 1:
        raise ConfigurationError(f"dim must be a positive integer, got {dim}")
    rank, dim = int(rank), int(dim)
    n = np.arange(1, rank + 1, dtype=float)
    mu = C * n ** (-float(beta))
    idx = _multi_indices(rank, dim)
    fmap = FeatureMap(eigenvalues=mu, indices=idx)
    nonconst = max(1, int((idx > 0).sum(axis=1).max()))
    B = math.sqrt(2.0) ** nonconst
    L = float(2.0 ** nonconst * mu.sum())  # B^2, exact
    spec = KernelSpec("mercer", L=L, B=B, eigendecay=(float(C), float(beta)),
                      dim=dim, features=fmap)
    return spec, fmap


def matern_eigendecay_beta(nu: float, d: int) -> float:
    return (2.0 * nu + d) / d


def _stationary_profile(k: KernelSpec, r: np.ndarray) -> np.ndarray:
    s = k.bandwidth
    if k.family == "squared_exponential":
        return np.exp(-(r * r) / (2.0 * s * s))
    nu = k.nu
    if nu == 0.5:
        return np.exp(-r / s)
    if nu == 1.5:
        a = math.sqrt(3.0) * r / s
        return (1.0 + a) * np.exp(-a)
    if nu == 2.5:
        a = math.sqrt(5.0) * r / s
        return (1.0 + a + a * a / 3.0) * np.exp(-a)
    a = math.sqrt(2.0 * nu) * r / s
    out = np.ones_like(a)
    pos = a > 0
    ap = a[pos]
    out[pos] = (2.0 ** (1.0 - nu) / special.gamma(nu)) * ap ** nu * special.kv(nu, ap)
    return out


def _distances(X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - Y[None, :, :]
    return np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))


def evaluate(k: KernelSpec, x, y) -> float:
    """``k(x, y)`` for single points. Symmetric in its arguments bit for bit."""
    x = _as_point(x, k.dim)
    y = _as_point(y, k.dim)
    if x.shape != y.shape:
        raise InputError(f"points have different dimensions: {x.shape[0]} and {y.shape[0]}")
    if k.features is not None:
        px = k.features.basis(x[None, :])[0]
        py = k.features.basis(y[None, :])[0]
        return float(np.sum(k.features.eigenvalues * (px * py)))
    r = math.sqrt(float(np.sum((x - y) ** 2)))
    return float(_stationary_profile(k, np.array([r]))[0])


def cross_gram(k: KernelSpec, X, Y) -> np.ndarray:
    """Matrix ``(k(x_i, y_j))`` for two point sets."""
    X = as_points(X, k.dim)
    Y = as_points(Y, k.dim)
    if X.shape[0] == 0 or Y.shape[0] == 0:
        return np.zeros((X.shape[0], Y.shape[0]))
    if X.shape[1] != Y.shape[1]:
        raise InputError("point sets have different dimensions")
    if k.features is not None:
        px = k.features.basis(X)
        py = k.features.basis(Y)
        return (px * k.features.eigenvalues) @ py.T
    return _stationary_profile(k, _distances(X, Y))


def gram(k: KernelSpec, X) -> np.ndarray:
    """Symmetric Gram matrix ``K = (k(x_i, x_j))``; ``0 x 0`` for an empty set."""
    X = as_points(X, k.dim)
    if X.shape[0] == 0:
        return np.zeros((0, 0))
    if k.features is not None:
        e = k.features.embed(X)
        K = e @ e.T
        return 0.5 * (K + K.T)
    return _stationary_profile(k, _distances(X, X))
