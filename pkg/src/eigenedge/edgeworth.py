"""Normal and one-term Edgeworth approximations for studentized eigenvector entries.

    G(x) = Phi(x) + (2 x^2 + 1) / 6 * phi(x) * kappa

where ``kappa = sum_j E[E_ij^3] u_jk^3 / (s_ik^3 lam_k^3)``.  ``G`` is a
signed correction, not a distribution: for large ``|kappa|`` it leaves
[0, 1] in the tails and is not monotone there.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import ConfigError, DegenerateError
from .linalg import TruncatedEigen
from .estimators import variance_plugin

__all__ = [
    "std_normal",
    "normal_cdf",
    "kappa",
    "population_kappa",
    "empirical_kappa",
    "denoising_kappa",
    "edgeworth_cdf",
    "EdgeworthCurve",
    "NormalCurve",
    "empirical_edgeworth",
    "SmootherScale",
    "smoother_scale",
]

_INV_SQRT_2PI = 1.0 / math.sqrt(2.0 * math.pi)


def std_normal(x):
    """``(Phi(x), phi(x))``; vectorized."""
    x = np.asarray(x, dtype=float)
    cdf = ndtr(x)
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * x * x)
    if cdf.ndim == 0:
        return float(cdf), float(pdf)
    return cdf, pdf


def normal_cdf(x):
    return std_normal(x)[0]


def edgeworth_cdf(x, kappa: float):
    cdf, pdf = std_normal(x)
    if kappa == 0.0:
        return cdf
    x = np.asarray(x, dtype=float)
    out = cdf + (2.0 * x * x + 1.0) / 6.0 * pdf * kappa
    return float(out) if out.ndim == 0 else out


def kappa(third_row, u, s: float, lam: float) -> float:
    """``sum_j third_j u_j^3 / (s^3 lam^3)``."""
    if not s > 0:
        raise DegenerateError("kappa needs s > 0")
    if lam == 0:
        raise DegenerateError("kappa needs a nonzero eigenvalue")
    third_row = np.asarray(third_row, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(third_row @ u ** 3) / (s ** 3 * lam ** 3)


def population_kappa(third, sigma2, eig: TruncatedEigen, k: int) -> np.ndarray:
    """Population ``kappa_ik`` for every row ``i``."""
    u, lk = eig.U[:, k], eig.lam[k]
    s2 = np.asarray(sigma2, dtype=float) @ u ** 2 / lk ** 2
    if np.any(~(s2 > 0)):
        raise DegenerateError("population variance vanishes for some row")
    return np.asarray(third, dtype=float) @ u ** 3 / (s2 ** 1.5 * lk ** 3)


def empirical_kappa(A, P_hat, eig_A: TruncatedEigen, k: int, i=None):
    """Residual plug-in ``sum_j (A_ij - p_hat_ij)^3 u_hat_jk^3 / (s_hat^3 lam_hat^3)``."""
    A = np.asarray(A, dtype=float)
    u, lk = eig_A.U[:, k], eig_A.lam[k]
    s2 = variance_plugin(A, P_hat, eig_A, i, k)
    if np.any(~(np.asarray(s2) > 0)):
        raise DegenerateError("plug-in variance is zero; kappa_hat undefined")
    if i is None:
        R = A - P_hat
        return (R ** 3) @ u ** 3 / (s2 ** 1.5 * lk ** 3)
    r = A[i] - P_hat[i]
    return float((r ** 3) @ u ** 3) / (s2 ** 1.5 * lk ** 3)


def denoising_kappa(third_row, v, rho: float) -> float:
    """Matrix-denoising skewness sum ``sum_j E[Y_ij^3] v_jk^3 / rho^(3/2)``."""
    return float(np.asarray(third_row, dtype=float) @ np.asarray(v, dtype=float) ** 3) / rho ** 1.5


@dataclass(frozen=True)
class EdgeworthCurve:
    kappa: float

    def __call__(self, x):
        return edgeworth_cdf(x, self.kappa)

    def derivative(self, x):
        x = np.asarray(x, dtype=float)
        _, pdf = std_normal(x)
        return pdf * (1.0 + self.kappa * x * (3.0 - 2.0 * x * x) / 6.0)

    def critical_points(self) -> np.ndarray:
        """Real stationary points (solutions of ``-2 kappa x^3 + 3 kappa x + 6 = 0``)."""
        if self.kappa == 0.0:
            return np.empty(0)
        roots = np.roots([-2.0 * self.kappa, 0.0, 3.0 * self.kappa, 6.0])
        return np.sort(roots[np.abs(roots.imag) < 1e-9].real)


@dataclass(frozen=True)
class NormalCurve:
    def __call__(self, x):
        return normal_cdf(x)

    def critical_points(self) -> np.ndarray:
        return np.empty(0)


def empirical_edgeworth(A, P_hat, eig_A: TruncatedEigen, i: int, k: int) -> EdgeworthCurve:
    return EdgeworthCurve(empirical_kappa(A, P_hat, eig_A, k, i))


@dataclass(frozen=True)
class SmootherScale:
    """Standard deviation of the Gaussian smoother added to ``T`` (and ``T*``)."""

    sd: float

    def __post_init__(self):
        if not (math.isfinite(self.sd) and self.sd >= 0):
            raise ConfigError(f"smoother sd must be finite and >= 0, got {self.sd}")


def smoother_scale(kind: str, beta: float, rho: float, n: int, tau: float = 1.0) -> SmootherScale:
    """``general``: ``tau * beta * sqrt(log n / (n rho^3))``; ``graph``: ``tau * sqrt(log n / (n rho))``."""
    if n < 2 or rho <= 0 or tau < 0:
        raise ConfigError("smoother needs n >= 2, rho > 0, tau >= 0")
    if kind == "general":
        return SmootherScale(tau * math.sqrt(beta * beta * math.log(n) / (n * rho ** 3)))
    if kind == "graph":
        return SmootherScale(tau * math.sqrt(math.log(n) / (n * rho)))
    raise ConfigError(f"unknown smoother kind {kind!r}")
