"""Plug-in estimators for entrywise eigenvector inference.

The second-order bias of the ``k``-th sample eigenvector is

    b_k = (I - 3/2 u_k u_k^T + sum_{m != k} lam_m u_m u_m^T / (lam_k - lam_m)) D u_k / lam_k^2

with ``D = diag(E E^2)``.  Feeding population eigenpairs and the true ``D``
gives the population bias; feeding the truncated decomposition of ``A`` and
the residual-based ``D_hat`` gives its plug-in estimate.  Projectors are
never formed explicitly.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateError, EigengapError, ShapeError
from .linalg import TruncatedEigen, align_signs, symmetric_dilation, truncated_spectral

__all__ = [
    "estimate_P_hat",
    "estimate_D_hat",
    "population_D",
    "apply_expansion_operator",
    "bias_vector",
    "bias_correct",
    "variance_plugin",
    "variance_population",
    "studentize",
    "EntrywiseInference",
    "entrywise_inference",
    "DenoisingInference",
    "denoising_inference",
]

GAP_TOL = 1e-10


def apply_expansion_operator(eig: TruncatedEigen, k: int, x: np.ndarray, self_weight: float) -> np.ndarray:
    """``(I - c u_k u_k^T + sum_{m != k} lam_m u_m u_m^T / (lam_k - lam_m)) x`` with ``c = self_weight``.

    ``x`` may be a vector or an ``n x B`` block of vectors.
    """
    lam, U = eig.lam, eig.U
    lk = lam[k]
    if lk == 0.0:
        raise EigengapError(f"lambda_{k} is zero")
    coef = np.empty(eig.d)
    for m in range(eig.d):
        if m == k:
            coef[m] = -self_weight
            continue
        gap = lk - lam[m]
        if abs(gap) < GAP_TOL * abs(lk):
            raise EigengapError(f"|lambda_{k} - lambda_{m}| = {abs(gap):.3e} is below tolerance")
        coef[m] = lam[m] / gap
    proj = U.T @ x
    proj = coef[:, None] * proj if proj.ndim == 2 else coef * proj
    return x + U @ proj


def estimate_P_hat(eig_A: TruncatedEigen) -> np.ndarray:
    """Rank-d reconstruction ``U_A S_A U_A^T``."""
    if eig_A.d == 0:
        raise ConfigError("P_hat needs d >= 1")
    return eig_A.reconstruct()


def estimate_D_hat(A, P_hat) -> np.ndarray:
    """Row sums of squared residuals, the diagonal of ``D_hat``."""
    A = np.asarray(A, dtype=float)
    P_hat = np.asarray(P_hat, dtype=float)
    if A.shape != P_hat.shape:
        raise ShapeError(f"shape mismatch {A.shape} vs {P_hat.shape}")
    R = A - P_hat
    return np.einsum("ij,ij->i", R, R)


def population_D(sigma2) -> np.ndarray:
    """Diagonal of ``E E^2`` from the entrywise variance matrix."""
    return np.asarray(sigma2, dtype=float).sum(axis=1)


def bias_vector(eig: TruncatedEigen, Ddiag, k: int) -> np.ndarray:
    """Second-order bias of eigenvector ``k`` given the diagonal of ``D``."""
    Ddiag = np.asarray(Ddiag, dtype=float)
    if Ddiag.shape != (eig.n,):
        raise ShapeError(f"Ddiag must have length {eig.n}")
    u = eig.U[:, k]
    return apply_expansion_operator(eig, k, Ddiag * u, 1.5) / eig.lam[k] ** 2


def bias_correct(eig_A: TruncatedEigen, Ddiag, k: int) -> np.ndarray:
    """``u_hat_k - b_hat_k``; deliberately not renormalized."""
    return eig_A.U[:, k] - bias_vector(eig_A, Ddiag, k)


def variance_plugin(A, P_hat, eig_A: TruncatedEigen, i, k: int):
    """``s_hat_ik^2 = sum_j (A_ij - p_hat_ij)^2 u_hat_jk^2 / lam_hat_k^2``.

    ``i=None`` returns the vector over all rows.
    """
    lk = eig_A.lam[k]
    if lk == 0.0:
        raise DegenerateError(f"lambda_hat_{k} is zero")
    A = np.asarray(A, dtype=float)
    u2 = eig_A.U[:, k] ** 2
    if i is None:
        R = A - P_hat
        return (R * R) @ u2 / lk ** 2
    r = A[i] - P_hat[i]
    return float((r * r) @ u2 / lk ** 2)


def variance_population(sigma2, eig: TruncatedEigen, i, k: int):
    """``s_ik^2 = sum_j sigma_ij^2 u_jk^2 / lam_k^2`` (vector when ``i`` is None)."""
    sigma2 = np.asarray(sigma2, dtype=float)
    u2 = eig.U[:, k] ** 2
    if i is None:
        return sigma2 @ u2 / eig.lam[k] ** 2
    return float(sigma2[i] @ u2 / eig.lam[k] ** 2)


def studentize(u_hat, u, b, s, sign=1.0):
    """``(u_hat * sign - u - b) / s``; works elementwise on arrays."""
    s_arr = np.asarray(s, dtype=float)
    if np.any(~(s_arr > 0)):
        raise DegenerateError("standard deviation must be positive to studentize")
    T = (np.asarray(u_hat) * sign - u - b) / s_arr
    return float(T) if np.ndim(T) == 0 else T


@dataclass(frozen=True)
class EntrywiseInference:
    """Per-row quantities for a fixed eigenvector index ``k`` (arrays over ``i``)."""

    k: int
    sign: float
    u_hat: np.ndarray       # raw sample eigenvector (not sign-adjusted)
    s2: np.ndarray          # plug-in variance s_hat_ik^2
    bias: np.ndarray        # bias entries in the frame of the reference u_k
    T: np.ndarray

    def row(self, i: int) -> dict:
        return {"i": i, "k": self.k, "s2": float(self.s2[i]), "b": float(self.bias[i]),
                "T": float(self.T[i])}


def entrywise_inference(A, reference: TruncatedEigen, k: int, *, Ddiag=None,
                        eig_A: TruncatedEigen | None = None, bias: str = "population") -> EntrywiseInference:
    """Studentized statistics ``T_ik`` for every row ``i``.

    ``reference`` holds the population eigenpairs.  With ``bias="population"``
    the bias is computed from ``reference`` and the known ``Ddiag``; with
    ``bias="plugin"`` it is the residual-based estimate, moved into the
    reference frame with ``sgn(u_hat_k^T u_k)``.
    """
    A = np.asarray(A, dtype=float)
    if eig_A is None:
        eig_A = truncated_spectral(A, reference.p, reference.q)
    sign = float(align_signs(eig_A, reference)[k])
    P_hat = estimate_P_hat(eig_A)
    s2 = variance_plugin(A, P_hat, eig_A, None, k)
    if bias == "population":
        if Ddiag is None:
            raise ConfigError("population bias needs the true D diagonal")
        b = bias_vector(reference, Ddiag, k)
    elif bias == "plugin":
        b = sign * bias_vector(eig_A, estimate_D_hat(A, P_hat), k)
    else:
        raise ConfigError(f"bias must be 'population' or 'plugin', got {bias!r}")
    u_hat = eig_A.U[:, k]
    T = studentize(u_hat, reference.U[:, k], b, np.sqrt(s2), sign)
    return EntrywiseInference(k, sign, u_hat, s2, b, T)


@dataclass(frozen=True)
class DenoisingInference:
    u_hat: np.ndarray       # left singular vector, sign-aligned when u is known
    sigma_hat: float
    tau2: np.ndarray
    bias: np.ndarray
    rho_used: float
    T: np.ndarray | None


def denoising_inference(X, r: int, i=None, k: int = 0, *, u=None, sigma=None,
                        rho: float | None = None) -> DenoisingInference:
    """Entrywise inference for the ``k``-th left singular vector of ``X``.

    The rank-``r`` SVD is read off the symmetric dilation of ``X``.  The bias
    ``-rho p1 u_ik / (2 sigma_k^2)`` uses the population ``u`` and ``sigma``
    when supplied, otherwise the sample versions; ``rho`` defaults to the mean
    squared residual.  ``T`` is only available when ``u`` is given.
    """
    X = np.asarray(X, dtype=float)
    p1, p2 = X.shape
    if not (1 <= r <= min(p1, p2)) or not (0 <= k < r):
        raise ConfigError(f"need 1 <= r <= min(p1, p2) and 0 <= k < r, got r={r}, k={k}")
    eig = truncated_spectral(symmetric_dilation(X), r, r, check=False)
    s2 = np.sqrt(2.0)
    U_hat = eig.U[:p1, :r] * s2
    V_hat = eig.U[p1:, :r] * s2
    sig_hat = eig.lam[:r]
    gaps = np.abs(np.diff(sig_hat))
    if r > 1 and np.min(gaps) < GAP_TOL * sig_hat[0]:
        raise EigengapError("sample singular values are not separated")
    M_hat = (U_hat * sig_hat) @ V_hat.T
    R = X - M_hat
    # residuals at the roundoff level of the reconstruction are treated as exact zeros
    R[np.abs(R) <= 64 * np.finfo(float).eps * np.max(np.abs(X))] = 0.0
    tau2 = (R * R) @ V_hat[:, k] ** 2 / sig_hat[k] ** 2
    rho_used = float(np.mean(R * R)) if rho is None else float(rho)
    u_hat = U_hat[:, k]
    T = None
    if u is not None:
        u = np.asarray(u, dtype=float)
        sign = 1.0 if u @ u_hat >= 0 else -1.0
        u_hat = u_hat * sign
        sig_k = sig_hat[k] if sigma is None else float(sigma)
        bias = -rho_used * p1 * u / (2.0 * sig_k ** 2)
        T = studentize(u_hat, u, bias, np.sqrt(tau2))
    else:
        bias = -rho_used * p1 * u_hat / (2.0 * sig_hat[k] ** 2)
    if i is not None:
        return DenoisingInference(u_hat[i], float(sig_hat[k]), tau2[i], bias[i], rho_used,
                                  None if T is None else T[i])
    return DenoisingInference(u_hat, float(sig_hat[k]), tau2, bias, rho_used, T)
