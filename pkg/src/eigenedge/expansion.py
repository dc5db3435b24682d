"""First- and second-order stochastic expansion of sample eigenvectors.

These terms need the population eigenpairs and the realised noise ``E``, so
they are simulation-only diagnostics: they check the estimators and measure
how much of ``u_hat_k - u_k`` each order explains.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .estimators import apply_expansion_operator
from .linalg import TruncatedEigen, align_signs, truncated_spectral

__all__ = [
    "first_order_term",
    "second_order_term",
    "angle_expansion",
    "ExpansionReport",
    "expansion_report",
    "v_vector",
    "variance_expansion_terms",
    "studentized_decomposition",
]


def first_order_term(eig_P: TruncatedEigen, E, k: int) -> np.ndarray:
    """``psi_k = (I - u_k u_k^T + sum_{m != k} lam_m u_m u_m^T/(lam_k - lam_m)) E u_k / lam_k``."""
    Eu = np.asarray(E, dtype=float) @ eig_P.U[:, k]
    return apply_expansion_operator(eig_P, k, Eu, 1.0) / eig_P.lam[k]


def second_order_term(eig_P: TruncatedEigen, E, k: int) -> np.ndarray:
    """``q_k = (I - 3/2 u_k u_k^T + sum_{m != k} ...) E^2 u_k / lam_k^2``."""
    E = np.asarray(E, dtype=float)
    E2u = E @ (E @ eig_P.U[:, k])
    return apply_expansion_operator(eig_P, k, E2u, 1.5) / eig_P.lam[k] ** 2


def angle_expansion(eig_P: TruncatedEigen, E, k: int, m: int, sign: float = 1.0) -> tuple[float, float, float]:
    """Predicted inner products between population and sample eigenvectors.

    Returns ``(self_pred, cross_first, cross_second)`` where ``self_pred``
    approximates ``u_k^T u_hat_k - sgn`` and ``cross_first + cross_second``
    approximates ``sgn * u_m^T u_hat_k``.
    """
    if m == k:
        raise ConfigError("angle expansion needs m != k")
    E = np.asarray(E, dtype=float)
    uk, um = eig_P.U[:, k], eig_P.U[:, m]
    lk, lm = eig_P.lam[k], eig_P.lam[m]
    Euk = E @ uk
    E2uk = E @ Euk
    self_pred = -sign * float(uk @ E2uk) / (2.0 * lk ** 2)
    cross_first = float(um @ Euk) / (lk - lm)
    cross_second = float(um @ E2uk) / (lk * (lk - lm))
    return self_pred, cross_first, cross_second


@dataclass(frozen=True)
class ExpansionReport:
    r0: float
    r1: float
    r2: float
    sign: float


def expansion_report(A, eig_P: TruncatedEigen, k: int, eig_A: TruncatedEigen | None = None) -> ExpansionReport:
    """Sup-norm residuals after removing zero, one and two expansion terms."""
    A = np.asarray(A, dtype=float)
    E = A - eig_P.reconstruct()
    if eig_A is None:
        eig_A = truncated_spectral(A, eig_P.p, eig_P.q)
    sign = float(align_signs(eig_A, eig_P)[k])
    dev = eig_A.U[:, k] * sign - eig_P.U[:, k]
    psi = first_order_term(eig_P, E, k)
    q = second_order_term(eig_P, E, k)
    r0 = float(np.max(np.abs(dev)))
    r1 = float(np.max(np.abs(dev - psi)))
    r2 = float(np.max(np.abs(dev - psi - q)))
    return ExpansionReport(r0, r1, r2, sign)


def v_vector(eig_P: TruncatedEigen, i: int, k: int) -> np.ndarray:
    """``v_ik = -u_ik u_k + sum_{m != k} lam_m u_im u_m / (lam_k - lam_m)``."""
    U, lam = eig_P.U, eig_P.lam
    v = -U[i, k] * U[:, k]
    for m in range(eig_P.d):
        if m != k:
            v = v + lam[m] * U[i, m] / (lam[k] - lam[m]) * U[:, m]
    return v


def variance_expansion_terms(eig_P: TruncatedEigen, E, sigma2, i: int, k: int) -> tuple[float, float]:
    """The two leading terms in the expansion of ``(s_hat^2 - s^2) / s^2``.

    ``sum_j (E_ij^2 - sigma_ij^2) u_jk^2 / (s^2 lam^2)`` and
    ``sum_{a,b} 2 E_ia^2 E_ab u_ak u_bk / (lam^3 s^2)``.
    """
    E = np.asarray(E, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    u, lk = eig_P.U[:, k], eig_P.lam[k]
    s2 = float(sigma2[i] @ u ** 2) / lk ** 2
    first = float((E[i] ** 2 - sigma2[i]) @ u ** 2) / (s2 * lk ** 2)
    second = 2.0 * float((E[i] ** 2 * u) @ (E @ u)) / (lk ** 3 * s2)
    return first, second


def studentized_decomposition(eig_P: TruncatedEigen, E, sigma2, i: int, k: int) -> tuple[float, float, float]:
    """``(T_sharp, delta, Delta)`` with ``T_ik ~ T_sharp - T_sharp delta / 2 + Delta``.

    ``T_sharp`` is the linear leading term, ``delta`` the variance-ratio
    fluctuation, and ``Delta`` collects the entries ``E_ab`` with ``a, b != i``.
    """
    E = np.asarray(E, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    u, lk = eig_P.U[:, k], eig_P.lam[k]
    s2 = float(sigma2[i] @ u ** 2) / lk ** 2
    s = np.sqrt(s2)
    row = E[i]
    eiEu = float(row @ u)
    t_sharp = eiEu / (s * lk)
    delta = float((row ** 2 - sigma2[i]) @ u ** 2) / (s2 * lk ** 2)
    v = v_vector(eig_P, i, k)
    w = (row / lk + v) / (s * lk) - eiEu * row ** 2 * u / (lk ** 4 * s ** 3)
    mask = np.ones(E.shape[0], dtype=bool)
    mask[i] = False
    Delta = float(w[mask] @ (E[np.ix_(mask, mask)] @ u[mask]))
    return t_sharp, delta, Delta
