"""Dense symmetric spectral routines.

Eigenvectors are returned with a deterministic sign: the entry of largest
absolute value is positive (lowest index wins ties).  The truncated
decomposition keeps the ``p`` largest eigenvalues followed by the ``q``
smallest, each block in decreasing order, so that the retained eigenvalues
read ``lambda_1 >= ... >= lambda_d``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConfigError, ConvergenceError, RankError, ShapeError

__all__ = [
    "as_symmetric",
    "TruncatedEigen",
    "full_eigh",
    "truncated_spectral",
    "align_signs",
    "symmetric_dilation",
    "eigengap",
    "fix_signs",
]

# relative threshold below which an eigenvalue counts as zero
ZERO_TOL = 1e-10


def as_symmetric(M, tol: float = 0.0) -> np.ndarray:
    """Validate ``M`` as a finite real symmetric matrix.

    With ``tol > 0`` asymmetries up to ``tol * max|M|`` are accepted and
    averaged away; the default demands exact symmetry.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or M.shape[0] == 0:
        raise ShapeError(f"expected a non-empty square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ConfigError("matrix has non-finite entries")
    asym = np.max(np.abs(M - M.T))
    if asym > 0.0:
        scale = max(1.0, float(np.max(np.abs(M))))
        if asym > tol * scale:
            raise ShapeError(f"matrix is not symmetric (max |M - M^T| = {asym:.3e})")
        M = 0.5 * (M + M.T)
    return M


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns of ``V`` so each column's largest-magnitude entry is positive."""
    V = np.array(V, dtype=float, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    V *= signs
    return V


@dataclass(frozen=True)
class TruncatedEigen:
    """``d = p + q`` retained eigenpairs; column ``k`` of ``U`` pairs with ``lam[k]``."""

    U: np.ndarray
    lam: np.ndarray
    p: int
    q: int

    def __post_init__(self):
        if self.U.ndim != 2 or self.U.shape[1] != self.lam.shape[0]:
            raise ShapeError("U must be n x d with d = len(lam)")
        if self.p < 0 or self.q < 0 or self.p + self.q != self.lam.shape[0]:
            raise ShapeError(f"p + q must equal d = {self.lam.shape[0]}")

    @property
    def n(self) -> int:
        return self.U.shape[0]

    @property
    def d(self) -> int:
        return self.lam.shape[0]

    def vec(self, k: int) -> np.ndarray:
        return self.U[:, k]

    def reconstruct(self) -> np.ndarray:
        R = (self.U * self.lam) @ self.U.T
        return 0.5 * (R + R.T)

    def with_signs(self, signs) -> "TruncatedEigen":
        return TruncatedEigen(self.U * np.asarray(signs, dtype=float), self.lam, self.p, self.q)


def _condition_report(A: np.ndarray) -> str:
    fro = float(np.linalg.norm(A))
    return f"n={A.shape[0]}, ||A||_F={fro:.3e}, max|A|={float(np.max(np.abs(A))):.3e}"


def full_eigh(A) -> tuple[np.ndarray, np.ndarray]:
    """All eigenpairs of a symmetric matrix, eigenvalues in decreasing order."""
    A = as_symmetric(A)
    try:
        w, V = np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"eigensolver did not converge ({_condition_report(A)})") from exc
    return w[::-1].copy(), fix_signs(V[:, ::-1])


def _subset(A: np.ndarray, lo: int, hi: int):
    try:
        return scipy.linalg.eigh(A, subset_by_index=[lo, hi], driver="evr", check_finite=False)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise ConvergenceError(f"eigensolver did not converge ({_condition_report(A)})") from exc


def truncated_spectral(A, p: int, q: int = 0, *, check: bool = True) -> TruncatedEigen:
    """The ``p`` most positive and ``q`` most negative eigenpairs of ``A``.

    Raises :class:`RankError` when fewer than ``p`` (resp. ``q``) eigenvalues
    are positive (resp. negative) beyond ``ZERO_TOL`` relative to the spectral
    radius.  ``check=False`` skips the symmetry validation (hot loops only).
    """
    A = as_symmetric(A) if check else A
    n = A.shape[0]
    if p < 0 or q < 0 or p + q == 0 or p + q > n:
        raise ConfigError(f"need 0 < p + q <= n, got p={p}, q={q}, n={n}")
    if p + q > n // 2:
        w, V = np.linalg.eigh(A)
        lam = np.concatenate([w[n - p:][::-1], w[:q][::-1]])
        U = np.concatenate([V[:, n - p:][:, ::-1], V[:, :q][:, ::-1]], axis=1)
        radius = max(abs(w[0]), abs(w[-1]))
    else:
        parts_l, parts_u = [], []
        if p:
            w, V = _subset(A, n - p, n - 1)
            parts_l.append(w[::-1])
            parts_u.append(V[:, ::-1])
        if q:
            w, V = _subset(A, 0, q - 1)
            parts_l.append(w[::-1])
            parts_u.append(V[:, ::-1])
        lam = np.concatenate(parts_l)
        U = np.concatenate(parts_u, axis=1)
        radius = float(np.max(np.abs(lam)))
    tol = ZERO_TOL * max(radius, np.finfo(float).tiny)
    if p and lam[p - 1] <= tol:
        raise RankError(f"requested p={p} positive eigenvalues but lambda_p = {lam[p - 1]:.3e}")
    if q and lam[p + q - 1] >= -tol:
        raise RankError(f"requested q={q} negative eigenvalues but lambda_min = {lam[-1]:.3e}")
    return TruncatedEigen(fix_signs(U), lam.copy(), p, q)


def _cols(x) -> np.ndarray:
    return x.U if isinstance(x, TruncatedEigen) else np.asarray(x, dtype=float)


def align_signs(est, ref) -> np.ndarray:
    """``sign(ref_k . est_k)`` per column; a zero inner product maps to +1."""
    Ue, Ur = _cols(est), _cols(ref)
    Ue = Ue[:, None] if Ue.ndim == 1 else Ue
    Ur = Ur[:, None] if Ur.ndim == 1 else Ur
    if Ue.shape != Ur.shape:
        raise ShapeError(f"cannot align {Ue.shape} against {Ur.shape}")
    s = np.sign(np.einsum("ij,ij->j", Ur, Ue))
    s[s == 0] = 1.0
    return s


def symmetric_dilation(M) -> np.ndarray:
    """``[[0, M], [M^T, 0]]`` for a rectangular ``M``."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2:
        raise ShapeError("dilation needs a 2-D matrix")
    if not np.all(np.isfinite(M)):
        raise ConfigError("matrix has non-finite entries")
    p1, p2 = M.shape
    out = np.zeros((p1 + p2, p1 + p2))
    out[:p1, p1:] = M
    out[p1:, :p1] = M.T
    return out


def eigengap(eig) -> float:
    """min(min_k |lambda_k|, min_k |lambda_k - lambda_{k+1}|)."""
    lam = np.sort(np.asarray(eig.lam if isinstance(eig, TruncatedEigen) else eig, dtype=float))[::-1]
    if lam.size == 0:
        raise ConfigError("eigengap needs d >= 1")
    gap = float(np.min(np.abs(lam)))
    if lam.size > 1:
        gap = min(gap, float(np.min(-np.diff(lam))))
    return gap
