"""Residual and parametric bootstrap for studentized eigenvector entries.

Each draw rebuilds ``A* = P_hat + E*``, recomputes the truncated
decomposition, aligns ``u_hat*_k`` to the observed ``u_hat_k`` and forms

    T*_ik = (u_hat*_ik sgn - u_hat_ik - b_hat_ik) / s_hat*_ik

with ``b_hat`` the plug-in bias of the observed data.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .edgeworth import SmootherScale
from .errors import ConfigError, DegenerateError, EigengapError, QualityError, RankError, ShapeError
from .estimators import bias_vector, estimate_D_hat, estimate_P_hat
from .linalg import TruncatedEigen, as_symmetric, truncated_spectral
from .models import _triu, sample_bernoulli_graph, symmetric_from_upper
from .montecarlo import EmpiricalCdf, run_chunks
from .rng import as_generator, boot_seed, stream

__all__ = [
    "ResidualDistribution",
    "residual_distribution",
    "BootstrapDraw",
    "BootstrapContext",
    "bootstrap_context",
    "residual_bootstrap_draw",
    "parametric_graph_draw",
    "BootstrapResult",
    "bootstrap_cdf",
    "MAX_DROP_FRACTION",
]

log = logging.getLogger(__name__)

MAX_DROP_FRACTION = 0.01
# draws that hit these are dropped and counted rather than aborting the run
_DROPPABLE = (DegenerateError, RankError, EigengapError)


@dataclass(frozen=True)
class ResidualDistribution:
    """Centered upper-triangle residuals (diagonal included) and their raw mean."""

    residuals: np.ndarray
    mu_hat: float

    @property
    def size(self) -> int:
        return self.residuals.size

    def moment(self, order: int) -> float:
        return float(np.mean(self.residuals ** order))


def residual_distribution(A, P_hat) -> ResidualDistribution:
    A = np.asarray(A, dtype=float)
    P_hat = np.asarray(P_hat, dtype=float)
    if A.shape != P_hat.shape or A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ShapeError(f"shape mismatch {A.shape} vs {P_hat.shape}")
    raw = (A - P_hat)[_triu(A.shape[0])]
    mu = float(np.mean(raw))
    return ResidualDistribution(raw - mu, mu)


@dataclass(frozen=True)
class BootstrapDraw:
    A_star: np.ndarray
    eig_star: TruncatedEigen
    T_star: dict = field(default_factory=dict)   # k -> n-vector of T*_ik


@dataclass(frozen=True)
class BootstrapContext:
    """Everything a draw needs from the observed data."""

    P_hat: np.ndarray
    eig_A: TruncatedEigen
    b_hat: dict                     # k -> plug-in bias vector
    Fhat: ResidualDistribution | None
    scheme: str
    clipped: int = 0                # entries of P_hat moved into [0, 1] (graph scheme)

    @property
    def n(self) -> int:
        return self.P_hat.shape[0]


def bootstrap_context(A, p: int, q: int = 0, ks=(0,), scheme: str = "residual",
                      eig_A: TruncatedEigen | None = None) -> BootstrapContext:
    """Fit the observed matrix once: ``P_hat``, ``b_hat_k`` and the residual pool."""
    A = as_symmetric(A)
    if scheme not in ("residual", "graph"):
        raise ConfigError(f"scheme must be 'residual' or 'graph', got {scheme!r}")
    if eig_A is None:
        eig_A = truncated_spectral(A, p, q)
    ks = tuple(int(k) for k in ks)
    if any(not 0 <= k < eig_A.d for k in ks):
        raise ConfigError(f"eigenvector indices {ks} out of range for d={eig_A.d}")
    P_hat = estimate_P_hat(eig_A)
    D_hat = estimate_D_hat(A, P_hat)
    b_hat = {k: bias_vector(eig_A, D_hat, k) for k in ks}
    if scheme == "residual":
        return BootstrapContext(P_hat, eig_A, b_hat, residual_distribution(A, P_hat), scheme)
    clipped = int(np.count_nonzero((P_hat < 0.0) | (P_hat > 1.0)))
    if clipped:
        log.info("graph bootstrap: clipped %d entries of P_hat into [0, 1]", clipped)
    return BootstrapContext(np.clip(P_hat, 0.0, 1.0), eig_A, b_hat, None, scheme, clipped)


def _studentize_draw(A_star, ctx: BootstrapContext, ks) -> BootstrapDraw:
    ref = ctx.eig_A
    eig_star = truncated_spectral(A_star, ref.p, ref.q, check=False)
    R = A_star - eig_star.reconstruct()
    # residuals at the roundoff level of the reconstruction are treated as exact zeros
    R[np.abs(R) <= 64 * np.finfo(float).eps * np.max(np.abs(A_star))] = 0.0
    R2 = R * R
    T = {}
    for k in ks:
        u_star, u_hat = eig_star.U[:, k], ref.U[:, k]
        sgn = 1.0 if u_hat @ u_star >= 0 else -1.0
        s2 = R2 @ (u_star * u_star) / eig_star.lam[k] ** 2
        ok = s2 > 0
        if not np.any(ok):
            raise DegenerateError("bootstrap plug-in variance vanished")
        # rows with zero variance (e.g. isolated vertices) are marked NaN
        T[k] = np.where(ok, (u_star * sgn - u_hat - ctx.b_hat[k]) / np.sqrt(np.where(ok, s2, 1.0)), np.nan)
    return BootstrapDraw(A_star, eig_star, T)


def residual_bootstrap_draw(ctx: BootstrapContext, seed, ks=None) -> BootstrapDraw:
    """One residual-bootstrap draw; upper-triangle entries resampled with replacement."""
    Fhat = ctx.Fhat
    if Fhat is None or Fhat.size == 0:
        raise ConfigError("residual bootstrap needs a non-empty residual pool")
    n = ctx.n
    rng = as_generator(seed)
    idx = rng.integers(0, Fhat.size, size=n * (n + 1) // 2)
    A_star = ctx.P_hat + symmetric_from_upper(n, Fhat.residuals[idx])
    return _studentize_draw(A_star, ctx, tuple(ctx.b_hat) if ks is None else ks)


def parametric_graph_draw(ctx: BootstrapContext, seed, ks=None) -> BootstrapDraw:
    """One Bernoulli draw ``A*_ij ~ Bernoulli(clip(p_hat_ij))``."""
    rng = as_generator(seed)
    A_star = sample_bernoulli_graph(np.clip(ctx.P_hat, 0.0, 1.0), rng)
    return _studentize_draw(A_star, ctx, tuple(ctx.b_hat) if ks is None else ks)


@dataclass(frozen=True)
class BootstrapResult:
    """Bootstrap statistics for eigenvector ``k``.

    ``T`` is draws x n with the smoother already added; entries from draws that
    were degenerate for that row are NaN and ``dropped[i]`` counts them.
    """

    k: int
    T: np.ndarray
    dropped: np.ndarray
    requested: int
    sd: float

    def values(self, i: int) -> np.ndarray:
        col = self.T[:, i]
        return col[~np.isnan(col)]

    def cdf(self, i: int) -> EmpiricalCdf:
        return EmpiricalCdf(self.values(i))

    def quantiles(self, i: int, probs=(0.025, 0.5, 0.975)) -> np.ndarray:
        return np.quantile(self.values(i), probs)


def bootstrap_cdf(ctx: BootstrapContext, k: int, draws: int, smoothing: SmootherScale | None = None,
                  seed: int = 0, threads: int = 1, rows=None, chunk: int = 250) -> BootstrapResult:
    """Collect ``T*_ik`` for every row ``i`` over ``draws`` independent draws.

    Draw ``b`` uses the stream ``boot_seed(seed, b)``, so the output does not
    depend on ``threads``.  When ``smoothing.sd > 0`` an independent Gaussian
    of that scale is added to every ``T*``.  If more than 1% of the draws are
    degenerate for any row in ``rows`` (default: all rows) a
    :class:`QualityError` is raised.
    """
    if draws < 1:
        raise ConfigError("draws must be >= 1")
    if k not in ctx.b_hat:
        raise ConfigError(f"context was not fitted for k={k}")
    draw_fn = residual_bootstrap_draw if ctx.scheme == "residual" else parametric_graph_draw

    def work(lo, hi):
        out = np.full((hi - lo, ctx.n), np.nan)
        for b in range(lo, hi):
            try:
                out[b - lo] = draw_fn(ctx, boot_seed(seed, b), (k,)).T_star[k]
            except _DROPPABLE:
                pass
        return out

    T = np.concatenate(run_chunks(work, draws, chunk, threads), axis=0)
    dropped = np.count_nonzero(np.isnan(T), axis=0)
    checked = dropped if rows is None else dropped[np.atleast_1d(rows)]
    if np.max(checked) > MAX_DROP_FRACTION * draws:
        raise QualityError(f"{int(np.max(checked))} of {draws} bootstrap draws were degenerate")
    sd = 0.0 if smoothing is None else smoothing.sd
    if sd > 0:
        T = T + sd * stream(seed, "smooth", k).standard_normal(T.shape)
    return BootstrapResult(k, T, dropped, draws, sd)
