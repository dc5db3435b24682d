"""Empirical CDFs, sup-norm distances and the Monte Carlo replicate runner.

This is the only module that starts worker threads.  Work is cut into
fixed-size chunks whose boundaries do not depend on the thread count, and
every replicate draws from its own keyed stream, so results are bitwise
identical for any number of threads.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateError, EigengapError, QualityError, RankError
from .estimators import bias_vector, population_D
from .linalg import truncated_spectral
from .models import ModelInstance, noise_moments
from .rng import replicate_seed, stream

__all__ = [
    "EmpiricalCdf",
    "tv_distance",
    "run_chunks",
    "McResult",
    "mc_true_cdf",
    "MAX_MC_DROP_FRACTION",
]

MAX_MC_DROP_FRACTION = 0.001


class EmpiricalCdf:
    """Right-continuous step function ``F(x) = #{samples <= x} / m``."""

    def __init__(self, samples):
        x = np.asarray(samples, dtype=float).ravel()
        if x.size == 0:
            raise ConfigError("empirical CDF needs at least one sample")
        if not np.all(np.isfinite(x)):
            raise ConfigError("empirical CDF samples must be finite")
        self.x = np.sort(x)
        self.m = x.size

    def __call__(self, t):
        out = np.searchsorted(self.x, t, side="right") / self.m
        return float(out) if np.ndim(out) == 0 else out

    def left(self, t):
        """``F(t-)``."""
        out = np.searchsorted(self.x, t, side="left") / self.m
        return float(out) if np.ndim(out) == 0 else out

    def jumps(self) -> np.ndarray:
        return np.unique(self.x)

    def quantile(self, probs):
        return np.quantile(self.x, probs)

    def __repr__(self):
        return f"EmpiricalCdf(m={self.m})"


def tv_distance(F: EmpiricalCdf, G) -> float:
    """``sup_x |F(x) - G(x)|`` computed exactly.

    For a continuous ``G`` the supremum on each constancy interval of ``F`` is
    attained at an endpoint or at a stationary point of ``G``; stationary points
    are taken from ``G.critical_points()`` when available, since Edgeworth curves
    need not be monotone.  Two empirical CDFs are compared on the merged jump set.
    """
    if isinstance(G, EmpiricalCdf):
        # both are constant between merged jumps, so checking each jump set suffices
        return float(max(np.max(np.abs(F(F.x) - G(F.x))), np.max(np.abs(F(G.x) - G(G.x)))))
    pts = F.jumps()
    g = np.asarray(G(pts), dtype=float)
    best = max(np.max(np.abs(F(pts) - g)), np.max(np.abs(F.left(pts) - g)))
    crit = getattr(G, "critical_points", None)
    if crit is not None:
        c = np.asarray(crit(), dtype=float)
        if c.size:
            best = max(best, np.max(np.abs(F(c) - np.asarray(G(c), dtype=float))))
    return float(best)


def run_chunks(fn, total: int, chunk: int, threads: int = 1) -> list:
    """``[fn(lo, hi) for each chunk]`` in chunk order, optionally on a thread pool."""
    if total < 0 or chunk < 1 or threads < 1:
        raise ConfigError("run_chunks needs total >= 0, chunk >= 1, threads >= 1")
    bounds = [(lo, min(lo + chunk, total)) for lo in range(0, total, chunk)]
    if threads == 1 or len(bounds) <= 1:
        return [fn(lo, hi) for lo, hi in bounds]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda b: fn(*b), bounds))


@dataclass(frozen=True)
class McResult:
    """Monte Carlo draws of ``T_ik`` for a fixed ``k``: ``T`` is kept x len(rows)."""

    k: int
    rows: np.ndarray
    T: np.ndarray
    dropped: int
    requested: int

    def cdf(self, i: int) -> EmpiricalCdf:
        pos = np.flatnonzero(self.rows == i)
        if pos.size == 0:
            raise ConfigError(f"row {i} was not simulated")
        return EmpiricalCdf(self.T[:, pos[0]])


def mc_true_cdf(model: ModelInstance, k: int, n_mc: int, base_seed: int, *, experiment: str = "mc",
                rows=None, threads: int = 1, bias: str = "population", chunk: int = 1000,
                smoothing_sd: float = 0.0) -> McResult:
    """Sample ``T_ik`` over ``n_mc`` independent observations ``A = P + E``.

    Replicate ``t`` is driven by ``replicate_seed(base_seed, experiment, t)``.
    ``T`` is computed in one pass per replicate (sign against the true ``u_k``,
    population bias unless ``bias="plugin"``, plug-in ``s_hat``).  Replicates with
    a vanishing ``s_hat`` or a rank failure are dropped; more than 0.1% dropped
    raises :class:`QualityError`.
    """
    if n_mc < 100:
        raise ConfigError("n_mc must be >= 100")
    if bias not in ("population", "plugin"):
        raise ConfigError(f"bias must be 'population' or 'plugin', got {bias!r}")
    eig = model.eig
    if not 0 <= k < eig.d:
        raise ConfigError(f"k={k} out of range for d={eig.d}")
    rows = np.arange(model.n) if rows is None else np.atleast_1d(np.asarray(rows, dtype=int))
    u = eig.U[:, k]
    b_pop = None
    if bias == "population":
        b_pop = bias_vector(eig, population_D(noise_moments(model.noise, model.n)[0]), k)[rows]

    def one(t):
        A = model.sample(replicate_seed(base_seed, experiment, t))
        ea = truncated_spectral(A, eig.p, eig.q, check=False)
        uh, lk = ea.U[:, k], ea.lam[k]
        sgn = 1.0 if u @ uh >= 0 else -1.0
        R = A - (ea.U * ea.lam) @ ea.U.T
        R[np.abs(R) <= 64 * np.finfo(float).eps * np.max(np.abs(A))] = 0.0
        s2 = (R[rows] ** 2) @ (uh * uh) / lk ** 2
        if np.any(~(s2 > 0)):
            raise DegenerateError("plug-in variance vanished")
        if b_pop is None:
            D_hat = np.einsum("ij,ij->i", R, R)
            b = sgn * bias_vector(ea, D_hat, k)[rows]
        else:
            b = b_pop
        return (uh[rows] * sgn - u[rows] - b) / np.sqrt(s2)

    def work(lo, hi):
        out = np.full((hi - lo, rows.size), np.nan)
        for t in range(lo, hi):
            try:
                out[t - lo] = one(t)
            except (DegenerateError, RankError, EigengapError):
                pass
        return out

    T = np.concatenate(run_chunks(work, n_mc, chunk, threads), axis=0)
    keep = ~np.isnan(T[:, 0])
    dropped = int(n_mc - np.count_nonzero(keep))
    if dropped > MAX_MC_DROP_FRACTION * n_mc:
        raise QualityError(f"{dropped} of {n_mc} Monte Carlo replicates were degenerate")
    T = T[keep]
    if smoothing_sd > 0:
        T = T + smoothing_sd * stream(base_seed, experiment, "smooth").standard_normal(T.shape)
    return McResult(k, rows, T, dropped, n_mc)
