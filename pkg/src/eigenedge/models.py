"""Signal matrices and noise laws used by the simulations.

All samplers fill the upper triangle (diagonal included) with independent
draws and mirror it, so every returned matrix is exactly symmetric.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConfigError, DomainError, MomentUnavailableError
from .linalg import TruncatedEigen, symmetric_dilation
from .rng import as_generator

__all__ = [
    "NoiseSpec",
    "discrete_noise",
    "exponential_noise",
    "bernoulli_noise",
    "custom_noise",
    "ModelInstance",
    "DenoisingModel",
    "build_sbm",
    "build_rank_one_toy",
    "build_graph_rank_one",
    "build_denoising_model",
    "sample_discrete_noise",
    "sample_centered_exponential_noise",
    "sample_bernoulli_graph",
    "noise_moments",
    "symmetric_from_upper",
]

KINDS = ("discrete", "exponential", "bernoulli", "custom")

# E|X - 1|^3 for X ~ Exp(1)
_EXP_ABS_THIRD = 12.0 / math.e - 2.0


@lru_cache(maxsize=32)
def _triu(n: int):
    return np.triu_indices(n)


def symmetric_from_upper(n: int, values: np.ndarray) -> np.ndarray:
    """Place ``n(n+1)/2`` values on the upper triangle (row-major) and mirror."""
    out = np.zeros((n, n))
    out[_triu(n)] = values
    out += np.triu(out, 1).T
    return out


def _check_rho(rho: float) -> float:
    rho = float(rho)
    if not (0.0 < rho <= 1.0):
        raise ConfigError(f"rho must lie in (0, 1], got {rho}")
    return rho


@dataclass(frozen=True)
class NoiseSpec:
    """Law of the noise entries ``E_ij`` (i <= j), with exact moment closures.

    ``kind`` is one of ``discrete`` (mass rho/5 at 4, 4 rho/5 at -1, 1 - rho
    at 0), ``exponential`` (centred exponential with mean sqrt(rho)),
    ``bernoulli`` (``A_ij ~ Bernoulli(P_ij)``, ``E = A - P``) or ``custom``.
    """

    kind: str
    rho: float = 1.0
    P: np.ndarray | None = field(default=None, repr=False, compare=False)
    sampler: Callable | None = field(default=None, repr=False, compare=False)
    moments: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.kind in ("discrete", "exponential"):
            _check_rho(self.rho)
        if self.kind == "bernoulli" and self.P is None:
            raise ConfigError("bernoulli noise needs the edge-probability matrix P")
        if self.kind == "custom" and self.sampler is None:
            raise ConfigError("custom noise needs a sampler(rng, size)")

    @property
    def iid(self) -> bool:
        return self.kind != "bernoulli"

    def entry_moments(self) -> dict:
        """Scalar moments of one entry: ``var``, ``third``, ``abs_third``, ``fourth``."""
        r = self.rho
        if self.kind == "discrete":
            return {"mean": 0.0, "var": 4.0 * r, "third": 12.0 * r,
                    "abs_third": 68.0 * r / 5.0, "fourth": 52.0 * r}
        if self.kind == "exponential":
            return {"mean": 0.0, "var": r, "third": 2.0 * r ** 1.5,
                    "abs_third": _EXP_ABS_THIRD * r ** 1.5, "fourth": 9.0 * r * r}
        if self.kind == "custom":
            if not self.moments or not {"var", "third"} <= set(self.moments):
                raise MomentUnavailableError("custom noise was built without moment closures")
            return dict(self.moments)
        raise MomentUnavailableError("bernoulli noise has entry-dependent moments; use noise_moments")

    def sample_entries(self, rng: np.random.Generator, size) -> np.ndarray:
        """I.i.d. draws of a single entry's law (not for bernoulli)."""
        if self.kind == "discrete":
            u = rng.random(size)
            return np.where(u < self.rho / 5.0, 4.0, np.where(u < self.rho, -1.0, 0.0))
        if self.kind == "exponential":
            s = math.sqrt(self.rho)
            return s * rng.standard_exponential(size) - s
        if self.kind == "custom":
            return np.asarray(self.sampler(rng, size), dtype=float)
        raise ConfigError("bernoulli noise is not i.i.d.; sample it through sample()")

    def sample(self, n: int, seed) -> np.ndarray:
        """A symmetric ``n x n`` noise matrix."""
        rng = as_generator(seed)
        if self.kind == "bernoulli":
            P = self.P
            if P.shape != (n, n):
                raise ConfigError(f"P has shape {P.shape}, expected ({n}, {n})")
            return _bernoulli_adjacency(P, rng) - P
        return symmetric_from_upper(n, self.sample_entries(rng, n * (n + 1) // 2))


def discrete_noise(rho: float) -> NoiseSpec:
    return NoiseSpec("discrete", _check_rho(rho))


def exponential_noise(rho: float) -> NoiseSpec:
    return NoiseSpec("exponential", _check_rho(rho))


def bernoulli_noise(P) -> NoiseSpec:
    P = np.asarray(P, dtype=float)
    _check_probabilities(P)
    return NoiseSpec("bernoulli", float(np.max(P)) or 1.0, P=P)


def custom_noise(sampler: Callable, moments: dict | None = None, rho: float = 1.0) -> NoiseSpec:
    return NoiseSpec("custom", rho, sampler=sampler, moments=moments)


def _check_probabilities(P: np.ndarray) -> None:
    if not np.all(np.isfinite(P)) or np.any(P < 0.0) or np.any(P > 1.0):
        raise DomainError("edge probabilities must lie in [0, 1]")


def _bernoulli_adjacency(P: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    n = P.shape[0]
    iu = _triu(n)
    return symmetric_from_upper(n, (rng.random(iu[0].size) < P[iu]).astype(float))


def sample_discrete_noise(n: int, rho: float, seed) -> np.ndarray:
    return discrete_noise(rho).sample(n, seed)


def sample_centered_exponential_noise(n: int, rho: float, seed) -> np.ndarray:
    return exponential_noise(rho).sample(n, seed)


def sample_bernoulli_graph(P, seed) -> np.ndarray:
    """Adjacency matrix with ``A_ij ~ Bernoulli(P_ij)`` independently for i <= j."""
    P = np.asarray(P, dtype=float)
    _check_probabilities(P)
    return _bernoulli_adjacency(P, as_generator(seed))


def noise_moments(spec: NoiseSpec, n: int) -> tuple[np.ndarray, np.ndarray, float]:
    """Entrywise variance and third-moment matrices, and ``beta = max E|E_ij|^3``."""
    if spec.kind == "bernoulli":
        P = spec.P
        var = P * (1.0 - P)
        third = var * (1.0 - 2.0 * P)
        # E|A - p|^3 = p(1-p)((1-p)^2 + p^2)
        abs_third = var * ((1.0 - P) ** 2 + P ** 2)
        return var, third, float(np.max(abs_third))
    m = spec.entry_moments()
    abs_third = m.get("abs_third")
    if abs_third is None:
        raise MomentUnavailableError("custom noise lacks an absolute third moment")
    return np.full((n, n), m["var"]), np.full((n, n), m["third"]), float(abs_third)


@dataclass(frozen=True)
class ModelInstance:
    """A signal matrix with its exact truncated eigendecomposition."""

    P: np.ndarray
    eig: TruncatedEigen
    noise: NoiseSpec | None = None

    @property
    def n(self) -> int:
        return self.P.shape[0]

    @property
    def d(self) -> int:
        return self.eig.d

    def with_noise(self, noise: NoiseSpec) -> "ModelInstance":
        return ModelInstance(self.P, self.eig, noise)

    def sample(self, seed) -> np.ndarray:
        """One observation ``A = P + E``."""
        if self.noise is None:
            raise ConfigError("model has no noise attached")
        return self.P + self.noise.sample(self.n, seed)


def build_sbm(n: int, a: float = 3.0, b: float = 1.0, delta: float = 1.0) -> ModelInstance:
    """Two equal blocks, ``P_ij = a delta / n`` within and ``b delta / n`` across.

    Eigenvalues are ``delta (a + b) / 2`` with ``u_1 = 1/sqrt(n)`` and
    ``delta (a - b) / 2`` with ``u_2 = (+1 ... +1, -1 ... -1)/sqrt(n)``.
    """
    if n <= 0 or n % 2:
        raise ConfigError(f"SBM needs a positive even n, got {n}")
    if a <= 0 or b <= 0 or a == b:
        raise ConfigError("SBM needs a, b > 0 with a != b (rank 2)")
    if delta <= 0:
        raise ConfigError("delta must be positive")
    h = n // 2
    block = np.concatenate([np.ones(h), -np.ones(h)])
    P = np.where(np.equal.outer(block, block), a, b) * (delta / n)
    u1 = np.ones(n) / math.sqrt(n)
    u2 = block / math.sqrt(n)
    l1, l2 = delta * (a + b) / 2.0, delta * (a - b) / 2.0
    p, q = (2, 0) if l2 > 0 else (1, 1)
    eig = TruncatedEigen(np.column_stack([u1, u2]), np.array([l1, l2]), p, q)
    return ModelInstance(P, eig)


def build_rank_one_toy(n: int, entry: float | None = None) -> ModelInstance:
    """Constant matrix; by default every entry is ``n^(-5/12)``."""
    if n < 1:
        raise ConfigError("n must be positive")
    if entry is None:
        entry = n ** (-5.0 / 12.0)
    if entry <= 0:
        raise ConfigError("entry must be positive")
    P = np.full((n, n), float(entry))
    eig = TruncatedEigen(np.full((n, 1), 1.0 / math.sqrt(n)), np.array([n * entry]), 1, 0)
    return ModelInstance(P, eig)


def build_graph_rank_one(n: int, p: float, q: float) -> ModelInstance:
    """Rank-one edge-probability matrix with ``u_1`` proportional to ``(p..p, q..q)``.

    ``lambda_1 = n (p^2 + q^2) / 2``; entries are ``p^2``, ``pq`` and ``q^2``.
    """
    if n <= 0 or n % 2:
        raise ConfigError(f"need a positive even n, got {n}")
    if not (0 < p <= 1 and 0 < q <= 1):
        raise ConfigError("p and q must lie in (0, 1]")
    lam = n * (p * p + q * q) / 2.0
    x = np.concatenate([np.full(n // 2, p), np.full(n // 2, q)])
    u = x / math.sqrt(lam)
    P = np.outer(x, x)
    eig = TruncatedEigen(u[:, None], np.array([lam]), 1, 0)
    return ModelInstance(P, eig, bernoulli_noise(P))


@dataclass(frozen=True)
class DenoisingModel:
    """``X = M + Y`` with ``M = sum_k sigma_k u_k v_k^T`` (p1 x p2, rank r)."""

    U: np.ndarray
    V: np.ndarray
    sigmas: np.ndarray
    noise: NoiseSpec

    @property
    def p1(self) -> int:
        return self.U.shape[0]

    @property
    def p2(self) -> int:
        return self.V.shape[0]

    @property
    def r(self) -> int:
        return self.sigmas.shape[0]

    @property
    def M(self) -> np.ndarray:
        return (self.U * self.sigmas) @ self.V.T

    def sample(self, seed) -> np.ndarray:
        rng = as_generator(seed)
        return self.M + self.noise.sample_entries(rng, (self.p1, self.p2))

    def dilation(self) -> ModelInstance:
        """Dilated signal with eigenvectors ``(u_k, +-v_k)/sqrt(2)``, eigenvalues ``+-sigma_k``."""
        s2 = math.sqrt(2.0)
        pos = np.vstack([self.U, self.V]) / s2
        neg = np.vstack([self.U, -self.V]) / s2
        # negative block ordered -sigma_r > ... > -sigma_1
        U = np.concatenate([pos, neg[:, ::-1]], axis=1)
        lam = np.concatenate([self.sigmas, -self.sigmas[::-1]])
        eig = TruncatedEigen(U, lam, self.r, self.r)
        return ModelInstance(symmetric_dilation(self.M), eig, self.noise)


def _delocalized_frame(rng, rows: int, r: int, bound: float) -> np.ndarray | None:
    Q, R = np.linalg.qr(rng.standard_normal((rows, r)))
    Q = Q * np.sign(np.diag(R))
    return Q if np.max(np.abs(Q)) <= bound else None


def build_denoising_model(p1: int, p2: int, r: int, sigmas, rho: float, seed,
                          noise: NoiseSpec | None = None, deloc_const: float = 6.0,
                          max_tries: int = 100) -> tuple[DenoisingModel, np.ndarray]:
    """Random delocalized singular frames plus one noisy observation ``X``.

    Singular vectors come from QR of a seeded Gaussian and are accepted when
    every entry is at most ``deloc_const / sqrt(p1 + p2)``.
    """
    sigmas = np.asarray(sigmas, dtype=float).ravel()
    if sigmas.size != r or r < 1:
        raise ConfigError(f"need r = {r} singular values, got {sigmas.size}")
    if np.any(sigmas <= 0) or np.any(np.diff(sigmas) >= 0):
        raise ConfigError("singular values must be positive and strictly decreasing")
    if r > min(p1, p2):
        raise ConfigError("rank exceeds matrix dimensions")
    noise = noise if noise is not None else exponential_noise(rho)
    rng = as_generator(seed)
    bound = deloc_const / math.sqrt(p1 + p2)
    for _ in range(max_tries):
        U = _delocalized_frame(rng, p1, r, bound)
        V = _delocalized_frame(rng, p2, r, bound)
        if U is not None and V is not None:
            break
    else:
        raise ConfigError(f"no delocalized singular frame after {max_tries} tries")
    model = DenoisingModel(U, V, sigmas, noise)
    return model, model.sample(rng)
