"""Simulation drivers.

Each driver takes a :class:`RunConfig` and returns an :class:`ExperimentResult`
holding CSV tables and a manifest.  Every random quantity is derived from
``cfg.seed`` through keyed streams whose identifiers include the experiment
name and the model parameters, so reruns are byte-identical regardless of
``cfg.threads``.
"""
from __future__ import annotations

import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .bootstrap import bootstrap_cdf, bootstrap_context
from .config import RunConfig
from .edgeworth import EdgeworthCurve, NormalCurve, empirical_kappa, normal_cdf, population_kappa
from .errors import ConfigError
from .estimators import bias_correct, estimate_D_hat, estimate_P_hat
from .expansion import expansion_report
from .io import ensure_dir, write_csv, write_json
from .linalg import align_signs, truncated_spectral
from .models import (ModelInstance, build_graph_rank_one, build_rank_one_toy, build_sbm,
                     discrete_noise, exponential_noise, noise_moments, sample_bernoulli_graph)
from .montecarlo import EmpiricalCdf, McResult, mc_true_cdf, run_chunks, tv_distance
from .rng import replicate_seed

__all__ = [
    "ExperimentResult",
    "experiment_sbm_edgeworth",
    "experiment_fig1_toy",
    "experiment_bootstrap_vs_eee",
    "experiment_bias_mse",
    "experiment_expansion_check",
    "run_experiment",
    "write_outputs",
    "sbm_instance",
]

CURVE_HEADER = ["n", "rho", "beta_delta", "x", "F", "Phi", "G", "Ghat", "Fstar"]
TV_HEADER = ["n", "rho", "beta_delta", "i", "kappa", "tv_phi", "tv_g", "tv_ghat", "tv_boot"]
NAN = float("nan")


@dataclass
class ExperimentResult:
    experiment: str
    tables: dict = field(default_factory=dict)      # file name -> (header, rows)
    manifest: dict = field(default_factory=dict)

    def table(self, name: str) -> np.ndarray:
        header, rows = self.tables[name]
        return np.array(rows, dtype=float).reshape(-1, len(header))

    def column(self, name: str, col: str) -> np.ndarray:
        header = self.tables[name][0]
        return self.table(name)[:, header.index(col)]


def _rhos(cfg: RunConfig, n: int, *default_exponents: float) -> list[float]:
    if cfg.rho is not None:
        return [cfg.rho]
    return [n ** e for e in (cfg.rho_exponent or default_exponents)]


def _noise(cfg: RunConfig, default: str, rho: float):
    kind = cfg.kind or default
    if kind == "discrete":
        return discrete_noise(rho)
    if kind == "exponential":
        return exponential_noise(rho)
    raise ConfigError(f"kind={kind!r} is not available for {cfg.experiment}")


def sbm_instance(cfg: RunConfig, n: int, rho: float, beta_delta: float, default_kind: str) -> ModelInstance:
    """Two-block SBM with ``Delta = n^beta_delta sqrt(n rho)`` (or ``cfg.delta``)."""
    delta = cfg.delta if cfg.delta is not None else n ** beta_delta * math.sqrt(n * rho)
    return build_sbm(n, cfg.a, cfg.b, delta).with_noise(_noise(cfg, default_kind, rho))


def _grid(cfg: RunConfig) -> np.ndarray:
    return np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)


def _check_target(cfg: RunConfig, model: ModelInstance) -> None:
    if cfg.k >= model.d:
        raise ConfigError(f"k={cfg.k} out of range for d={model.d}")
    if cfg.i >= model.n:
        raise ConfigError(f"i={cfg.i} out of range for n={model.n}")


def _key(name: str, *params) -> str:
    return ":".join([name] + [repr(p) for p in params])


def _theory(model: ModelInstance, k: int) -> np.ndarray:
    var, third, _ = noise_moments(model.noise, model.n)
    return population_kappa(third, var, model.eig, k)


def _edgeworth_tables(cfg, res: ExperimentResult, mc: McResult, kap, n, rho, bd) -> None:
    curves, tv = res.tables["curves.csv"][1], res.tables["tv_table.csv"][1]
    for pos, i in enumerate(mc.rows):
        F = EmpiricalCdf(mc.T[:, pos])
        tv.append([n, rho, bd, int(i), kap[i], tv_distance(F, NormalCurve()),
                   tv_distance(F, EdgeworthCurve(kap[i])), NAN, NAN])
    F = mc.cdf(cfg.i)
    G = EdgeworthCurve(kap[cfg.i])
    for x in _grid(cfg):
        curves.append([n, rho, bd, x, F(x), normal_cdf(x), G(x), NAN, NAN])


def _new_result(cfg: RunConfig, extra_tables=()) -> ExperimentResult:
    res = ExperimentResult(cfg.experiment)
    res.tables["curves.csv"] = (CURVE_HEADER, [])
    res.tables["tv_table.csv"] = (TV_HEADER, [])
    for name, header in extra_tables:
        res.tables[name] = (header, [])
    res.manifest.update(_manifest_head(cfg))
    return res


def _manifest_head(cfg: RunConfig) -> dict:
    return {"config": cfg.to_dict(), "version": __version__, "runs": [], "wall_time": {},
            "seed_scheme": "replicate t of run KEY uses hash64(seed, KEY, t); "
                           "bootstrap draw b uses hash64(replicate seed, 'boot', b)"}


def experiment_sbm_edgeworth(cfg: RunConfig) -> ExperimentResult:
    """True CDF of ``T_ik`` versus the normal and Edgeworth approximations on the SBM."""
    res = _new_result(cfg)
    for n in cfg.n:
        for rho in _rhos(cfg, n, -1.0 / 3.0):
            for bd in cfg.beta_delta:
                t0 = time.perf_counter()
                model = sbm_instance(cfg, n, rho, bd, "discrete")
                _check_target(cfg, model)
                key = _key(cfg.experiment, n, rho, bd)
                mc = mc_true_cdf(model, cfg.k, cfg.nmc, cfg.seed, experiment=key,
                                 threads=cfg.threads, bias=cfg.bias)
                _edgeworth_tables(cfg, res, mc, _theory(model, cfg.k), n, rho, bd)
                res.manifest["runs"].append({"key": key, "lam": model.eig.lam.tolist(),
                                             "dropped": mc.dropped, "nmc": mc.requested})
                res.manifest["wall_time"][key] = time.perf_counter() - t0
    return res


def experiment_fig1_toy(cfg: RunConfig) -> ExperimentResult:
    """Rank-one constant signal with entries ``n^(-5/12)`` under three-point noise."""
    res = _new_result(cfg)
    for n in cfg.n:
        for rho in _rhos(cfg, n, -1.0 / 3.0):
            t0 = time.perf_counter()
            model = build_rank_one_toy(n).with_noise(_noise(cfg, "discrete", rho))
            _check_target(cfg, model)
            key = _key(cfg.experiment, n, rho)
            mc = mc_true_cdf(model, cfg.k, cfg.nmc, cfg.seed, experiment=key,
                             threads=cfg.threads, bias=cfg.bias)
            _edgeworth_tables(cfg, res, mc, _theory(model, cfg.k), n, rho, NAN)
            res.manifest["runs"].append({"key": key, "lam": model.eig.lam.tolist(),
                                         "dropped": mc.dropped, "nmc": mc.requested})
            res.manifest["wall_time"][key] = time.perf_counter() - t0
    return res


def experiment_bootstrap_vs_eee(cfg: RunConfig) -> ExperimentResult:
    """Residual bootstrap and empirical Edgeworth versus normal, over repeated observations.

    The true CDF comes from one Monte Carlo run of ``cfg.nmc`` replicates.  Each
    of ``cfg.repeats`` observations yields a bootstrap CDF (``cfg.nboot``
    draws) and an empirical Edgeworth curve; ``tv_table.csv`` reports their mean
    TV per row and ``repeats.csv`` the per-repeat values.
    """
    rep_header = ["n", "rho", "beta_delta", "repeat", "i", "tv_phi", "tv_g", "tv_ghat", "tv_boot"]
    res = _new_result(cfg, [("repeats.csv", rep_header)])
    reps = res.tables["repeats.csv"][1]
    for n in cfg.n:
        for rho in _rhos(cfg, n, -0.25):
            for bd in cfg.beta_delta:
                t0 = time.perf_counter()
                model = sbm_instance(cfg, n, rho, bd, "exponential")
                _check_target(cfg, model)
                k, eig = cfg.k, model.eig
                key = _key(cfg.experiment, n, rho, bd)
                mc = mc_true_cdf(model, k, cfg.nmc, cfg.seed, experiment=key + ":oracle",
                                 threads=cfg.threads, bias=cfg.bias)
                kap = _theory(model, k)
                Fs = [EmpiricalCdf(mc.T[:, i]) for i in range(n)]
                tv_phi = np.array([tv_distance(F, NormalCurve()) for F in Fs])
                tv_g = np.array([tv_distance(F, EdgeworthCurve(kap[i])) for i, F in enumerate(Fs)])
                tv_ghat = np.empty((cfg.repeats, n))
                tv_boot = np.empty((cfg.repeats, n))
                dropped = 0
                for r in range(cfg.repeats):
                    obs_seed = replicate_seed(cfg.seed, key + ":obs", r)
                    A = model.sample(obs_seed)
                    eig_A = truncated_spectral(A, eig.p, eig.q)
                    # T and T* live in the frame of u; flip both if u_hat points the other way
                    sgn = float(align_signs(eig_A, eig)[k])
                    ctx = bootstrap_context(A, eig.p, eig.q, ks=(k,), eig_A=eig_A)
                    boot = bootstrap_cdf(ctx, k, cfg.nboot, seed=obs_seed, threads=cfg.threads)
                    dropped += int(boot.dropped.max())
                    khat = sgn * empirical_kappa(A, ctx.P_hat, eig_A, k)
                    for i in range(n):
                        Fstar = EmpiricalCdf(sgn * boot.values(i))
                        tv_ghat[r, i] = tv_distance(Fs[i], EdgeworthCurve(khat[i]))
                        tv_boot[r, i] = tv_distance(Fs[i], Fstar)
                    i = cfg.i
                    reps.append([n, rho, bd, r, i, tv_phi[i], tv_g[i], tv_ghat[r, i], tv_boot[r, i]])
                    if r == 0:
                        F, G, Gh = Fs[i], EdgeworthCurve(kap[i]), EdgeworthCurve(khat[i])
                        Fstar = EmpiricalCdf(sgn * boot.values(i))
                        for x in _grid(cfg):
                            res.tables["curves.csv"][1].append(
                                [n, rho, bd, x, F(x), normal_cdf(x), G(x), Gh(x), Fstar(x)])
                tv = res.tables["tv_table.csv"][1]
                for i in range(n):
                    tv.append([n, rho, bd, i, kap[i], tv_phi[i], tv_g[i],
                               tv_ghat[:, i].mean(), tv_boot[:, i].mean()])
                res.manifest["runs"].append({
                    "key": key, "lam": eig.lam.tolist(), "dropped_mc": mc.dropped, "nmc": mc.requested,
                    "dropped_boot": dropped, "nboot": cfg.nboot, "repeats": cfg.repeats,
                    "target": {"i": cfg.i, "k": k, "tv_phi": tv_phi[cfg.i], "tv_g": tv_g[cfg.i],
                               "tv_ghat_mean": tv_ghat[:, cfg.i].mean(),
                               "tv_ghat_sd": tv_ghat[:, cfg.i].std(ddof=1) if cfg.repeats > 1 else 0.0,
                               "tv_boot_mean": tv_boot[:, cfg.i].mean(),
                               "tv_boot_sd": tv_boot[:, cfg.i].std(ddof=1) if cfg.repeats > 1 else 0.0}})
                res.manifest["wall_time"][key] = time.perf_counter() - t0
    return res


def experiment_bias_mse(cfg: RunConfig) -> ExperimentResult:
    """Squared-error gain of bias correction on a rank-one Bernoulli graph.

    ``statistic = (n rho)^2 (||u_hat s - u||^2 - ||u_hat^(c) s - u||^2)`` with
    ``p = p_scale sqrt(rho)`` and ``q = q_scale sqrt(rho)``.
    """
    res = ExperimentResult(cfg.experiment)
    rows = []
    res.tables["boxplot.csv"] = (["n", "rho", "replicate", "statistic"], rows)
    res.manifest.update(_manifest_head(cfg))
    for n in cfg.n:
        for rho in _rhos(cfg, n, -0.5, -1.0 / 3.0):
            t0 = time.perf_counter()
            model = build_graph_rank_one(n, cfg.p_scale * math.sqrt(rho), cfg.q_scale * math.sqrt(rho))
            u = model.eig.U[:, 0]
            key = _key(cfg.experiment, n, rho)
            scale = (n * rho) ** 2

            def work(lo, hi):
                out = np.empty(hi - lo)
                for t in range(lo, hi):
                    A = sample_bernoulli_graph(model.P, replicate_seed(cfg.seed, key, t))
                    eig_A = truncated_spectral(A, 1, 0, check=False)
                    s = align_signs(eig_A, model.eig)[0]
                    D_hat = estimate_D_hat(A, estimate_P_hat(eig_A))
                    uc = bias_correct(eig_A, D_hat, 0)
                    out[t - lo] = scale * (np.sum((eig_A.U[:, 0] * s - u) ** 2) - np.sum((uc * s - u) ** 2))
                return out

            stats = np.concatenate(run_chunks(work, cfg.replicates, 50, cfg.threads))
            rows.extend([n, rho, t, v] for t, v in enumerate(stats))
            res.manifest["runs"].append({"key": key, "lam": model.eig.lam.tolist(),
                                         "median": float(np.median(stats))})
            res.manifest["wall_time"][key] = time.perf_counter() - t0
    return res


def experiment_expansion_check(cfg: RunConfig) -> ExperimentResult:
    """Sup-norm residuals after zero, one and two expansion terms on the SBM.

    Uses ``Delta = n rho`` unless ``cfg.delta`` is set.
    """
    res = ExperimentResult(cfg.experiment)
    rows = []
    res.tables["expansion.csv"] = (["seed", "n", "r0", "r1", "r2"], rows)
    res.manifest.update(_manifest_head(cfg))
    for n in cfg.n:
        for rho in _rhos(cfg, n, -1.0 / 3.0):
            t0 = time.perf_counter()
            delta = cfg.delta if cfg.delta is not None else n * rho
            model = build_sbm(n, cfg.a, cfg.b, delta).with_noise(_noise(cfg, "discrete", rho))
            _check_target(cfg, model)
            key = _key(cfg.experiment, n, rho)

            def work(lo, hi):
                out = []
                for t in range(lo, hi):
                    seed = replicate_seed(cfg.seed, key, t)
                    r = expansion_report(model.sample(seed), model.eig, cfg.k)
                    out.append([seed, n, r.r0, r.r1, r.r2])
                return out

            for chunk in run_chunks(work, cfg.replicates, 25, cfg.threads):
                rows.extend(chunk)
            res.manifest["runs"].append({"key": key, "lam": model.eig.lam.tolist()})
            res.manifest["wall_time"][key] = time.perf_counter() - t0
    return res


_DRIVERS = {
    "sbm-edgeworth": experiment_sbm_edgeworth,
    "fig1-toy": experiment_fig1_toy,
    "bootstrap-eee": experiment_bootstrap_vs_eee,
    "bias-mse": experiment_bias_mse,
    "expansion-check": experiment_expansion_check,
}


def run_experiment(cfg: RunConfig) -> ExperimentResult:
    return _DRIVERS[cfg.experiment](cfg)


def write_outputs(res: ExperimentResult, outdir) -> list[str]:
    """Write every table plus ``manifest.json``; returns the written paths."""
    ensure_dir(outdir)
    paths = []
    for name, (header, rows) in res.tables.items():
        path = os.path.join(outdir, name)
        write_csv(path, header, rows)
        paths.append(path)
    path = os.path.join(outdir, "manifest.json")
    write_json(path, _jsonable(res.manifest))
    paths.append(path)
    return paths


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj
