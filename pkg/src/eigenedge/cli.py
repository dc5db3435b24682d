"""Command-line entry point.

Exit codes: 0 success, 2 configuration error, 3 numerical or degeneracy
error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .bootstrap import bootstrap_cdf, bootstrap_context
from .config import EXPERIMENTS, RunConfig, parse_config
from .edgeworth import EdgeworthCurve, empirical_kappa, normal_cdf, population_kappa, smoother_scale
from .errors import ConfigError, EigenEdgeError, FormatError, NumericError
from .estimators import bias_correct, bias_vector, denoising_inference, estimate_D_hat, estimate_P_hat
from .experiments import experiment_expansion_check, run_experiment, sbm_instance, write_outputs
from .io import format_number, read_matrix, write_csv
from .linalg import align_signs, truncated_spectral
from .models import noise_moments
from .montecarlo import mc_true_cdf
from .rng import replicate_seed

log = logging.getLogger("eigenedge")

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4


def _load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise FormatError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config(text)


def _int_list(s: str) -> tuple:
    try:
        return tuple(int(t) for t in s.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from None


def _emit(path, header, rows) -> None:
    if path is None or path == "-":
        sys.stdout.write(",".join(header) + "\n")
        for row in rows:
            sys.stdout.write(",".join(format_number(v) for v in row) + "\n")
    else:
        write_csv(path, header, rows)


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config).replace(experiment=args.experiment, seed=args.seed,
                                            threads=args.threads, tau=args.tau)
    if args.replicates is not None:
        # the outer replicate count differs by experiment
        field = {"sbm-edgeworth": "nmc", "fig1-toy": "nmc", "bootstrap-eee": "repeats"}.get(
            cfg.experiment, "replicates")
        cfg = cfg.replace(**{field: args.replicates})
    res = run_experiment(cfg)
    for path in write_outputs(res, args.out):
        log.info("wrote %s", path)
    return EXIT_OK


def cmd_edgeworth_compare(args) -> int:
    cfg = _load_config(args.config).replace(seed=args.seed, threads=args.threads, i=args.i, k=args.k,
                                            nmc=args.nmc, grid_points=args.grid_points)
    n = cfg.n[0]
    rho = cfg.rho if cfg.rho is not None else n ** (cfg.rho_exponent or (-1.0 / 3.0,))[0]
    model = sbm_instance(cfg, n, rho, cfg.beta_delta[0], "discrete")
    if cfg.k >= model.d or cfg.i >= n:
        raise ConfigError(f"target (i={cfg.i}, k={cfg.k}) out of range")
    mc = mc_true_cdf(model, cfg.k, cfg.nmc, cfg.seed, experiment="edgeworth-compare",
                     rows=[cfg.i], threads=cfg.threads, bias=cfg.bias)
    var, third, _ = noise_moments(model.noise, n)
    G = EdgeworthCurve(float(population_kappa(third, var, model.eig, cfg.k)[cfg.i]))
    A = model.sample(replicate_seed(cfg.seed, "edgeworth-compare:obs", 0))
    eig_A = truncated_spectral(A, model.eig.p, model.eig.q)
    sgn = float(align_signs(eig_A, model.eig)[cfg.k])
    Gh = EdgeworthCurve(sgn * empirical_kappa(A, estimate_P_hat(eig_A), eig_A, cfg.k, cfg.i))
    F = mc.cdf(cfg.i)
    xs = np.linspace(cfg.grid_lo, cfg.grid_hi, cfg.grid_points)
    rows = [[x, F(x), normal_cdf(x), G(x), Gh(x)] for x in xs]
    _emit(args.out, ["x", "F_true", "Phi", "G_theoretical", "G_empirical"], rows)
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    A = read_matrix(args.matrix)
    ctx = bootstrap_context(A, args.p, args.q, ks=(args.k,), scheme=args.scheme)
    if not 0 <= args.i < ctx.n:
        raise ConfigError(f"i={args.i} out of range for n={ctx.n}")
    smoothing = None
    if args.scheme == "graph":
        rho_hat = float(np.max(ctx.P_hat))
        if rho_hat <= 0:
            raise ConfigError("graph bootstrap needs a fitted P_hat with positive entries")
        smoothing = smoother_scale("graph", 1.0, rho_hat, ctx.n, args.tau)
    res = bootstrap_cdf(ctx, args.k, args.draws, smoothing, seed=args.seed, threads=args.threads,
                        rows=[args.i])
    T = np.sort(res.values(args.i))
    _emit(args.out, ["rank", "T_star"], [[j, t] for j, t in enumerate(T)])
    q = res.quantiles(args.i)
    summary = [["0.025", q[0]], ["0.5", q[1]], ["0.975", q[2]], ["dropped", int(res.dropped[args.i])]]
    if args.summary:
        write_csv(args.summary, ["quantile", "value"], summary)
    elif args.out not in (None, "-"):
        _emit(None, ["quantile", "value"], summary)
    return EXIT_OK


def cmd_bias_correct(args) -> int:
    A = read_matrix(args.matrix)
    eig_A = truncated_spectral(A, args.p, args.q)
    if not 0 <= args.k < eig_A.d:
        raise ConfigError(f"k={args.k} out of range for d={eig_A.d}")
    D_hat = estimate_D_hat(A, estimate_P_hat(eig_A))
    b = bias_vector(eig_A, D_hat, args.k)
    uc = bias_correct(eig_A, D_hat, args.k)
    u = eig_A.U[:, args.k]
    _emit(args.out, ["index", "uhat", "bhat", "ucorrected"],
          [[j, u[j], b[j], uc[j]] for j in range(u.size)])
    return EXIT_OK


def cmd_denoise(args) -> int:
    X = read_matrix(args.matrix, symmetric=False)
    res = denoising_inference(X, args.r, None, args.k, rho=args.rho)
    _emit(args.out, ["index", "uhat", "tau2", "bias"],
          [[j, res.u_hat[j], res.tau2[j], res.bias[j]] for j in range(res.u_hat.size)])
    log.info("sigma_hat=%s rho=%s", format_number(res.sigma_hat), format_number(res.rho_used))
    return EXIT_OK


def cmd_expansion_check(args) -> int:
    cfg = _load_config(args.config).replace(experiment="expansion-check", n=args.n, seed=args.seed,
                                            replicates=args.seeds, k=args.k, threads=args.threads)
    res = experiment_expansion_check(cfg)
    header, rows = res.tables["expansion.csv"]
    _emit(args.out, header, rows)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eigenedge", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a simulation experiment and write CSV outputs")
    s.add_argument("--experiment", choices=EXPERIMENTS, default=None)
    s.add_argument("--config")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--seed", type=int)
    s.add_argument("--replicates", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--tau", type=float)
    s.set_defaults(func=cmd_simulate)

    s = sub.add_parser("edgeworth-compare", help="true CDF vs normal and Edgeworth curves for one entry")
    s.add_argument("--config")
    s.add_argument("--out")
    s.add_argument("--seed", type=int)
    s.add_argument("--nmc", type=int)
    s.add_argument("--i", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--grid-points", type=int)
    s.add_argument("--threads", type=int)
    s.set_defaults(func=cmd_edgeworth_compare)

    s = sub.add_parser("bootstrap", help="bootstrap distribution of T_ik for an observed matrix")
    s.add_argument("--matrix", required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--q", type=int, default=0)
    s.add_argument("--i", type=int, default=0)
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--draws", type=int, default=2000)
    s.add_argument("--scheme", choices=("residual", "graph"), default="residual")
    s.add_argument("--tau", type=float, default=1.0)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--out")
    s.add_argument("--summary")
    s.set_defaults(func=cmd_bootstrap)

    s = sub.add_parser("bias-correct", help="plug-in bias and bias-corrected eigenvector")
    s.add_argument("--matrix", required=True)
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--q", type=int, default=0)
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_bias_correct)

    s = sub.add_parser("denoise", help="entrywise inference for a left singular vector")
    s.add_argument("--matrix", required=True, help="rectangular matrix file ('p1 p2' header)")
    s.add_argument("--r", type=int, required=True)
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--rho", type=float)
    s.add_argument("--out")
    s.set_defaults(func=cmd_denoise)

    s = sub.add_parser("expansion-check", help="residuals after the first- and second-order terms")
    s.add_argument("--config")
    s.add_argument("--n", type=_int_list)
    s.add_argument("--seeds", type=int)
    s.add_argument("--seed", type=int)
    s.add_argument("--k", type=int)
    s.add_argument("--threads", type=int)
    s.add_argument("--out")
    s.set_defaults(func=cmd_expansion_check)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(name)s: %(message)s")
    try:
        return args.func(args)
    except (FormatError, OSError) as exc:
        print(f"eigenedge: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericError as exc:
        print(f"eigenedge: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (EigenEdgeError, ValueError) as exc:
        print(f"eigenedge: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
