import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from eigenedge import (ConfigError, DegenerateError, EmpiricalCdf, NormalCurve, QualityError, RankError,
                       SmootherScale, bootstrap_cdf, bootstrap_context, build_graph_rank_one, build_sbm,
                       exponential_noise, mc_true_cdf, parametric_graph_draw, residual_bootstrap_draw,
                       residual_distribution, sample_bernoulli_graph, tv_distance)
from eigenedge.bootstrap import BootstrapContext, ResidualDistribution
from eigenedge.linalg import truncated_spectral
from eigenedge.rng import boot_seed, replicate_seed, stream


def exp_model(n, bd=0.25):
    rho = n ** -0.25
    return build_sbm(n, 3, 1, n ** bd * math.sqrt(n * rho)).with_noise(exponential_noise(rho))


def test_residual_pool_trivial():
    A = build_sbm(6, 3, 1, 4).P
    F = residual_distribution(A, A)
    assert F.mu_hat == 0.0 and F.size == 21
    np.testing.assert_array_equal(F.residuals, 0)


def test_residual_pool_already_centered():
    R = np.array([[1.0, -1.0, 2.0], [-1.0, -2.0, 0.0], [2.0, 0.0, 0.0]])
    F = residual_distribution(R, np.zeros((3, 3)))
    assert F.mu_hat == 0.0
    np.testing.assert_array_equal(np.sort(F.residuals), [-2, -1, 0, 0, 1, 2])


def test_residual_pool_third_moment_and_centering():
    n = 30
    m = exp_model(n)
    A = m.sample(3)
    P_hat = truncated_spectral(A, 2, 0).reconstruct()
    F = residual_distribution(A, P_hat)
    vals = [A[i, j] - P_hat[i, j] for i in range(n) for j in range(i, n)]
    mu = math.fsum(vals) / len(vals)
    direct = math.fsum((v - mu) ** 3 for v in vals) * 2 / (n * (n + 1))
    assert F.mu_hat == pytest.approx(mu, abs=1e-14)
    assert F.moment(3) == pytest.approx(direct, abs=1e-12)
    assert abs(np.sum(F.residuals)) <= 1e-9 * n * n * np.max(np.abs(F.residuals))


def test_zero_pool_is_degenerate():
    m = build_sbm(12, 3, 1, 8)
    eig = truncated_spectral(m.P, 2, 0)
    fit = bootstrap_context(m.P, 2, 0, ks=(0,), eig_A=eig)
    assert np.max(np.abs(fit.Fhat.residuals)) < 1e-14
    ctx = BootstrapContext(fit.P_hat, eig, fit.b_hat, ResidualDistribution(np.zeros(78), 0.0), "residual")
    with pytest.raises(DegenerateError):
        residual_bootstrap_draw(ctx, 0)
    with pytest.raises(QualityError):
        bootstrap_cdf(ctx, 0, 10)


def test_empty_pool_rejected():
    ctx = bootstrap_context(exp_model(20).sample(0), 2)
    pool = ResidualDistribution(np.zeros(0), 0.0)
    empty = BootstrapContext(ctx.P_hat, ctx.eig_A, ctx.b_hat, pool, "residual")
    with pytest.raises(ConfigError):
        residual_bootstrap_draw(empty, 0)


def test_residual_draw_deterministic_and_aligned():
    m = exp_model(40)
    A = m.sample(1)
    ctx = bootstrap_context(A, 2, 0, ks=(0, 1))
    a, b = residual_bootstrap_draw(ctx, 42), residual_bootstrap_draw(ctx, 42)
    np.testing.assert_array_equal(a.A_star, b.A_star)
    for k in (0, 1):
        np.testing.assert_array_equal(a.T_star[k], b.T_star[k])
    np.testing.assert_array_equal(a.A_star, a.A_star.T)
    E_star = a.A_star - ctx.P_hat
    assert np.all(np.isin(np.round(E_star[np.triu_indices(40)], 12), np.round(ctx.Fhat.residuals, 12)))


def test_alignment_every_draw():
    ctx = bootstrap_context(exp_model(40).sample(2), 2, 0, ks=(0, 1))
    for s in range(50):
        d = residual_bootstrap_draw(ctx, boot_seed(7, s))
        for k in (0, 1):
            u_hat, u_star = ctx.eig_A.U[:, k], d.eig_star.U[:, k]
            sgn = 1.0 if u_hat @ u_star >= 0 else -1.0
            assert u_hat @ (u_star * sgn) >= 0
            R = d.A_star - d.eig_star.reconstruct()
            s2 = (R * R) @ u_star ** 2 / d.eig_star.lam[k] ** 2
            np.testing.assert_allclose(d.T_star[k], (u_star * sgn - u_hat - ctx.b_hat[k]) / np.sqrt(s2),
                                       atol=1e-12)


def test_graph_draw_trivial_cases():
    n = 6
    ctx = bootstrap_context(np.diag([5.0, 4, 3, 2, 1, 0.5]), 2, 0, scheme="graph")
    zero = BootstrapContext(np.zeros((n, n)), ctx.eig_A, ctx.b_hat, None, "graph")
    # A* = 0 exactly, so the studentization has nothing to work with
    np.testing.assert_array_equal(sample_bernoulli_graph(zero.P_hat, 3), 0)
    with pytest.raises((DegenerateError, RankError)):
        parametric_graph_draw(zero, 0)
    P01 = np.kron(np.eye(2), np.ones((3, 3)))
    for s in range(5):
        np.testing.assert_array_equal(sample_bernoulli_graph(P01, boot_seed(1, s)), P01)


def test_graph_draw_mean():
    n = 8
    P = stream(4, "P").uniform(-0.1, 1.1, (n, n))
    P = (P + P.T) / 2
    Pc = np.clip(P, 0, 1)
    draws = 10_000
    total = np.zeros((n, n))
    for s in range(draws):
        total += sample_bernoulli_graph(Pc, boot_seed(5, s))
    se = np.sqrt(Pc * (1 - Pc) / draws)
    assert np.all(np.abs(total / draws - Pc) <= 5 * se + 1e-15)


def test_graph_context_clips():
    m = build_graph_rank_one(60, 0.9, 0.2)
    A = m.sample(1)
    ctx = bootstrap_context(A, 1, 0, scheme="graph")
    assert ctx.P_hat.min() >= 0 and ctx.P_hat.max() <= 1
    raw = truncated_spectral(A, 1, 0).reconstruct()
    assert ctx.clipped == np.count_nonzero((raw < 0) | (raw > 1))


def test_bootstrap_cdf_one_draw():
    ctx = bootstrap_context(exp_model(30).sample(0), 2)
    res = bootstrap_cdf(ctx, 0, 1, rows=[0])
    F = res.cdf(0)
    assert F.m == 1
    x = F.x[0]
    assert F(x) == 1.0 and F.left(x) == 0.0


def test_bootstrap_cdf_thread_and_chunk_invariant():
    ctx = bootstrap_context(exp_model(30).sample(0), 2)
    a = bootstrap_cdf(ctx, 0, 60, seed=3, threads=1, chunk=7)
    b = bootstrap_cdf(ctx, 0, 60, seed=3, threads=4, chunk=25)
    np.testing.assert_array_equal(a.T, b.T)


def test_bootstrap_cdf_seed_exchangeability():
    ctx = bootstrap_context(exp_model(30).sample(0), 2)
    res = bootstrap_cdf(ctx, 0, 40, seed=11)
    # draws in reverse order with the same seed set give the same multiset
    rev = np.array([residual_bootstrap_draw(ctx, boot_seed(11, b), (0,)).T_star[0]
                    for b in reversed(range(40))])
    np.testing.assert_array_equal(np.sort(res.T, axis=0), np.sort(rev, axis=0))


def test_bootstrap_cdf_huge_smoother_is_gaussian():
    ctx = bootstrap_context(exp_model(30).sample(0), 2)
    base = bootstrap_cdf(ctx, 0, 2000, seed=1, rows=[0])
    spread = float(np.std(base.values(0)))
    res = bootstrap_cdf(ctx, 0, 2000, SmootherScale(100 * spread), seed=1, rows=[0])
    v = res.values(0)
    ks = stats.kstest(v, "norm", args=(v.mean(), v.std())).statistic
    assert ks <= 0.05


def test_bootstrap_cdf_quantiles_and_errors():
    ctx = bootstrap_context(exp_model(30).sample(0), 2)
    res = bootstrap_cdf(ctx, 0, 100, seed=2)
    q = res.quantiles(4)
    assert q[0] <= q[1] <= q[2]
    with pytest.raises(ConfigError):
        bootstrap_cdf(ctx, 0, 0)
    with pytest.raises(ConfigError):
        bootstrap_cdf(ctx, 1, 10)


def test_graph_bootstrap_drops_isolated_rows():
    # the low-degree block is often isolated in a draw; u*_i = 0 there, so s*_i vanishes
    n = 40
    m = build_graph_rank_one(n, 0.6, 0.1)
    ctx = bootstrap_context(m.sample(replicate_seed(0, "sparse", 1)), 1, 0, scheme="graph")
    with pytest.raises(QualityError):
        bootstrap_cdf(ctx, 0, 200)
    res = bootstrap_cdf(ctx, 0, 200, rows=[0])
    assert res.dropped[0] <= 2 and res.dropped.max() > 2
    assert np.all(np.isfinite(res.values(0)))
    assert res.values(0).size == 200 - res.dropped[0]


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2 ** 31))
def test_residual_draw_resamples_pool(seed):
    ctx = bootstrap_context(exp_model(16).sample(seed % 97), 2)
    d = residual_bootstrap_draw(ctx, seed)
    E = (d.A_star - ctx.P_hat)[np.triu_indices(16)]
    pool = np.sort(ctx.Fhat.residuals)
    pos = np.clip(np.searchsorted(pool, E), 0, pool.size - 1)
    near = np.minimum(np.abs(pool[pos] - E), np.abs(pool[np.maximum(pos - 1, 0)] - E))
    assert np.all(near <= 1e-12 * (1 + np.abs(E)))


@pytest.mark.slow
def test_bootstrap_beats_normal_single_instance():
    n = 160
    m = exp_model(n)
    mc = mc_true_cdf(m, 0, 100_000, 0, experiment="boot-oracle", rows=[0])
    F = mc.cdf(0)
    A = m.sample(replicate_seed(0, "boot-instance", 0))
    ctx = bootstrap_context(A, 2, 0)
    sgn = 1.0 if ctx.eig_A.U[:, 0] @ m.eig.U[:, 0] >= 0 else -1.0
    res = bootstrap_cdf(ctx, 0, 2000, seed=replicate_seed(0, "boot-instance", 0), rows=[0])
    Fstar = EmpiricalCdf(sgn * res.values(0))
    assert tv_distance(F, Fstar) < tv_distance(F, NormalCurve())
