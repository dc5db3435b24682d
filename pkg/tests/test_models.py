import math

import numpy as np
import pytest

from eigenedge import (ConfigError, DomainError, MomentUnavailableError, build_denoising_model,
                       build_rank_one_toy, build_sbm, custom_noise, discrete_noise, exponential_noise,
                       noise_moments, sample_bernoulli_graph, sample_centered_exponential_noise,
                       sample_discrete_noise, truncated_spectral)
from eigenedge.models import bernoulli_noise
from eigenedge.montecarlo import run_chunks
from eigenedge.rng import stream
from oracles import discrete_moments, exponential_moments


def test_sbm_eigen_identity():
    m = build_sbm(4, 3, 1, 4)
    np.testing.assert_allclose(m.eig.lam, [8.0, 4.0])
    for k in range(2):
        np.testing.assert_allclose(m.P @ m.eig.U[:, k], m.eig.lam[k] * m.eig.U[:, k], atol=1e-14)
    np.testing.assert_allclose(m.P[0, 1], 3.0)
    np.testing.assert_allclose(m.P[0, 3], 1.0)
    assert np.max(np.abs(m.eig.reconstruct() - m.P)) <= 1e-9


def test_sbm_rejects_bad_input():
    with pytest.raises(ConfigError):
        build_sbm(5, 3, 1, 4)
    with pytest.raises(ConfigError):
        build_sbm(4, 2, 2, 4)


def test_rank_one_toy():
    n = 80
    m = build_rank_one_toy(n)
    np.testing.assert_allclose(m.P, n ** (-5 / 12))
    assert m.eig.lam[0] == pytest.approx(n ** (7 / 12), rel=1e-14)
    np.testing.assert_allclose(m.eig.U[:, 0], 1 / math.sqrt(n))


def test_discrete_pmf_and_moments():
    rho = 0.3
    m = discrete_noise(rho).entry_moments()
    ref = discrete_moments(rho)
    for key in ("mean", "var", "third", "abs_third", "fourth"):
        assert m[key] == pytest.approx(ref[key], abs=1e-10)
    assert m["var"] == pytest.approx(4 * rho) and m["third"] == pytest.approx(12 * rho)
    draws = discrete_noise(rho).sample_entries(stream(1, "pmf"), 200_000)
    for value, p in ((4.0, rho / 5), (-1.0, 4 * rho / 5), (0.0, 1 - rho)):
        assert abs(np.mean(draws == value) - p) < 5 * math.sqrt(p * (1 - p) / draws.size)


def test_discrete_noise_mean_clt():
    n, rho = 1000, 0.1
    E = sample_discrete_noise(n, rho, 7)
    upper = E[np.triu_indices(n)]
    assert abs(upper.mean()) <= 4 * math.sqrt(4 * rho / upper.size)


def test_discrete_rho_range():
    with pytest.raises(ConfigError):
        sample_discrete_noise(5, 1.5, 0)


def test_exponential_moments_vs_quadrature():
    for rho in (0.05, 0.3, 1.0):
        m = exponential_noise(rho).entry_moments()
        ref = exponential_moments(rho)
        for key in ("mean", "var", "third", "abs_third", "fourth"):
            assert m[key] == pytest.approx(ref[key], abs=1e-10)
        assert m["third"] == pytest.approx(2 * rho ** 1.5)
        # skewness 2
        assert m["third"] / m["var"] ** 1.5 == pytest.approx(2.0)


def test_exponential_support():
    rho = 0.2
    E = sample_centered_exponential_noise(60, rho, 3)
    assert E.min() >= -math.sqrt(rho)


def test_bernoulli_graph_edges():
    assert np.all(sample_bernoulli_graph(np.zeros((5, 5)), 0) == 0)
    assert np.all(sample_bernoulli_graph(np.ones((5, 5)), 0) == 1)
    with pytest.raises(DomainError):
        sample_bernoulli_graph(np.full((3, 3), 1.2), 0)


def test_bernoulli_moments():
    P = np.full((4, 4), 0.2)
    var, third, beta = noise_moments(bernoulli_noise(P), 4)
    np.testing.assert_allclose(var, 0.16)
    np.testing.assert_allclose(third, 0.096)
    # E|A - p|^3 = p (1-p)^3 + (1-p) p^3
    assert beta == pytest.approx(0.2 * 0.8 ** 3 + 0.8 * 0.2 ** 3)


def test_noise_moment_matrices():
    var, third, beta = noise_moments(discrete_noise(0.25), 3)
    np.testing.assert_allclose(var, 1.0)
    np.testing.assert_allclose(third, 3.0)
    var, third, beta = noise_moments(exponential_noise(0.25), 3)
    assert beta == pytest.approx(exponential_moments(0.25)["abs_third"], abs=1e-10)
    assert beta >= abs(third[0, 0])


def test_custom_noise_without_moments():
    spec = custom_noise(lambda rng, size: rng.standard_normal(size))
    with pytest.raises(MomentUnavailableError):
        noise_moments(spec, 3)


@pytest.mark.parametrize("spec", [discrete_noise(0.2), exponential_noise(0.2),
                                  bernoulli_noise(np.full((30, 30), 0.3))], ids=lambda s: s.kind)
def test_samplers_symmetric_and_deterministic(spec):
    for seed in range(3):
        E = spec.sample(30, seed)
        assert np.array_equal(E, E.T) and np.all(np.isfinite(E))
        assert np.array_equal(E, spec.sample(30, seed))


def test_sample_independent_of_threads():
    spec = exponential_noise(0.4)
    run = lambda threads: run_chunks(lambda lo, hi: [spec.sample(20, s) for s in range(lo, hi)], 16, 4, threads)
    one, many = run(1), run(8)
    assert all(np.array_equal(a, b) for c1, c8 in zip(one, many) for a, b in zip(c1, c8))


@pytest.mark.parametrize("spec", [discrete_noise(0.3), exponential_noise(0.3)], ids=lambda s: s.kind)
def test_single_entry_moment_convergence(spec):
    N = 100_000
    x = spec.sample_entries(stream(5, "moments", spec.kind), N)
    m = spec.entry_moments()
    assert abs(x.mean()) <= 5 * math.sqrt(m["var"]) / math.sqrt(N)
    assert abs(x.var() - m["var"]) <= 5 * math.sqrt(m["fourth"]) / math.sqrt(N)


def test_denoising_model():
    model, X = build_denoising_model(30, 40, 1, [5.0], 0.1, seed=2)
    assert np.linalg.matrix_rank(model.M) == 1
    w = np.linalg.eigvalsh(model.dilation().P)
    assert w[-1] == pytest.approx(5.0) and w[0] == pytest.approx(-5.0)
    assert X.shape == (30, 40)


def test_denoising_dilation_blocks():
    model, _ = build_denoising_model(20, 25, 2, [8.0, 3.0], 0.1, seed=4)
    dil = model.dilation()
    for k in range(2):
        assert np.linalg.norm(dil.eig.U[:20, k]) == pytest.approx(1 / math.sqrt(2))
    np.testing.assert_allclose(dil.eig.reconstruct(), dil.P, atol=1e-12)
    M = sum(s * np.outer(model.U[:, k], model.V[:, k]) for k, s in enumerate(model.sigmas))
    assert np.max(np.abs(model.M - M)) <= 1e-10
    eig = truncated_spectral(dil.P, 2, 2)
    np.testing.assert_allclose(eig.lam, dil.eig.lam, atol=1e-12)


def test_denoising_rejects_unsorted_sigmas():
    with pytest.raises(ConfigError):
        build_denoising_model(10, 10, 2, [3.0, 5.0], 0.1, seed=0)
