"""How far the studentized entry T_11 is from normal, and what the Edgeworth term buys.

The true CDF of T_11 is simulated; its sup-distance to the standard normal
is compared with the distance to the one-term Edgeworth curve built from the
population skewness factor, and to the curve built from one observed matrix.
"""
import numpy as np

from eigenedge import (EdgeworthCurve, NormalCurve, build_sbm, discrete_noise, empirical_kappa, estimate_P_hat,
                       mc_true_cdf, noise_moments, population_kappa, truncated_spectral, tv_distance)
from eigenedge.linalg import align_signs

n = 80
rho = n ** (-1 / 3)
model = build_sbm(n, 3, 1, n ** 0.25 * np.sqrt(n * rho)).with_noise(discrete_noise(rho))
var, third, _ = noise_moments(model.noise, n)
kap = population_kappa(third, var, model.eig, 0)[0]

mc = mc_true_cdf(model, 0, 20_000, 1, rows=[0])
F = mc.cdf(0)
print(f"kappa = {kap:+.4f} from {mc.T.shape[0]} simulated draws of T_11")
print(f"sup|F - Phi|            = {tv_distance(F, NormalCurve()):.4f}")
print(f"sup|F - G| (population) = {tv_distance(F, EdgeworthCurve(kap)):.4f}")

A = model.sample(12345)
eig = truncated_spectral(A, 2, 0)
k_hat = align_signs(eig, model.eig)[0] * empirical_kappa(A, estimate_P_hat(eig), eig, 0, 0)
print(f"sup|F - G| (one sample, kappa_hat = {k_hat:+.4f}) = {tv_distance(F, EdgeworthCurve(k_hat)):.4f}")
print("quantiles of T_11:", np.quantile(mc.T[:, 0], [0.025, 0.5, 0.975]).round(3))
