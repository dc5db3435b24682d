"""Bias of a leading eigenvector and its plug-in correction.

A two-block weighted SBM is observed with three-point noise.  The sample
eigenvector is pulled towards zero by a second-order bias; subtracting the
residual-based estimate of that bias moves it back towards the truth.
"""
import numpy as np

from eigenedge import (bias_correct, bias_vector, build_sbm, discrete_noise, estimate_D_hat, estimate_P_hat,
                       noise_moments, population_D, truncated_spectral)
from eigenedge.linalg import align_signs

n = 200
rho = n ** (-1 / 3)
model = build_sbm(n, 3, 1, n ** 0.25 * np.sqrt(n * rho)).with_noise(discrete_noise(rho))
u = model.eig.U[:, 0]
b_true = bias_vector(model.eig, population_D(noise_moments(model.noise, n)[0]), 0)
print(f"n={n}  rho={rho:.3f}  eigenvalues={model.eig.lam.round(2)}")
print(f"population bias: every entry equals {b_true[0]:+.5f} (u_1 entries are {u[0]:.5f})")

gain = []
for t in range(50):
    A = model.sample(t)
    eig = truncated_spectral(A, 2, 0)
    s = align_signs(eig, model.eig)[0]
    D_hat = estimate_D_hat(A, estimate_P_hat(eig))
    uc = bias_correct(eig, D_hat, 0)
    gain.append(np.sum((eig.U[:, 0] * s - u) ** 2) - np.sum((uc * s - u) ** 2))

gain = np.array(gain)
print(f"squared-error reduction from the correction over 50 draws: "
      f"median {np.median(gain):.2e}, positive in {np.mean(gain > 0):.0%} of draws")
