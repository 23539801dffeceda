"""Large-time behaviour of exp(S/n) under diffusion and the entropy sandwich."""

import numpy as np

from qepi_lab import asymptotic_bounds, entropy, entropy_power, random_covariance, random_mixing, scaling_fit

n = 2
sigma = random_covariance(n, seed=5)
gamma = random_mixing(n, 3, seed=5).gammas[0]  # det gamma = 1 for invertible blocks
print("det gamma =", np.linalg.det(gamma))

ts = np.geomspace(1e2, 1e4, 60)
fit = scaling_fit(ts, entropy_power(sigma, gamma, ts))
print(f"slope {fit.slope:.6f}  vs e/2 = {np.e / 2:.6f}  (max residual {fit.max_residual:.4f})")

print(f"{'t':>8} {'lower':>10} {'S':>10} {'upper':>10}")
for t in (10.0, 100.0, 1000.0, 10000.0):
    b = asymptotic_bounds(sigma, gamma, t)
    print(f"{t:8.0f} {b.lower:10.5f} {entropy(sigma + t * gamma):10.5f} {b.upper:10.5f}")
