"""Symplectic spectrum, entropy and Fisher information of Gaussian states."""

import numpy as np

from qepi_lab import GaussianState, entropy, entropy_h, fisher, random_covariance, random_symplectic, williamson

np.set_printoptions(precision=5, suppress=True)

# A single squeezed mode: diag(4, 1) has symplectic eigenvalue sqrt(4 * 1) = 2.
spec = williamson(np.diag([4.0, 1.0]))
print("nu(diag(4,1)) =", spec.nus)

# Entropy depends on the spectrum only, so symplectic conjugation leaves it unchanged.
sigma = random_covariance(2, seed=1)
s = random_symplectic(2, seed=2, scale=0.5)
print("S(sigma)          =", entropy(sigma))
print("S(S sigma S^T)    =", entropy(s @ sigma @ s.T))

# Thermal modes: h(3) = 2 ln 2, and the Fisher matrix is ln((nu+1)/(nu-1)) * I.
print("h(3), 2 ln 2      =", entropy_h(3.0), 2 * np.log(2))
print("J(thermal nu=3)   =\n", fisher(GaussianState.thermal(1, 3.0)).j)

# Williamson round trip on a random three-mode state.
sigma3 = random_covariance(3, seed=7)
w = williamson(sigma3)
print("nus               =", w.nus)
print("round-trip error  =", np.max(np.abs(w.reconstruct() - sigma3)))

# Added noise always raises the entropy, and the slope is a quarter of tr(J gamma).
gamma = np.eye(6)
for t in (0.0, 1.0, 10.0, 100.0):
    print(f"t = {t:6.1f}   S = {entropy(sigma3 + t * gamma):9.5f}   "
          f"dS/dt = {0.25 * np.trace(fisher(sigma3 + t * gamma).j @ gamma):.5f}")
