"""qEPI rates for the standard channels and a random sweep."""

import numpy as np

from qepi_lab import (
    GaussianState,
    ProductGaussianInput,
    amplifier,
    beam_splitter,
    hessian_data_processing_check,
    qepi_rate,
    random_covariance,
    random_mixing,
    saturating_family,
    stam_check,
)

vac = GaussianState.vacuum(1)
thermal3 = GaussianState.thermal(1, 3.0)

# Closed forms: the balanced beam splitter saturates, the amplifier does not.
print("50:50 BS, vacua         :", qepi_rate(beam_splitter(1, 0.5), ProductGaussianInput((vac, vac))).rate)
print("amplifier k=2, vacua    :", qepi_rate(amplifier(1, 2.0), ProductGaussianInput((vac, vac))).rate)
print("50:50 BS, thermal+vacuum:", qepi_rate(beam_splitter(1, 0.5), ProductGaussianInput((thermal3, vac))).rate)

# Hot inputs proportional to gamma_alpha approach saturation.
m = random_mixing(2, 3, seed=11)
for temperature in (10, 100, 1000, 10000):
    rate = qepi_rate(m, saturating_family(m, [1.0, 1.5, 2.0], temperature)).rate
    print(f"saturating family T={temperature:>5}: 1 - rate = {1 - rate:.3e}")

# A random sweep with the Fisher-level checks alongside.
rng = np.random.default_rng(0)
rates, hessian_ok, stam_ok = [], 0, 0
for i in range(500):
    n, k = 1 + i % 3, 2 + i % 3
    m = random_mixing(n, k, rng)
    inputs = ProductGaussianInput(tuple(
        GaussianState.from_cov(random_covariance(n, rng, (1.01, 20.0))) for _ in range(k)
    ))
    rates.append(qepi_rate(m, inputs).rate)
    hessian_ok += hessian_data_processing_check(m, inputs)[1]
    stam_ok += stam_check(m, inputs)[2]
print(f"500 random instances: max rate {max(rates):.6f}, Hessian ok {hessian_ok}, Stam ok {stam_ok}")
