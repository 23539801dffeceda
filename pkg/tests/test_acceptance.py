"""Acceptance gate: one check per acceptance criterion, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py`` (a PASS/FAIL line per criterion is
printed in the terminal summary) or directly with ``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

from qepi_lab.corpus import load_corpus
from qepi_lab.flow import asymptotic_bounds, entropy_power, integrate_flow, scaling_fit
from qepi_lab.fock_oracle import (
    FockState,
    TwoModeUnitary,
    channel_apply,
    data_processing_check,
    fisher_finite_difference,
    qepi_spot_check,
    von_neumann_entropy,
)
from qepi_lab.fock_oracle import moments as fock_moments
from qepi_lab.gaussian_state import GaussianState, entropy, entropy_h, fisher, gaussianize
from qepi_lab.mixing import ProductGaussianInput, amplifier, apply, beam_splitter, random_mixing, saturating_family
from qepi_lab.qepi_check import hessian_data_processing_check, make_report, qepi_rate, stam_check
from qepi_lab.symplectic_core import random_covariance

LN2 = np.log(2.0)
RESULTS = {}


def record(number, title, ok, detail):
    RESULTS[number] = (bool(ok), f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {title} ({detail})")
    return ok


def product(sigmas):
    return ProductGaussianInput(tuple(GaussianState.from_cov(s) for s in sigmas))


def random_pd(dim, rng):
    a = rng.normal(size=(dim, dim))
    return a @ a.T / dim + 0.1 * np.eye(dim)


# -- criteria -----------------------------------------------------------------------

def check_1_gaussian_qepi_suite(count=10_000):
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    worst = -np.inf
    for i in range(count):
        n, k = 1 + i % 3, 2 + (i // 3) % 3
        m = random_mixing(n, k, rng)
        inputs = product([random_covariance(n, rng, (1.0, 20.0)) for _ in range(k)])
        worst = max(worst, qepi_rate(m, inputs).rate)
    elapsed = time.perf_counter() - start
    ok = worst <= 1 + 1e-9 and elapsed < 120
    return record(1, "Gaussian qEPI suite", ok, f"{count} instances, max rate {worst:.12f}, {elapsed:.1f}s < 120s")


def check_2_saturation():
    vac = [np.eye(2), np.eye(2)]
    r_bs = qepi_rate(beam_splitter(1, 0.5), product(vac)).rate
    channels = [beam_splitter(1, 0.5), beam_splitter(2, 0.3), amplifier(1, 2.0), amplifier(3, 1.7)]
    rng = np.random.default_rng(2)
    channels += [random_mixing(1 + i % 3, 2 + i % 3, rng) for i in range(30)]
    worst = min(
        qepi_rate(m, saturating_family(m, rng.uniform(1.0, 2.0, m.k), 1000.0)).rate for m in channels
    )
    ok = abs(r_bs - 1) <= 1e-12 and 0.999 <= worst <= 1 + 1e-9
    return record(2, "saturation", ok, f"|rate_BS - 1| = {abs(r_bs - 1):.1e}; min saturating rate at T=1000 {worst:.6f}")


def check_3_closed_forms():
    vac = np.eye(2)
    r_amp = qepi_rate(amplifier(1, 2.0), product([vac, vac])).rate
    r_bs = qepi_rate(beam_splitter(1, 0.5), product([3 * vac, vac])).rate
    expected_bs = 2.5 / np.exp(entropy_h(2.0))
    ok = abs(r_amp - 0.75) <= 1e-9 and abs(r_bs - expected_bs) <= 1e-6 and abs(r_bs - 0.96225) <= 1e-5
    return record(3, "closed-form fixtures", ok, f"amplifier {r_amp:.12f} vs 0.75; beam splitter {r_bs:.9f} vs {expected_bs:.9f}")


def check_4_de_bruijn(count=500):
    rng = np.random.default_rng(4)
    h = 1e-4
    worst = 0.0
    for i in range(count):
        n = 1 + i % 3
        sigma = random_covariance(n, rng, (1.05, 20.0))
        gamma = random_pd(2 * n, rng)
        fd = (entropy(sigma + h * gamma) - entropy(sigma - h * gamma)) / (2 * h)
        analytic = 0.25 * np.trace(fisher(sigma).j @ gamma)
        worst = max(worst, abs(fd - analytic) / abs(analytic))
    return record(4, "de Bruijn identity", worst <= 1e-5, f"{count} instances, max relative error {worst:.2e} <= 1e-5")


def check_5_hessian_and_stam(count=1000):
    rng = np.random.default_rng(5)
    h_fail = s_fail = contradictions = 0
    for i in range(count):
        n, k = 1 + i % 3, 2 + (i // 3) % 3
        m = random_mixing(n, k, rng)
        inputs = product([random_covariance(n, rng, (1.0 + 1e-3, 20.0)) for _ in range(k)])
        _, h_ok = hessian_data_processing_check(m, inputs)
        _, _, s_ok = stam_check(m, inputs)
        h_fail += not h_ok
        s_fail += not s_ok
        contradictions += h_ok and not s_ok
    ok = h_fail == 0 and s_fail == 0 and contradictions == 0
    return record(5, "Hessian data processing and Stam", ok,
                  f"{count} instances, {h_fail} Hessian / {s_fail} Stam failures, {contradictions} contradictions")


def check_6_flow(count=120):
    rng = np.random.default_rng(6)
    bad_monotone = bad_limit = 0
    worst_final = np.inf
    for i in range(count):
        n, k = 1 + i % 3, 2 + (i // 3) % 3
        m = random_mixing(n, k, rng)
        inputs = product([random_covariance(n, rng, (1.0, 20.0)) for _ in range(k)])
        trace = integrate_flow(m, inputs, 1e6, sample_count=40, stop_at_t_y=1e4)
        bad_monotone += not trace.is_monotone(1e-7)
        final = trace.rates[-1]
        worst_final = min(worst_final, final)
        bad_limit += not (trace.samples[-1].t_y >= 1e4 * (1 - 1e-9) and 0.99 <= final <= 1 + 1e-9)
    ok = bad_monotone == 0 and bad_limit == 0
    return record(6, "flow monotonicity and limit", ok,
                  f"{count} flows, {bad_monotone} non-monotone, {bad_limit} short of 0.99 at t_Y=1e4, min final rate {worst_final:.6f}")


def check_7_scaling(count=20):
    rng = np.random.default_rng(7)
    worst_rel = 0.0
    growth = 0
    for i in range(count):
        n = 1 + i % 3
        sigma = random_covariance(n, rng)
        if i % 2:
            gamma = random_mixing(n, 2, rng).gammas[0]
        else:
            gamma = np.eye(2 * n)
        expected = np.linalg.det(gamma) ** (1 / (2 * n)) * np.e / 2
        ts = np.geomspace(1e2, 1e4, 80)
        fit = scaling_fit(ts, entropy_power(sigma, gamma, ts))
        worst_rel = max(worst_rel, abs(fit.slope - expected) / expected)
        ts_lo = np.geomspace(1e1, 1e3, 80)
        fit_lo = scaling_fit(ts_lo, entropy_power(sigma, gamma, ts_lo))
        growth += fit.max_residual > fit_lo.max_residual
    ok = worst_rel <= 0.01 and growth == 0
    return record(7, "asymptotic scaling", ok,
                  f"{count} instances, max slope error {worst_rel:.2e} <= 1%, residual grew in {growth}")


def check_8_sandwich(count=200):
    rng = np.random.default_rng(8)
    violations = 0
    checked = 0
    for i in range(count):
        n = 1 + i % 3
        sigma = random_covariance(n, rng)
        gamma = random_mixing(n, 2, rng).gammas[1] if i % 2 else random_pd(2 * n, rng)
        t1 = asymptotic_bounds(sigma, gamma, 1e12).t1
        for t in np.geomspace(2.0001 * t1, max(1e4, 10 * t1), 15):
            b = asymptotic_bounds(sigma, gamma, t)
            s = entropy(sigma + t * gamma)
            violations += not (b.lower - 1e-9 <= s <= b.upper + 1e-9)
            checked += 1
    return record(8, "entropy sandwich", violations == 0, f"{count} instances, {checked} points, {violations} violations")


def _full_rank_inputs(cutoff=40):
    return [
        FockState.mixture([FockState.thermal(1.8, cutoff), FockState.coherent_superposition([1, -1], [1, 1], cutoff)], [0.5, 0.5]),
        FockState.mixture([FockState.thermal(1.5, cutoff), FockState.fock(2, cutoff)], [0.8, 0.2]),
        FockState.mixture([FockState.thermal(2.0, cutoff), FockState.fock(1, cutoff)], [0.6, 0.4]),
    ]


def check_9_fock_oracle():
    start = time.perf_counter()
    one, vac = FockState.fock(1, 40), FockState.vacuum(40)
    out = channel_apply(("beam_splitter", 0.5), one, vac)
    s_y = von_neumann_entropy(out)
    rate_bs = qepi_spot_check(("beam_splitter", 0.5), one, vac).rate
    fixture_ok = abs(s_y - LN2) <= 1e-9 and abs(rate_bs - 0.5) <= 1e-9

    s_thermal = von_neumann_entropy(FockState.thermal(3.0, 40))
    s_sq = von_neumann_entropy(channel_apply(("two_mode_squeezer", 2.0), vac, vac))
    thermal_ok = abs(s_thermal - 2 * LN2) <= 1e-6 and abs(s_sq - 2 * LN2) <= 1e-6

    corpus = load_corpus()
    worst = -np.inf
    extremal_bad = 0
    cases = 0
    for a, b, u in corpus.cases():
        r1, r2 = corpus.states[a], corpus.states[b]
        y = channel_apply(u, r1, r2)
        s = von_neumann_entropy(y)
        rate = make_report(u.lambdas, (von_neumann_entropy(r1), von_neumann_entropy(r2)), s, 1).rate
        worst = max(worst, rate)
        extremal_bad += s > entropy(gaussianize(fock_moments(y))) + 1e-6
        cases += 1

    dp_bad = 0
    rng = np.random.default_rng(9)
    states = _full_rank_inputs()
    for u in corpus.channels:
        for r1, r2 in zip(states, states[1:] + states[:1]):
            for _ in range(2):
                x1, x2 = rng.normal(scale=0.4, size=2), rng.normal(scale=0.4, size=2)
                dp_bad += not data_processing_check(u, r1, r2, x1, x2)[2]
    elapsed = time.perf_counter() - start
    ok = fixture_ok and thermal_ok and worst <= 1 + 1e-6 and extremal_bad == 0 and dp_bad == 0 and elapsed < 300
    return record(9, "Fock oracle", ok,
                  f"S_Y-ln2 {abs(s_y - LN2):.1e}, rate {rate_bs:.12f}, h(3) err {max(abs(s_thermal - 2 * LN2), abs(s_sq - 2 * LN2)):.1e}; "
                  f"{cases} corpus cases max rate {worst:.6f}; {extremal_bad} extremality / {dp_bad} data-processing failures; {elapsed:.1f}s < 300s")


def check_10_cross_module():
    cases = [
        (([0.0, 0.0], 3 * np.eye(2)), ([0.0, 0.0], np.eye(2))),
        (([0.5, -0.3], np.eye(2)), ([0.2, 0.4], 2 * np.eye(2))),
        (([0.3, 0.0], np.diag([1.8, 0.7])), ([0.0, -0.2], np.array([[1.5, 0.3], [0.3, 1.2]]))),
    ]
    worst_mom = 0.0
    for kind, param in [("beam_splitter", 0.2), ("beam_splitter", 0.5), ("two_mode_squeezer", 1.5), ("two_mode_squeezer", 2.0)]:
        u = TwoModeUnitary(kind, param)
        m = beam_splitter(1, param) if kind == "beam_splitter" else amplifier(1, param)
        for (mu1, c1), (mu2, c2) in cases:
            y = channel_apply(u, FockState.gaussian(mu1, c1, 40), FockState.gaussian(mu2, c2, 40))
            mean, cov = fock_moments(y)
            ref = apply(m, ProductGaussianInput((GaussianState.from_cov(c1, mu1), GaussianState.from_cov(c2, mu2))))
            worst_mom = max(worst_mom, np.max(np.abs(cov - ref.sigma)), np.max(np.abs(mean - ref.mean)))
    worst_j = 0.0
    for mean, cov, cutoff in [([0, 0], 3 * np.eye(2), 40), ([0, 0], 10 * np.eye(2), 150),
                              ([0, 0], np.array([[3.0, 0.8], [0.8, 2.0]]), 60)]:
        fd = fisher_finite_difference(FockState.gaussian(mean, cov, cutoff), step=1e-2).j
        worst_j = max(worst_j, np.max(np.abs(fd - fisher(cov).j)))
    ok = worst_mom <= 1e-5 and worst_j <= 1e-4
    return record(10, "cross-module oracle agreement", ok, f"moment error {worst_mom:.1e} <= 1e-5, Fisher error {worst_j:.1e} <= 1e-4")


CHECKS = [
    check_1_gaussian_qepi_suite,
    check_2_saturation,
    check_3_closed_forms,
    check_4_de_bruijn,
    check_5_hessian_and_stam,
    check_6_flow,
    check_7_scaling,
    check_8_sandwich,
    check_9_fock_oracle,
    check_10_cross_module,
]


# -- pytest entry points --------------------------------------------------------------

def _run(check):
    ok = check()
    number = int(check.__name__.split("_")[1])
    print(RESULTS[number][1])
    assert ok, RESULTS[number][1]


@pytest.mark.slow
def test_criterion_01_gaussian_qepi_suite():
    _run(check_1_gaussian_qepi_suite)


def test_criterion_02_saturation():
    _run(check_2_saturation)


def test_criterion_03_closed_forms():
    _run(check_3_closed_forms)


def test_criterion_04_de_bruijn():
    _run(check_4_de_bruijn)


def test_criterion_05_hessian_and_stam():
    _run(check_5_hessian_and_stam)


def test_criterion_06_flow():
    _run(check_6_flow)


def test_criterion_07_scaling():
    _run(check_7_scaling)


def test_criterion_08_sandwich():
    _run(check_8_sandwich)


@pytest.mark.slow
def test_criterion_09_fock_oracle():
    _run(check_9_fock_oracle)


def test_criterion_10_cross_module():
    _run(check_10_cross_module)


if __name__ == "__main__":
    import sys

    failed = 0
    for check in CHECKS:
        ok = check()
        failed += not ok
        print(RESULTS[int(check.__name__.split("_")[1])][1], flush=True)
    sys.exit(1 if failed else 0)
