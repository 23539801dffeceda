import json

import numpy as np
import pytest

from qepi_lab.gaussian_state import GaussianState, entropy_h
from qepi_lab.mixing import (
    MixingMatrix,
    ProductGaussianInput,
    amplifier,
    beam_splitter,
    random_mixing,
    saturating_family,
)
from qepi_lab.qepi_check import (
    classical_gaussian_epi_check,
    hessian_data_processing_check,
    make_report,
    qepi_rate,
    rate_from_entropies,
    stam_check,
)
from qepi_lab.symplectic_core import random_covariance, random_symplectic

LN2 = np.log(2.0)


def product(*sigmas):
    return ProductGaussianInput(tuple(GaussianState.from_cov(s) for s in sigmas))


def random_instance(rng, n, k, nu_range=(1.0 + 1e-3, 20.0)):
    m = random_mixing(n, k, rng)
    return m, product(*(random_covariance(n, rng, nu_range) for _ in range(k)))


def test_rate_balanced_beam_splitter_vacua():
    rep = qepi_rate(beam_splitter(1, 0.5), product(np.eye(2), np.eye(2)))
    assert rep.rate == pytest.approx(1.0, abs=1e-12)
    assert rep.satisfied


def test_rate_amplifier_vacua():
    assert np.exp(entropy_h(3.0)) == pytest.approx(4.0)
    rep = qepi_rate(amplifier(1, 2.0), product(np.eye(2), np.eye(2)))
    assert rep.rate == pytest.approx(0.75, abs=1e-9)


def test_rate_beam_splitter_thermal_vacuum():
    expected = 2.5 / np.exp(entropy_h(2.0))
    rep = qepi_rate(beam_splitter(1, 0.5), product(3 * np.eye(2), np.eye(2)))
    assert rep.rate == pytest.approx(expected, abs=1e-12)
    assert rep.rate == pytest.approx(0.96225, abs=1e-5)


def test_rate_from_entropies_log_space_is_stable():
    # exp(S/n) alone would overflow
    assert rate_from_entropies([0.5, 0.5], [2000.0, 2000.0], 2000.0, 1) == pytest.approx(1.0)
    assert rate_from_entropies([0.0, 0.0], [1.0, 1.0], 1.0, 1) == 0.0


def test_report_serialization_and_recompute():
    rep = qepi_rate(amplifier(2, 1.5), product(2 * np.eye(4), np.eye(4)))
    assert abs(rep.recompute_rate() - rep.rate) <= 1e-12
    d = json.loads(rep.to_json())
    assert d["rate"] == rep.rate and d["margin"] == pytest.approx(1 - rep.rate)
    assert not make_report([1.0], [1.0], 0.5, 1).satisfied


def test_rate_invariant_under_input_conjugation():
    # sigma_a -> S sigma_a S^T with M_a -> M_a S^{-1} leaves every entropy and lambda unchanged
    rng = np.random.default_rng(8)
    for _ in range(50):
        m, inputs = random_instance(rng, 2, 3)
        ss = [random_symplectic(2, rng, 0.4) for _ in range(3)]
        m2 = MixingMatrix(tuple(b @ np.linalg.inv(s) for b, s in zip(m.blocks, ss)))
        inputs2 = product(*(s @ sig @ s.T for s, sig in zip(ss, inputs.sigmas)))
        r1, r2 = qepi_rate(m, inputs), qepi_rate(m2, inputs2)
        assert r2.rate == pytest.approx(r1.rate, rel=1e-9)
        assert abs(r2.recompute_rate() - r2.rate) <= 1e-12


@pytest.mark.parametrize("n, k", [(1, 2), (2, 3), (3, 4), (3, 2)])
def test_qepi_random_instances(n, k):
    rng = np.random.default_rng(1000 * n + k)
    for _ in range(400):
        m, inputs = random_instance(rng, n, k)
        assert qepi_rate(m, inputs).rate <= 1 + 1e-9


@pytest.mark.parametrize("n, temps", [(1, (2, 10, 100, 1000)), (2, (10, 100, 1000))])
def test_saturation_is_monotone_in_temperature(n, temps):
    # for n > 1 gamma has nu_min < 1, so the coldest temperatures are not states
    rng = np.random.default_rng(3)
    for _ in range(10):
        m = random_mixing(n, 3, rng)
        c = rng.uniform(1.0, 2.0, 3)
        gaps = [1 - qepi_rate(m, saturating_family(m, c, t)).rate for t in temps]
        assert all(g >= -1e-9 for g in gaps)
        assert all(a > b for a, b in zip(gaps, gaps[1:]))
        assert 1 - gaps[-1] >= 0.999


def test_classical_epi_saturation():
    rng = np.random.default_rng(0)
    for _ in range(20):
        m = random_mixing(2, 3, rng)
        c = rng.uniform(0.5, 3.0, 3)
        sigmas = [ca * np.linalg.inv(b) @ np.linalg.inv(b).T for ca, b in zip(c, m.blocks)]
        lhs, rhs, ok = classical_gaussian_epi_check(m, sigmas)
        assert ok
        assert lhs == pytest.approx(rhs, rel=1e-9)


def test_classical_epi_beam_splitter_identity():
    lhs, rhs, ok = classical_gaussian_epi_check(beam_splitter(1, 0.5), [np.eye(2), np.eye(2)])
    assert lhs == pytest.approx(np.pi * np.e) and rhs == pytest.approx(np.pi * np.e) and ok


def test_classical_epi_random():
    rng = np.random.default_rng(1)
    for i in range(1000):
        n, k = 1 + i % 3, 2 + i % 3
        m = random_mixing(n, k, rng)
        sigmas = []
        for _ in range(k):
            a = rng.normal(size=(2 * n, 2 * n))
            sigmas.append(a @ a.T + 0.05 * np.eye(2 * n))
        assert classical_gaussian_epi_check(m, sigmas)[2]


def test_hessian_transparent_beam_splitter():
    m = beam_splitter(1, 1.0)
    min_eig, ok = hessian_data_processing_check(m, product(3 * np.eye(2), 5 * np.eye(2)))
    assert ok and min_eig >= 0
    assert min_eig == pytest.approx(0.0, abs=1e-12)


def test_hessian_balanced_thermal():
    min_eig, ok = hessian_data_processing_check(beam_splitter(1, 0.5), product(3 * np.eye(2), 3 * np.eye(2)))
    # B - A = ln2 * ([[1,0],[0,1]] - [[1/2,1/2],[1/2,1/2]]) (x) 1_2 has eigenvalues {0, ln2}
    assert ok and min_eig == pytest.approx(0.0, abs=1e-12)


def test_stam_balanced_thermal_equality():
    lhs, rhs, ok = stam_check(beam_splitter(1, 0.5), product(3 * np.eye(2), 3 * np.eye(2)))
    assert lhs == pytest.approx(32 * LN2, rel=1e-12)
    assert rhs == pytest.approx(32 * LN2, rel=1e-12)
    assert ok


def test_stam_amplifier_strict():
    lhs, rhs, ok = stam_check(amplifier(1, 2.0), product(3 * np.eye(2), 3 * np.eye(2)))
    assert ok and lhs < rhs * (1 - 1e-3)


def test_hessian_and_stam_random_with_sandwich_consistency():
    rng = np.random.default_rng(2)
    for i in range(1000):
        n, k = 1 + i % 2, 2 + i % 2
        m, inputs = random_instance(rng, n, k)
        _, h_ok = hessian_data_processing_check(m, inputs)
        _, _, s_ok = stam_check(m, inputs)
        assert h_ok and s_ok
        assert s_ok or not h_ok


def test_checks_handle_singular_block():
    m = beam_splitter(2, 1.0)
    inputs = product(2 * np.eye(4), 4 * np.eye(4))
    assert hessian_data_processing_check(m, inputs)[1]
    assert stam_check(m, inputs)[2]
    assert qepi_rate(m, inputs).rate == pytest.approx(1.0)
