"""
Inequality layer: qEPI rate, the classical Gaussian EPI, and the Fisher-matrix
data-processing and Stam inequalities for Gaussian inputs.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import NotPositiveDefinite, ShapeMismatch
from .gaussian_state import entropy, fisher
from .mixing import apply, output_covariance
from .symplectic_core import TOL_PSD

TOL_RATE = 1e-9


def rate_from_entropies(lambdas, s_alphas, s_y, n):
    """``sum_a lambda_a exp(S_a/n) / exp(S_Y/n)``, evaluated in log space."""
    lam = np.asarray(lambdas, dtype=float)
    s = np.asarray(s_alphas, dtype=float)
    keep = lam > 0
    if not np.any(keep):
        return 0.0
    return float(np.exp(logsumexp(np.log(lam[keep]) + s[keep] / n) - s_y / n))


@dataclass(frozen=True)
class QepiReport:
    s_alphas: tuple
    s_y: float
    lambdas: tuple
    n: int
    rate: float
    satisfied: bool

    @property
    def margin(self):
        return 1.0 - self.rate

    def recompute_rate(self):
        return rate_from_entropies(self.lambdas, self.s_alphas, self.s_y, self.n)

    def to_dict(self):
        d = asdict(self)
        d["s_alphas"] = list(self.s_alphas)
        d["lambdas"] = list(self.lambdas)
        d["margin"] = self.margin
        return d

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def make_report(lambdas, s_alphas, s_y, n, tol=TOL_RATE):
    rate = rate_from_entropies(lambdas, s_alphas, s_y, n)
    return QepiReport(
        s_alphas=tuple(float(s) for s in s_alphas),
        s_y=float(s_y),
        lambdas=tuple(float(x) for x in lambdas),
        n=int(n),
        rate=rate,
        satisfied=bool(rate <= 1.0 + tol),
    )


def qepi_rate(m, inputs):
    """qEPI rate of a product Gaussian input through the mixing channel ``m``."""
    s_alphas = [entropy(s) for s in inputs.states]
    s_y = entropy(apply(m, inputs))
    return make_report(m.lambdas, s_alphas, s_y, m.n)


def _logdet_pd(s):
    sign, logdet = np.linalg.slogdet(s)
    if sign <= 0 or np.linalg.eigvalsh(s)[0] <= 0:
        raise NotPositiveDefinite("classical covariance must be positive definite")
    return logdet


def classical_gaussian_epi_check(m, sigmas, tol=TOL_RATE):
    """Classical multi-variable EPI for Gaussian variables (Minkowski determinant form).

    Returns ``(lhs, rhs, satisfied)`` with ``lhs = exp(2 H_Y / m)`` and
    ``rhs = sum |det M_a|^(2/m) exp(2 H_a / m)``, ``H = 1/2 ln det(pi e sigma)``.
    The tolerance is applied relative to ``max(1, rhs)``.
    """
    if len(sigmas) != m.k:
        raise ShapeMismatch("need one covariance per block")
    dim = 2 * m.n
    sigmas = [np.asarray(s, dtype=float) for s in sigmas]
    pie = np.pi * np.e
    lhs = pie * np.exp(_logdet_pd(output_covariance(m, sigmas)) / dim)
    rhs = 0.0
    for b, s in zip(m.blocks, sigmas):
        sign, logdet_b = np.linalg.slogdet(b)
        if sign == 0:
            continue
        rhs += pie * np.exp((2.0 * logdet_b + _logdet_pd(s)) / dim)
    return float(lhs), float(rhs), bool(lhs >= rhs - tol * max(1.0, rhs))


def _fishers(m, inputs):
    if inputs.k != m.k or inputs.n != m.n:
        raise ShapeMismatch("input does not match channel")
    j_alphas = [fisher(s).j for s in inputs.states]
    j_y = fisher(apply(m, inputs)).j
    return j_alphas, j_y


def hessian_data_processing_check(m, inputs, tol=TOL_PSD):
    """Check ``(M_a^T J_Y M_b)_{ab} <= diag(J_a)`` as a 2Kn x 2Kn matrix inequality.

    Blocks classified singular contribute nothing to the left-hand side.
    Returns ``(min eigenvalue of the difference, satisfied)``.
    """
    j_alphas, j_y = _fishers(m, inputs)
    dim = 2 * m.n
    eff = [b if inv else np.zeros_like(b) for b, inv in zip(m.blocks, m.invertible)]
    big_m = np.hstack(eff)
    a = big_m.T @ j_y @ big_m
    b = np.zeros_like(a)
    for i, j in enumerate(j_alphas):
        b[i * dim : (i + 1) * dim, i * dim : (i + 1) * dim] = j
    diff = b - a
    min_eig = float(np.linalg.eigvalsh(0.5 * (diff + diff.T))[0])
    return min_eig, bool(min_eig >= -tol * np.linalg.norm(b, 2))


def stam_check(m, inputs, tol=TOL_RATE):
    """Stam-type trace inequality.

    ``(sum lam_a e^{S_a/n})^2 tr J_Y <= sum lam_a e^{2 S_a/n} tr(J_a gamma_a)``,
    returned as ``(lhs, rhs, satisfied)``. Singular blocks have ``lam_a = 0``.
    """
    j_alphas, j_y = _fishers(m, inputs)
    n = m.n
    s_alphas = np.array([entropy(s) for s in inputs.states])
    lam = np.array(m.lambdas)
    # common scale exp(max S/n) keeps both sides finite for very hot inputs
    shift = np.max(s_alphas) / n
    w = lam * np.exp(s_alphas / n - shift)
    lhs = np.sum(w) ** 2 * np.trace(j_y)
    rhs = sum(
        la * np.exp(2.0 * (sa / n - shift)) * np.trace(ja @ g)
        for la, sa, ja, g in zip(lam, s_alphas, j_alphas, m.gammas)
        if la > 0
    )
    scale = np.exp(2.0 * shift)
    lhs, rhs = float(lhs * scale), float(rhs * scale)
    return lhs, rhs, bool(lhs <= rhs + tol * abs(rhs))
