"""Gaussian states as (mean, covariance) pairs: entropy and Fisher information."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError, InadmissibleCovariance, PureModeError
from .symplectic_core import (
    TOL_PSD,
    CovarianceMatrix,
    is_admissible,
    symplectic_eigenvalues,
    williamson,
)

NU_FLOOR = 1e-6


@dataclass(frozen=True)
class GaussianState:
    """Gaussian state with quadrature mean ``mean`` and covariance ``cov``."""

    mean: np.ndarray
    cov: CovarianceMatrix

    def __post_init__(self):
        cov = self.cov if isinstance(self.cov, CovarianceMatrix) else CovarianceMatrix(self.cov)
        mean = np.zeros(cov.sigma.shape[0]) if self.mean is None else np.array(self.mean, dtype=float)
        if mean.shape != (cov.sigma.shape[0],):
            raise ValueError(f"mean has shape {mean.shape}, expected ({cov.sigma.shape[0]},)")
        if not cov.is_admissible():
            raise InadmissibleCovariance("covariance violates sigma + i*Delta >= 0")
        mean.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @classmethod
    def from_cov(cls, sigma, mean=None):
        return cls(mean, CovarianceMatrix(sigma))

    @classmethod
    def vacuum(cls, n):
        return cls.from_cov(np.eye(2 * n))

    @classmethod
    def thermal(cls, n, nu):
        return cls.from_cov(nu * np.eye(2 * n))

    @property
    def n(self):
        return self.cov.n

    @property
    def sigma(self):
        return self.cov.sigma


@dataclass(frozen=True)
class FisherMatrix:
    j: np.ndarray

    def trace(self):
        return float(np.trace(self.j))


def entropy_h(nu):
    """Entropy in nats of a thermal mode with symplectic eigenvalue ``nu``.

    ``h(nu) = (nu+1)/2 ln((nu+1)/2) - (nu-1)/2 ln((nu-1)/2)``, evaluated as
    ``ln a + b log1p(1/b)`` with ``a = (nu+1)/2``, ``b = (nu-1)/2`` so that it
    stays accurate both near ``nu = 1`` and for very large ``nu``.
    """
    nu = np.asarray(nu, dtype=float)
    if np.any(nu < 1.0 - TOL_PSD):
        raise DomainError(f"symplectic eigenvalue below 1: {np.min(nu)}")
    a = 0.5 * (nu + 1.0)
    b = np.maximum(0.5 * (nu - 1.0), 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        tail = np.where(b > 0, b * np.log1p(1.0 / np.where(b > 0, b, 1.0)), 0.0)
    out = np.log(a) + tail
    return float(out) if out.ndim == 0 else out


def _sigma(state):
    if isinstance(state, GaussianState):
        return state.sigma
    if isinstance(state, CovarianceMatrix):
        return state.sigma
    return np.asarray(state, dtype=float)


def entropy(state):
    """Von Neumann entropy (nats) of a Gaussian state or covariance matrix."""
    return float(np.sum(entropy_h(symplectic_eigenvalues(_sigma(state)))))


def _beta(nus):
    if np.any(nus <= 1.0 + NU_FLOOR):
        raise PureModeError(
            f"normal mode too close to pure (nu_min = {np.min(nus):.3e}); Fisher information diverges"
        )
    return np.log((nus + 1.0) / (nus - 1.0))


def fisher(state):
    """Fisher information matrix of a Gaussian state.

    ``J = S^{-T} (beta_i (x) 1_2) S^{-1}`` with ``beta_i = ln((nu_i+1)/(nu_i-1))``
    from the Williamson form of the covariance. This is the Hessian at zero of
    ``x -> S(rho || D_x rho D_x^dag)``.
    """
    spec = williamson(_sigma(state))
    beta = _beta(spec.nus)
    s_inv = np.linalg.inv(spec.s_matrix)
    j = s_inv.T @ np.diag(np.repeat(beta, 2)) @ s_inv
    return FisherMatrix(0.5 * (j + j.T))


def relative_entropy_displaced(state, x):
    """Relative entropy between a Gaussian state and its copy displaced by ``x``."""
    x = np.asarray(x, dtype=float)
    return 0.5 * float(x @ fisher(state).j @ x)


def gaussianize(moments):
    """Gaussian state with the given ``(mean, cov)`` first and second moments."""
    mean, cov = moments
    cov = np.asarray(cov, dtype=float)
    if not is_admissible(cov):
        raise InadmissibleCovariance("moments do not describe a quantum state")
    return GaussianState.from_cov(cov, mean)


def moments(state):
    return state.mean.copy(), state.sigma.copy()
