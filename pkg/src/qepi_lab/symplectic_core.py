"""
Symplectic linear algebra for n bosonic modes in (q1, p1, ..., qn, pn) ordering.

The vacuum covariance matrix is the identity, so a real symmetric ``sigma`` is a
valid quantum covariance matrix iff ``sigma + 1j * delta >= 0``, equivalently iff
all of its symplectic eigenvalues are >= 1.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, schur, sqrtm

from .errors import NotPositiveDefinite

TOL_PSD = 1e-10
TOL_SYMP = 1e-9


def symplectic_form(n):
    """Block-diagonal symplectic form ``Delta`` with blocks ``[[0, 1], [-1, 0]]``."""
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def time_reversal(n):
    """Per-mode quadrature reflection ``T = diag(1, -1, 1, -1, ...)``."""
    return np.kron(np.eye(n), np.diag([1.0, -1.0]))


@dataclass(frozen=True)
class SymplecticForm:
    n: int
    delta: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"mode count must be positive, got {self.n}")
        object.__setattr__(self, "delta", symplectic_form(self.n))


def _mode_count(dim):
    if dim % 2:
        raise ValueError(f"phase-space dimension must be even, got {dim}")
    return dim // 2


@dataclass(frozen=True)
class CovarianceMatrix:
    """Real symmetric 2n x 2n matrix, symmetrized on construction."""

    sigma: np.ndarray

    def __post_init__(self):
        s = np.array(self.sigma, dtype=float)
        if s.ndim != 2 or s.shape[0] != s.shape[1]:
            raise ValueError(f"covariance must be square, got shape {s.shape}")
        _mode_count(s.shape[0])
        s = 0.5 * (s + s.T)
        s.setflags(write=False)
        object.__setattr__(self, "sigma", s)

    @property
    def n(self):
        return self.sigma.shape[0] // 2

    def is_admissible(self, tol=TOL_PSD):
        return is_admissible(self.sigma, tol)


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Williamson normal form ``sigma = S diag(nu_i (x) 1_2) S^T``."""

    nus: np.ndarray
    s_matrix: np.ndarray

    @property
    def diagonal(self):
        return np.diag(np.repeat(self.nus, 2))

    def reconstruct(self):
        return self.s_matrix @ self.diagonal @ self.s_matrix.T


def _as_array(sigma):
    if isinstance(sigma, CovarianceMatrix):
        return sigma.sigma
    s = np.asarray(sigma, dtype=float)
    return 0.5 * (s + s.T)


def _check_positive(s):
    evals = np.linalg.eigvalsh(s)
    scale = max(np.max(np.abs(evals)), 1e-300)
    if evals[0] <= TOL_PSD * scale:
        raise NotPositiveDefinite(
            f"matrix is not positive definite (min eigenvalue {evals[0]:.3e})"
        )


def symplectic_eigenvalues(sigma):
    """Symplectic eigenvalues of a positive definite matrix, sorted descending.

    Uses the Hermitian eigenproblem of ``i L^T Delta L`` with ``sigma = L L^T``,
    which is similar to ``i Delta sigma``.
    """
    s = _as_array(sigma)
    n = _mode_count(s.shape[0])
    try:
        chol = np.linalg.cholesky(s)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite("matrix is not positive definite") from exc
    a = chol.T @ symplectic_form(n) @ chol
    evals = np.linalg.eigvalsh(1j * a)
    # eigenvalues come in +-nu pairs; the upper half holds the nus ascending
    return evals[n:][::-1].copy()


def williamson(sigma):
    """Williamson decomposition of a positive definite covariance matrix.

    Parameters
    ----------
    sigma : array_like or CovarianceMatrix
        Real symmetric positive definite 2n x 2n matrix.

    Returns
    -------
    SymplecticSpectrum
        Symplectic eigenvalues sorted descending and a symplectic ``S`` with
        ``S @ Delta @ S.T == Delta`` and ``S @ D @ S.T == sigma``.
    """
    s = _as_array(sigma)
    n = _mode_count(s.shape[0])
    _check_positive(s)
    delta = symplectic_form(n)

    root = np.real(sqrtm(s))
    root = 0.5 * (root + root.T)
    inv_root = np.linalg.inv(root)
    a = inv_root @ delta @ inv_root
    a = 0.5 * (a - a.T)

    # real Schur form of an antisymmetric matrix: 2x2 blocks [[0, b], [-b, 0]]
    t, o = schur(a, output="real")
    nus = np.empty(n)
    cols = []
    i = 0
    k = 0
    dim = 2 * n
    while i < dim:
        if i + 1 < dim and abs(t[i + 1, i]) > 0.0:
            b = t[i, i + 1]
            c1, c2 = o[:, i], o[:, i + 1]
            if b < 0:
                c1, c2 = c2, c1
                b = -b
            nus[k] = 1.0 / b
            cols.append((c1, c2))
            k += 1
            i += 2
        else:
            # a lone zero diagonal entry would mean a singular antisymmetric
            # matrix, impossible for positive definite sigma
            raise NotPositiveDefinite("degenerate Schur form in Williamson decomposition")

    order = np.argsort(-nus, kind="stable")
    nus = nus[order]
    ortho = np.column_stack([c for j in order for c in cols[j]])
    scale = np.repeat(1.0 / np.sqrt(nus), 2)
    s_matrix = root @ ortho * scale[None, :]
    return SymplecticSpectrum(nus=nus, s_matrix=s_matrix)


def is_admissible(sigma, tol=TOL_PSD):
    """True iff ``sigma + i Delta`` is positive semidefinite up to ``tol * ||sigma||``."""
    s = _as_array(sigma)
    n = _mode_count(s.shape[0])
    herm = s + 1j * symplectic_form(n)
    evals = np.linalg.eigvalsh(herm)
    scale = max(np.linalg.norm(s, 2), 1.0)
    return bool(evals[0] >= -tol * scale)


def random_symplectic(n, seed=None, scale=0.3):
    """Random symplectic matrix ``exp(Delta @ H)`` with Gaussian symmetric ``H``.

    Entries of ``H`` are i.i.d. with mean 0 and standard deviation ``scale``
    (the diagonal and upper triangle are drawn, then mirrored).
    """
    if scale < 0:
        raise ValueError("scale must be nonnegative")
    dim = 2 * n
    if scale == 0:
        return np.eye(dim)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    upper = np.triu(rng.normal(0.0, scale, size=(dim, dim)))
    h = upper + np.triu(upper, 1).T
    return expm(symplectic_form(n) @ h)


def random_covariance(n, seed=None, nu_range=(1.0, 20.0), scale=0.3):
    """Random admissible covariance ``S diag(nu) S^T``.

    Symplectic eigenvalues are drawn uniformly from ``nu_range``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    nus = rng.uniform(nu_range[0], nu_range[1], size=n)
    s = random_symplectic(n, rng, scale)
    sigma = s @ np.diag(np.repeat(nus, 2)) @ s.T
    return 0.5 * (sigma + sigma.T)


def symplectic_residual(s):
    """Max-norm of ``S Delta S^T - Delta``."""
    n = _mode_count(s.shape[0])
    delta = symplectic_form(n)
    return float(np.max(np.abs(s @ delta @ s.T - delta)))
