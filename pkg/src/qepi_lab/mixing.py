"""
Linear multi-mode mixing channels ``R_Y = sum_alpha M_alpha R_alpha``.

A mixing matrix is a list of K real 2n x 2n blocks obeying
``sum_alpha M_alpha Delta M_alpha^T = Delta``.
"""

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, InadmissibleCovariance, ShapeMismatch, SingularBlock
from .gaussian_state import GaussianState
from .symplectic_core import (
    TOL_SYMP,
    is_admissible,
    random_symplectic,
    symplectic_form,
    time_reversal,
)

SINGULAR_RTOL = 1e-12


def _block_weight(block):
    """Return ``(lambda, gamma, invertible)`` for one block."""
    dim = block.shape[0]
    n = dim // 2
    norm = np.linalg.norm(block, 2)
    if norm == 0.0:
        return 0.0, np.zeros((dim, dim)), False
    # SVD keeps gamma accurate for ill-conditioned blocks: M = U s V^T gives
    # gamma = lambda V s^-2 V^T without forming M^-1 explicitly
    _, s, vt = np.linalg.svd(block)
    if s[-1] == 0.0:
        return 0.0, np.zeros((dim, dim)), False
    logdet = float(np.sum(np.log(s)))
    # |det M| > 1e-12 * ||M||^(2n), compared in log space
    if logdet <= np.log(SINGULAR_RTOL) + dim * np.log(norm):
        return 0.0, np.zeros((dim, dim)), False
    lam = float(np.exp(logdet / n))
    gamma = (vt.T * (lam / s**2)) @ vt
    return lam, 0.5 * (gamma + gamma.T), True


@dataclass(frozen=True)
class MixingMatrix:
    """Block matrix ``M = (M_1 | ... | M_K)`` of a linear bosonic mixing channel.

    The symplectic constraint is checked on construction; ``lambdas`` and
    ``gammas`` are derived from the blocks.
    """

    blocks: tuple
    lambdas: tuple = field(init=False)
    gammas: tuple = field(init=False, repr=False)
    invertible: tuple = field(init=False, repr=False)

    def __post_init__(self):
        blocks = tuple(np.array(b, dtype=float) for b in self.blocks)
        if not blocks:
            raise ShapeMismatch("a mixing matrix needs at least one block")
        dim = blocks[0].shape[0]
        if dim % 2 or any(b.shape != (dim, dim) for b in blocks):
            raise ShapeMismatch("all blocks must be square 2n x 2n of equal size")
        for b in blocks:
            b.setflags(write=False)
        object.__setattr__(self, "blocks", blocks)
        res = self.constraint_residual()
        scale = max(1.0, max(np.linalg.norm(b, 2) ** 2 for b in blocks))
        if res > TOL_SYMP * scale:
            raise DomainError(f"blocks violate sum M Delta M^T = Delta (residual {res:.3e})")
        weights = [_block_weight(b) for b in blocks]
        object.__setattr__(self, "lambdas", tuple(w[0] for w in weights))
        object.__setattr__(self, "gammas", tuple(w[1] for w in weights))
        object.__setattr__(self, "invertible", tuple(w[2] for w in weights))

    @property
    def n(self):
        return self.blocks[0].shape[0] // 2

    @property
    def k(self):
        return len(self.blocks)

    @property
    def matrix(self):
        return np.hstack(self.blocks)

    def constraint_residual(self):
        delta = symplectic_form(self.blocks[0].shape[0] // 2)
        total = sum(b @ delta @ b.T for b in self.blocks)
        return float(np.max(np.abs(total - delta)))

    def to_dict(self):
        return {"n": self.n, "k": self.k, "blocks": [b.tolist() for b in self.blocks]}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data):
        blocks = [np.asarray(b, dtype=float) for b in data["blocks"]]
        if len(blocks) != data["k"] or any(b.shape != (2 * data["n"], 2 * data["n"]) for b in blocks):
            raise ShapeMismatch("block list does not match declared n, k")
        return cls(tuple(blocks))

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class ProductGaussianInput:
    states: tuple

    def __post_init__(self):
        states = tuple(self.states)
        if not states:
            raise ShapeMismatch("empty product input")
        if len({s.n for s in states}) != 1:
            raise ShapeMismatch("all inputs must have the same mode count")
        object.__setattr__(self, "states", states)

    @property
    def n(self):
        return self.states[0].n

    @property
    def k(self):
        return len(self.states)

    @property
    def sigmas(self):
        return [s.sigma for s in self.states]


def beam_splitter(n, lam):
    if not 0.0 <= lam <= 1.0:
        raise DomainError(f"beam-splitter parameter must lie in [0, 1], got {lam}")
    eye = np.eye(2 * n)
    return MixingMatrix((np.sqrt(lam) * eye, np.sqrt(1.0 - lam) * eye))


def amplifier(n, kappa):
    if kappa < 1.0:
        raise DomainError(f"amplifier gain must be >= 1, got {kappa}")
    return MixingMatrix((np.sqrt(kappa) * np.eye(2 * n), np.sqrt(kappa - 1.0) * time_reversal(n)))


def random_mixing(n, k, seed=None, scale=0.3):
    """First 2n rows of a random 2Kn x 2Kn symplectic matrix, split into K blocks."""
    if n < 1 or k < 1:
        raise DomainError("n and k must be positive")
    s = random_symplectic(n * k, seed, scale)
    rows = s[: 2 * n]
    return MixingMatrix(tuple(rows[:, 2 * n * a : 2 * n * (a + 1)] for a in range(k)))


def _check_input(m, inputs):
    if inputs.k != m.k or inputs.n != m.n:
        raise ShapeMismatch(
            f"input has K={inputs.k}, n={inputs.n}; channel expects K={m.k}, n={m.n}"
        )


def output_covariance(m, sigmas):
    return sum(b @ s @ b.T for b, s in zip(m.blocks, sigmas))


def apply(m, inputs):
    """Output Gaussian state of the channel on a product Gaussian input."""
    _check_input(m, inputs)
    mean = sum(b @ s.mean for b, s in zip(m.blocks, inputs.states))
    cov = output_covariance(m, inputs.sigmas)
    return GaussianState.from_cov(0.5 * (cov + cov.T), mean)


def saturating_family(m, c, temperature=1.0):
    """Inputs with ``sigma_alpha = temperature * c_alpha * gamma_alpha``.

    Then ``M_alpha sigma_alpha M_alpha^T = temperature * c_alpha * lambda_alpha * 1``,
    all proportional to the identity (the classical saturation condition).
    """
    c = np.asarray(c, dtype=float)
    if c.shape != (m.k,) or np.any(c <= 0):
        raise ShapeMismatch("need one positive coefficient per block")
    if temperature < 1.0:
        raise DomainError("temperature must be >= 1")
    if not all(m.invertible):
        raise SingularBlock("saturating family needs every block invertible")
    states = []
    for g, ca in zip(m.gammas, c):
        sigma = temperature * ca * g
        if not is_admissible(sigma):
            raise InadmissibleCovariance(
                f"temperature {temperature} too small: input with c={ca} is not a quantum state"
            )
        states.append(GaussianState.from_cov(sigma))
    return ProductGaussianInput(tuple(states))
