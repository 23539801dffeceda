"""
Brute-force single-mode and two-mode computations in a truncated Fock basis.

This is an independent check on the covariance-level Gaussian code: states are
explicit density matrices, channels act through two-mode unitaries followed by a
partial trace, and entropies come from eigenvalues. Quadratures are
``Q = (a + a^dag)/sqrt(2)``, ``P = (a - a^dag)/(i sqrt(2))`` so that the vacuum
covariance is the identity.

Every state carries its trace deficit ``1 - tr(rho)``: the probability lost to
truncation. States whose deficit exceeds ``DEFICIT_BUDGET`` are untrusted and
channel outputs past the budget raise :class:`TruncationError`.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, expm
from scipy.special import eval_genlaguerre, gammaln

from .errors import (
    DomainError,
    InadmissibleProbe,
    SupportViolation,
    TruncationError,
)
from .gaussian_state import FisherMatrix
from .qepi_check import make_report
from .symplectic_core import is_admissible, symplectic_form, time_reversal

DEFAULT_CUTOFF = 40
TWO_MODE_CUTOFF = 24
DEFICIT_BUDGET = 1e-6
EIG_FLOOR = 1e-14
ORACLE_TOL_RATE = 1e-6
MAX_OUTPUT_CUTOFF = 2048


# -- single-mode operators ---------------------------------------------------

def annihilation(cutoff):
    return np.diag(np.sqrt(np.arange(1, cutoff)), 1).astype(complex)


def quadratures(cutoff):
    a = annihilation(cutoff)
    q = (a + a.conj().T) / np.sqrt(2)
    p = (a - a.conj().T) / (1j * np.sqrt(2))
    return q, p


def displacement_matrix(alpha, cutoff, rows=None):
    """Matrix elements ``<m|D(alpha)|n>`` for ``m < rows``, ``n < cutoff``.

    Uses the closed Laguerre form, so every returned element is exact (not
    affected by the truncation of the ladder operators).
    """
    rows = cutoff if rows is None else rows
    alpha = complex(alpha)
    if alpha == 0:
        return np.eye(rows, cutoff, dtype=complex)
    x = abs(alpha) ** 2
    m = np.arange(rows)[:, None]
    n = np.arange(cutoff)[None, :]
    lo = np.minimum(m, n)
    hi = np.maximum(m, n)
    diff = hi - lo
    lag = eval_genlaguerre(lo, diff, x)
    with np.errstate(divide="ignore"):
        log_mag = 0.5 * (gammaln(lo + 1) - gammaln(hi + 1)) + diff * np.log(abs(alpha)) - 0.5 * x
        mag = np.where(lag == 0, 0.0, np.sign(lag) * np.exp(np.log(np.abs(lag)) + log_mag))
    # m >= n: alpha^(m-n); m < n: (-conj(alpha))^(n-m)
    phase_up = (alpha / abs(alpha)) ** diff
    phase_dn = (-alpha.conjugate() / abs(alpha)) ** diff
    return mag * np.where(m >= n, phase_up, phase_dn)


def _alpha_from_shift(x):
    """Complex amplitude of the displacement shifting (Q, P) by ``x``."""
    return (x[0] + 1j * x[1]) / np.sqrt(2)


# -- states --------------------------------------------------------------------

@dataclass(frozen=True)
class FockState:
    """Density matrix of one mode in the number basis ``|0>, ..., |N-1>``."""

    rho: np.ndarray
    trace_deficit: float = field(init=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("density matrix must be square")
        if np.max(np.abs(rho - rho.conj().T), initial=0.0) > 1e-12:
            raise ValueError("density matrix is not Hermitian")
        rho = 0.5 * (rho + rho.conj().T)
        if np.linalg.eigvalsh(rho)[0] < -1e-10:
            raise ValueError("density matrix has negative eigenvalues")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "trace_deficit", float(1.0 - np.trace(rho).real))

    @property
    def cutoff(self):
        return self.rho.shape[0]

    @property
    def trusted(self):
        return self.trace_deficit <= DEFICIT_BUDGET

    @classmethod
    def from_ket(cls, ket):
        ket = np.asarray(ket, dtype=complex)
        return cls(np.outer(ket, ket.conj()))

    @classmethod
    def fock(cls, n, cutoff=DEFAULT_CUTOFF):
        if not 0 <= n < cutoff:
            raise DomainError(f"|{n}> does not fit in cutoff {cutoff}")
        ket = np.zeros(cutoff)
        ket[n] = 1.0
        return cls.from_ket(ket)

    @classmethod
    def vacuum(cls, cutoff=DEFAULT_CUTOFF):
        return cls.fock(0, cutoff)

    @classmethod
    def coherent(cls, alpha, cutoff=DEFAULT_CUTOFF):
        return cls.from_ket(coherent_ket(alpha, cutoff))

    @classmethod
    def thermal(cls, nu, cutoff=DEFAULT_CUTOFF):
        """Thermal state with symplectic eigenvalue ``nu`` (mean photon number (nu-1)/2)."""
        if nu < 1:
            raise DomainError("nu must be >= 1")
        nbar = 0.5 * (nu - 1.0)
        k = np.arange(cutoff)
        if nbar == 0:
            p = (k == 0).astype(float)
        else:
            p = np.exp(k * np.log(nbar / (nbar + 1.0))) / (nbar + 1.0)
        return cls(np.diag(p))

    @classmethod
    def coherent_superposition(cls, amplitudes, coefficients, cutoff=DEFAULT_CUTOFF):
        """Normalized ``sum_i c_i |alpha_i>``; normalization uses exact overlaps."""
        amps = np.asarray(amplitudes, dtype=complex)
        coefs = np.asarray(coefficients, dtype=complex)
        gram = np.exp(
            -0.5 * np.abs(amps[:, None]) ** 2
            - 0.5 * np.abs(amps[None, :]) ** 2
            + amps[:, None].conj() * amps[None, :]
        )
        norm2 = float(np.real(coefs.conj() @ gram @ coefs))
        if norm2 <= 0:
            raise DomainError("superposition has zero norm")
        ket = sum(c * coherent_ket(a, cutoff) for c, a in zip(coefs, amps))
        return cls.from_ket(ket / np.sqrt(norm2))

    @classmethod
    def mixture(cls, states, weights):
        weights = np.asarray(weights, dtype=float)
        if np.any(weights < 0) or not np.isclose(weights.sum(), 1.0):
            raise DomainError("mixture weights must be a probability vector")
        cutoff = max(s.cutoff for s in states)
        rho = np.zeros((cutoff, cutoff), dtype=complex)
        for w, s in zip(weights, states):
            rho += w * _pad(s.rho, cutoff)
        return cls(rho)

    @classmethod
    def gaussian(cls, mean, cov, cutoff=DEFAULT_CUTOFF):
        return cls(gaussian_density(mean, cov, cutoff))

    def expect(self, op):
        return complex(np.trace(self.rho @ op))


def _pad(rho, cutoff):
    out = np.zeros((cutoff, cutoff), dtype=complex)
    n = rho.shape[0]
    out[:n, :n] = rho
    return out


def coherent_ket(alpha, cutoff):
    alpha = complex(alpha)
    k = np.arange(cutoff)
    if alpha == 0:
        return (k == 0).astype(complex)
    log_mag = k * np.log(abs(alpha)) - 0.5 * gammaln(k + 1) - 0.5 * abs(alpha) ** 2
    return np.exp(log_mag) * (alpha / abs(alpha)) ** k


def gaussian_density(mean, cov, cutoff=DEFAULT_CUTOFF):
    """Single-mode Gaussian density matrix with the given moments.

    A thermal state with ``nu = sqrt(det cov)`` is squeezed by the unitary
    generated by ``1/2 R^T H R`` with ``exp(Delta H) = (cov/nu)^(1/2)``, computed
    in an enlarged basis and cropped, then displaced exactly.
    """
    cov = np.asarray(cov, dtype=float)
    cov = 0.5 * (cov + cov.T)
    if cov.shape != (2, 2) or not is_admissible(cov):
        raise InadmissibleProbe("covariance is not an admissible single-mode matrix")
    evals, vecs = np.linalg.eigh(cov)
    nu = float(np.sqrt(max(evals[0] * evals[1], 1.0)))
    big = 2 * cutoff + 20
    rho = FockState.thermal(nu, big).rho.copy()
    r = 0.25 * np.log(evals[1] / evals[0])
    if r > 1e-15:
        gen = vecs @ np.diag([-r, r]) @ vecs.T
        h = np.linalg.solve(symplectic_form(1), gen)
        q, p = quadratures(big)
        rops = (q, p)
        k_op = 0.5 * sum(h[i, j] * rops[i] @ rops[j] for i in range(2) for j in range(2))
        u = expm(-1j * k_op)
        rho = u @ rho @ u.conj().T
    rho = rho[:cutoff, :cutoff]
    x = np.asarray(mean, dtype=float)
    if np.any(x != 0):
        d = displacement_matrix(_alpha_from_shift(x), cutoff)
        rho = d @ rho @ d.conj().T
    return 0.5 * (rho + rho.conj().T)


def displaced(state, x, cutoff=None):
    """``D_x rho D_x^dag`` in a basis of ``cutoff`` levels (default: the state's own).

    A larger ``cutoff`` keeps the mass that the shift moves past the input
    truncation; the displacement elements themselves are exact.
    """
    rows = state.cutoff if cutoff is None else int(cutoff)
    if rows < state.cutoff:
        raise DomainError("cannot displace into a smaller basis")
    d = displacement_matrix(_alpha_from_shift(np.asarray(x, dtype=float)), state.cutoff, rows=rows)
    return FockState(d @ state.rho @ d.conj().T)


def moments(state):
    """Mean quadratures and covariance matrix of the normalized state.

    Built from ``<a>``, ``<a^2>`` and ``<a^dag a>``, which the truncated ladder
    operators reproduce exactly.
    """
    a = annihilation(state.cutoff)
    tr = np.trace(state.rho).real
    ea = state.expect(a) / tr
    ea2 = state.expect(a @ a) / tr
    en = state.expect(a.conj().T @ a).real / tr
    q = np.sqrt(2) * ea.real
    p = np.sqrt(2) * ea.imag
    qq = 2 * ea2.real + 2 * en + 1 - 2 * q * q
    pp = -2 * ea2.real + 2 * en + 1 - 2 * p * p
    qp = 2 * ea2.imag - 2 * q * p
    return np.array([q, p]), np.array([[qq, qp], [qp, pp]])


# -- entropies -----------------------------------------------------------------

def von_neumann_entropy(state):
    """``-sum p ln p`` over eigenvalues >= EIG_FLOOR, in nats."""
    rho = state.rho if isinstance(state, FockState) else np.asarray(state)
    p = np.linalg.eigvalsh(rho)
    p = p[p >= EIG_FLOOR]
    return float(-np.sum(p * np.log(p)))


def relative_entropy(rho, sigma_state, support_tol=1e-10):
    """``tr rho (ln rho - ln sigma)`` from eigendecompositions.

    If the two matrices have different sizes the smaller one is zero-padded.

    Raises :class:`SupportViolation` if ``rho`` puts more than ``support_tol``
    weight on eigenvectors of ``sigma_state`` with eigenvalue below EIG_FLOOR.
    """
    r = rho.rho if isinstance(rho, FockState) else np.asarray(rho)
    s = sigma_state.rho if isinstance(sigma_state, FockState) else np.asarray(sigma_state)
    # states from different cutoffs are compared in the larger basis
    dim = max(r.shape[0], s.shape[0])
    r, s = _pad(r, dim), _pad(s, dim)
    pr = np.linalg.eigvalsh(r)
    ps, vs = np.linalg.eigh(s)
    weights = np.real(np.einsum("ij,jk,ki->i", vs.conj().T, r, vs))
    null = ps < EIG_FLOOR
    if np.sum(weights[null]) > support_tol:
        raise SupportViolation(
            f"rho has weight {np.sum(weights[null]):.3e} outside the support of sigma"
        )
    pr = pr[pr >= EIG_FLOOR]
    return float(np.sum(pr * np.log(pr)) - np.sum(weights[~null] * np.log(ps[~null])))


# -- phase-space functions -------------------------------------------------------

def characteristic_function(state, k):
    """``chi(k) = tr(rho exp(i k^T R))``."""
    k = np.asarray(k, dtype=float)
    alpha = (-k[1] + 1j * k[0]) / np.sqrt(2)
    return complex(np.sum(state.rho.T * displacement_matrix(alpha, state.cutoff)))


def husimi(state, gamma, x):
    """Generalized Husimi function ``tr(rho rho_{x, gamma}) / (2 pi)``."""
    gamma = np.asarray(gamma, dtype=float)
    if gamma.shape != (2, 2) or not is_admissible(gamma):
        raise InadmissibleProbe("probe covariance must satisfy gamma >= +-i Delta")
    x = np.asarray(x, dtype=float)
    if np.allclose(gamma, np.eye(2), atol=1e-15, rtol=0):
        ket = coherent_ket(_alpha_from_shift(x), state.cutoff)
        val = np.real(ket.conj() @ state.rho @ ket)
    else:
        probe = gaussian_density(x, gamma, state.cutoff)
        val = np.real(np.sum(state.rho.T * probe))
    return float(val / (2 * np.pi))


# -- Lindblad diffusion --------------------------------------------------------

def lindblad_generator(rho, gamma):
    """``-1/4 sum_ij gamma_ij [X_i, [X_j, rho]]`` with ``X = Delta^{-1} R``.

    Only meaningful away from the truncation edge.
    """
    r = rho.rho if isinstance(rho, FockState) else np.asarray(rho, dtype=complex)
    q, p = quadratures(r.shape[0])
    dinv = np.linalg.inv(symplectic_form(1))
    xs = [dinv[i, 0] * q + dinv[i, 1] * p for i in range(2)]
    out = np.zeros_like(r)
    for i in range(2):
        for j in range(2):
            if gamma[i][j] == 0:
                continue
            inner = xs[j] @ r - r @ xs[j]
            out -= 0.25 * gamma[i][j] * (xs[i] @ inner - inner @ xs[i])
    return out


def euler_step(rho, gamma, dt):
    r = rho.rho if isinstance(rho, FockState) else np.asarray(rho, dtype=complex)
    return r + dt * lindblad_generator(r, gamma)


# -- two-mode unitaries and channels -------------------------------------------

@dataclass(frozen=True)
class TwoModeUnitary:
    """A two-mode unitary specified by kind and parameter.

    ``beam_splitter`` (transmissivity ``lam``) and ``two_mode_squeezer``
    (gain ``kappa = cosh^2 r``) conserve ``n1 + n2`` and ``n1 - n2``
    respectively; they are represented sector by sector as one-dimensional
    chains, each exponentiated exactly.
    """

    kind: str
    param: object

    def __post_init__(self):
        if self.kind == "beam_splitter":
            if not 0.0 <= self.param <= 1.0:
                raise DomainError("beam-splitter parameter must lie in [0, 1]")
        elif self.kind == "two_mode_squeezer":
            if self.param < 1.0:
                raise DomainError("squeezer gain must be >= 1")
        elif self.kind == "displacement":
            object.__setattr__(self, "param", tuple(np.asarray(self.param, dtype=float).ravel()))
            if len(self.param) != 4:
                raise DomainError("two-mode displacement needs a 4-vector")
        else:
            raise DomainError(f"unknown unitary kind {self.kind!r}")

    @property
    def blocks(self):
        """The realized ``(M_1, M_2)`` acting on mode 1's output quadratures."""
        if self.kind == "beam_splitter":
            return np.sqrt(self.param) * np.eye(2), np.sqrt(1.0 - self.param) * np.eye(2)
        if self.kind == "two_mode_squeezer":
            return np.sqrt(self.param) * np.eye(2), np.sqrt(self.param - 1.0) * time_reversal(1)
        return np.eye(2), np.zeros((2, 2))

    @property
    def lambdas(self):
        if self.kind == "beam_splitter":
            return self.param, 1.0 - self.param
        if self.kind == "two_mode_squeezer":
            return self.param, self.param - 1.0
        return 1.0, 0.0

    # sector chains ---------------------------------------------------------
    def _chain(self, sector, length):
        """Lower off-diagonal of one sector's generator and the output (m, k) per chain index.

        The generator is real antisymmetric and tridiagonal, with
        ``G[j+1, j] = g[j]`` and ``G[j, j+1] = -g[j]``.
        """
        j = np.arange(length)
        if self.kind == "beam_splitter":
            # states |N - j, j>
            theta = np.arccos(np.sqrt(self.param))
            g = -theta * np.sqrt((sector - j[:-1]) * (j[:-1] + 1.0))
            return g, sector - j, j
        # states |j + d+, j + d->, d = n1 - n2
        r = np.arccosh(np.sqrt(self.param))
        dp, dm = max(sector, 0), max(-sector, 0)
        g = r * np.sqrt((j[:-1] + dp + 1.0) * (j[:-1] + dm + 1.0))
        return g, j + dp, j + dm

    def _sector_of(self, n1, n2):
        if self.kind == "beam_splitter":
            return n1 + n2, n2
        return n1 - n2, np.minimum(n1, n2)

    def evolve_columns(self, sector, chain_idx, length):
        """Columns ``exp(G)[:, chain_idx]`` of one sector plus the output (m, k) labels."""
        g, m_out, k_out = self._chain(sector, length)
        chain_idx = np.asarray(chain_idx)
        if length == 1 or not np.any(g):
            cols = np.zeros((length, len(chain_idx)), dtype=complex)
            cols[chain_idx, np.arange(len(chain_idx))] = 1.0
            return cols, m_out, k_out
        # with D = diag(i^j), i*G = D T D^dag for the real symmetric tridiagonal T
        # whose off-diagonal is g, hence exp(G) = D V exp(-i w) V^T D^dag
        w, v = eigh_tridiagonal(np.zeros(length), g)
        phase = 1j ** (np.arange(length) % 4)
        right = v[chain_idx].T * phase[chain_idx].conj()[None, :]
        amps = phase[:, None] * (v @ (np.exp(-1j * w)[:, None] * right))
        return amps, m_out, k_out

    def matrix(self, cutoff=TWO_MODE_CUTOFF):
        """Dense unitary on the ``cutoff x cutoff`` two-mode space (index ``n1*cutoff + n2``).

        Exact on states with ``n1 + n2 < cutoff`` for the beam splitter; for the
        squeezer the chains are evolved at triple length and cropped.
        """
        dim = cutoff * cutoff
        if self.kind == "displacement":
            x = self.param
            d1 = displacement_matrix(_alpha_from_shift(x[:2]), cutoff)
            d2 = displacement_matrix(_alpha_from_shift(x[2:]), cutoff)
            return np.kron(d1, d2)
        u = np.zeros((dim, dim), dtype=complex)
        n1, n2 = np.divmod(np.arange(dim), cutoff)
        sectors, idx = self._sector_of(n1, n2)
        for s in np.unique(sectors):
            members = np.flatnonzero(sectors == s)
            length = s + 1 if self.kind == "beam_splitter" else 3 * cutoff
            amps, m_out, k_out = self.evolve_columns(int(s), idx[members], length)
            keep = (m_out < cutoff) & (k_out < cutoff) & (m_out >= 0)
            rows = m_out[keep] * cutoff + k_out[keep]
            u[np.ix_(rows, members)] = amps[keep]
        return u


def beam_splitter_unitary(lam):
    return TwoModeUnitary("beam_splitter", float(lam))


def two_mode_squeezer(kappa):
    return TwoModeUnitary("two_mode_squeezer", float(kappa))


def _support(rho, tol=1e-20):
    diag = np.abs(np.diag(rho))
    nz = np.flatnonzero(diag > tol)
    return int(nz[-1]) + 1 if nz.size else 1


def _as_unitary(kind):
    if isinstance(kind, TwoModeUnitary):
        return kind
    name, param = kind
    return TwoModeUnitary(name, param)


def _apply_fixed(u, rho1, rho2, out_cutoff):
    """Reduced output of mode 1 cropped to ``out_cutoff`` (no budget check)."""
    n1s, n2s = np.meshgrid(np.arange(rho1.shape[0]), np.arange(rho2.shape[0]), indexing="ij")
    n1s, n2s = n1s.ravel(), n2s.ravel()
    sectors, chain_idx = u._sector_of(n1s, n2s)
    groups = []
    for s in np.unique(sectors):
        members = np.flatnonzero(sectors == s)
        if u.kind == "beam_splitter":
            length = int(s) + 1
        else:
            length = 2 * out_cutoff + int(np.max(chain_idx[members])) + 1
        amps, m_out, k_out = u.evolve_columns(int(s), chain_idx[members], length)
        groups.append((n1s[members], n2s[members], amps, m_out, k_out))

    out = np.zeros((out_cutoff, out_cutoff), dtype=complex)
    for a1, a2, amps_a, m_a, k_a in groups:
        for b1, b2, amps_b, m_b, k_b in groups:
            block = rho1[np.ix_(a1, b1)] * rho2[np.ix_(a2, b2)]
            if not np.any(block):
                continue
            # pair chain rows with equal traced-out photon number k
            k_lo = max(k_a[0], k_b[0])
            k_hi = min(k_a[-1], k_b[-1])
            if k_hi < k_lo:
                continue
            ks = np.arange(k_lo, k_hi + 1)
            ja = ks - k_a[0]
            jb = ks - k_b[0]
            ma, mb = m_a[ja], m_b[jb]
            keep = (ma < out_cutoff) & (mb < out_cutoff) & (ma >= 0) & (mb >= 0)
            if not np.any(keep):
                continue
            ja, jb, ma, mb = ja[keep], jb[keep], ma[keep], mb[keep]
            vals = np.sum((amps_a[ja] @ block) * amps_b[jb].conj(), axis=1)
            out[ma, mb] += vals
    return 0.5 * (out + out.conj().T)


def channel_apply(kind, rho_1, rho_2, output_cutoff=None, budget=DEFICIT_BUDGET):
    """Output state of mode 1 after the two-mode unitary and a trace over mode 2.

    Parameters
    ----------
    kind : TwoModeUnitary or (name, parameter)
    rho_1, rho_2 : FockState
        Signal and ancilla inputs.
    output_cutoff : int, optional
        Fixed output cutoff. By default the beam-splitter output uses the exact
        photon-number bound and the squeezer output cutoff is doubled until the
        cropped mass is below a tenth of the budget.

    Raises
    ------
    TruncationError
        If the output trace deficit exceeds ``budget``.
    """
    u = _as_unitary(kind)
    if u.kind == "displacement":
        x = np.asarray(u.param)
        out = displaced(rho_1, x[:2]).rho * np.trace(rho_2.rho).real
        return _checked(FockState(out), budget)
    r1 = rho_1.rho[: _support(rho_1.rho), : _support(rho_1.rho)]
    r2 = rho_2.rho[: _support(rho_2.rho), : _support(rho_2.rho)]
    in_trace = np.trace(r1).real * np.trace(r2).real

    if output_cutoff is not None:
        return _checked(FockState(_apply_fixed(u, r1, r2, output_cutoff)), budget)
    if u.kind == "beam_splitter":
        cutoff = r1.shape[0] + r2.shape[0] - 1
        return _checked(FockState(_apply_fixed(u, r1, r2, cutoff)), budget)
    cutoff = max(DEFAULT_CUTOFF, r1.shape[0] + r2.shape[0])
    while True:
        out = FockState(_apply_fixed(u, r1, r2, cutoff))
        lost = in_trace - np.trace(out.rho).real
        if lost <= 0.1 * budget or cutoff >= MAX_OUTPUT_CUTOFF:
            return _checked(out, budget)
        cutoff *= 2


def _checked(state, budget):
    if state.trace_deficit > budget:
        raise TruncationError(
            f"trace deficit {state.trace_deficit:.3e} exceeds budget {budget:.1e}"
        )
    return state


def qepi_spot_check(kind, rho_1, rho_2, tol=ORACLE_TOL_RATE):
    """qEPI rate for one mode (n = 1, K = 2) computed entirely in Fock space."""
    u = _as_unitary(kind)
    for r in (rho_1, rho_2):
        if not r.trusted:
            raise TruncationError(f"input trace deficit {r.trace_deficit:.3e} over budget")
    out = channel_apply(u, rho_1, rho_2)
    s1, s2 = von_neumann_entropy(rho_1), von_neumann_entropy(rho_2)
    return make_report(u.lambdas, (s1, s2), von_neumann_entropy(out), 1, tol=tol)


def _edge_mass(rho, width=5):
    return float(np.max(np.abs(np.diag(rho)[-width:])))


def data_processing_check(kind, rho_1, rho_2, x1, x2, pad=20, edge_tol=1e-20, tol=ORACLE_TOL_RATE):
    """Relative entropy to a displaced copy before and after the channel.

    Compares ``S(rho_1 || D rho_1 D^dag) + S(rho_2 || D rho_2 D^dag)`` with
    ``S(rho_Y || D_{M_1 x1 + M_2 x2} rho_Y D^dag)``. The output basis is grown
    until its top levels carry less than ``edge_tol``, and displaced copies live
    in a basis ``pad`` levels larger, so truncation does not fake a support
    mismatch. Returns ``(before, after, satisfied)``.
    """
    u = _as_unitary(kind)
    x1, x2 = np.asarray(x1, dtype=float), np.asarray(x2, dtype=float)
    before = sum(
        relative_entropy(r, displaced(r, x, r.cutoff + pad)) for r, x in ((rho_1, x1), (rho_2, x2))
    )
    out = channel_apply(u, rho_1, rho_2)
    cutoff = out.cutoff
    while _edge_mass(out.rho) > edge_tol and cutoff < MAX_OUTPUT_CUTOFF:
        cutoff = min(2 * cutoff, MAX_OUTPUT_CUTOFF)
        out = channel_apply(u, rho_1, rho_2, output_cutoff=cutoff)
    m1, m2 = u.blocks
    after = relative_entropy(out, displaced(out, m1 @ x1 + m2 @ x2, out.cutoff + pad))
    return before, after, bool(after <= before + tol)


def fisher_finite_difference(state, step=1e-2):
    """Hessian at ``x = 0`` of ``S(rho || D_x rho D_x^dag)`` by central differences."""
    if not state.trusted:
        raise TruncationError("state trace deficit over budget")

    def f(x):
        return relative_entropy(state, displaced(state, x))

    h = step
    e = np.eye(2)
    f0 = f(np.zeros(2))
    j = np.empty((2, 2))
    for i in range(2):
        j[i, i] = (f(h * e[i]) - 2 * f0 + f(-h * e[i])) / h**2
    off = (
        f(h * (e[0] + e[1])) - f(h * (e[0] - e[1])) - f(h * (e[1] - e[0])) + f(-h * (e[0] + e[1]))
    ) / (4 * h**2)
    j[0, 1] = j[1, 0] = off
    return FisherMatrix(j)
