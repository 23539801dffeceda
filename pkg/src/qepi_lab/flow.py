"""
Diffusive evolution of the inputs at covariance level and the reparametrized flow

    dt_a/dtau = exp(S_a(sigma_a + t_a gamma_a) / n),   t_a(0) = 0,

along which the qEPI rate is nondecreasing and tends to one.
"""

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DomainError, InsufficientRange, SolverOverflow
from .gaussian_state import entropy, entropy_h, fisher
from .mixing import apply, ProductGaussianInput
from .gaussian_state import GaussianState
from .qepi_check import rate_from_entropies
from .symplectic_core import symplectic_eigenvalues

ODE_TOL = 1e-8
T_CAP = 1e6
CSV_SCHEMA = "# qepi-lab flow-trace schema 1"


def diffuse(sigma, gamma, t):
    """Covariance after time ``t`` of the diffusion with noise matrix ``gamma``."""
    if t < 0:
        raise DomainError("diffusion time must be nonnegative")
    sigma = np.asarray(getattr(sigma, "sigma", sigma), dtype=float)
    return sigma + t * np.asarray(gamma, dtype=float)


@dataclass(frozen=True)
class FlowState:
    tau: float
    t_alphas: np.ndarray
    t_y: float
    sigmas: tuple = field(repr=False)
    sigma_y: np.ndarray = field(repr=False)
    s_alphas: np.ndarray
    s_y: float
    rate: float

    def consistency_residual(self, m):
        """Max deviation between ``sigma_y`` and ``sum M sigma_a(t_a) M^T``."""
        inputs = ProductGaussianInput(tuple(GaussianState.from_cov(s) for s in self.sigmas))
        return float(np.max(np.abs(apply(m, inputs).sigma - self.sigma_y)))


@dataclass(frozen=True)
class FlowTrace:
    samples: tuple
    solver_stats: dict
    interpolant: object = field(default=None, repr=False, compare=False)

    @property
    def taus(self):
        return np.array([s.tau for s in self.samples])

    @property
    def rates(self):
        return np.array([s.rate for s in self.samples])

    @property
    def k(self):
        return len(self.samples[0].t_alphas)

    def columns(self):
        k = self.k
        return (
            ["tau"]
            + [f"t_{a + 1}" for a in range(k)]
            + ["t_Y"]
            + [f"S_{a + 1}" for a in range(k)]
            + ["S_Y", "rate"]
        )

    def rows(self):
        for s in self.samples:
            yield [s.tau, *s.t_alphas, s.t_y, *s.s_alphas, s.s_y, s.rate]

    def to_csv(self, fh=None):
        out = fh if fh is not None else io.StringIO()
        out.write(CSV_SCHEMA + "\n")
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.columns())
        for row in self.rows():
            writer.writerow([repr(float(v)) for v in row])
        if fh is None:
            return out.getvalue()

    def to_json(self):
        cols = self.columns()
        doc = {
            "columns": cols,
            "samples": [dict(zip(cols, map(float, row))) for row in self.rows()],
            "solver_stats": self.solver_stats,
        }
        return json.dumps(doc, sort_keys=True)

    def is_monotone(self, slack=1e-7):
        return bool(np.all(np.diff(self.rates) >= -slack))


def _entropy_fn(sigma0, gamma, invertible):
    if not invertible:
        s0 = entropy(sigma0)
        return lambda t: s0
    return lambda t: entropy(sigma0 + t * gamma)


def integrate_flow(m, inputs, tau_max, sample_count=50, ode_tol=ODE_TOL, t_cap=T_CAP,
                   stop_at_t_y=None):
    """Integrate the flow with an adaptive Dormand-Prince 5(4) stepper in tau.

    Samples are taken on ``linspace(0, tau_max, sample_count)``. If
    ``stop_at_t_y`` is given, integration stops once ``t_Y`` reaches it and the
    samples are spread over ``[0, tau_stop]`` instead, ending exactly at the
    stopping point.

    Raises
    ------
    SolverOverflow
        If a local time exceeds ``t_cap``; ``exc.partial`` holds
        ``sample_count`` samples spread over ``[0, tau_overflow]``.
    """
    if tau_max <= 0:
        raise DomainError("tau_max must be positive")
    if sample_count < 2:
        raise DomainError("need at least two samples")
    if inputs.k != m.k or inputs.n != m.n:
        raise DomainError("input does not match channel")
    n, k = m.n, m.k
    sigma0 = [s.sigma for s in inputs.states]
    lam = np.array(m.lambdas)
    s_fns = [_entropy_fn(s, g, inv) for s, g, inv in zip(sigma0, m.gammas, m.invertible)]
    sigma_y0 = apply(m, inputs).sigma
    nfev = [0]

    def rhs(tau, t):
        nfev[0] += 1
        return np.array([np.exp(f(max(ta, 0.0)) / n) for f, ta in zip(s_fns, t)])

    def cap_event(tau, t):
        return t_cap - np.max(t)

    cap_event.terminal = True
    cap_event.direction = -1
    events = [cap_event]
    if stop_at_t_y is not None:
        def target_event(tau, t):
            return float(lam @ t) - stop_at_t_y

        target_event.terminal = True
        target_event.direction = 1
        events.append(target_event)

    grid = np.linspace(0.0, tau_max, sample_count)
    sol = solve_ivp(
        rhs, (0.0, tau_max), np.zeros(k), method="RK45", t_eval=grid,
        rtol=ode_tol, atol=ode_tol, events=events, dense_output=True,
    )
    overflow = len(sol.t_events[0]) > 0
    hit_target = stop_at_t_y is not None and len(sol.t_events[1]) > 0
    if (overflow or hit_target) and sol.sol is not None:
        # stopped early: spread the samples over [0, tau_stop] on the dense solution
        tau_stop = float(sol.t_events[0][0] if overflow else sol.t_events[1][0])
        taus = np.linspace(0.0, tau_stop, sample_count)
        ts = [sol.sol(tau) for tau in taus[:-1]]
        ts.append(sol.y_events[0][0] if overflow else sol.y_events[1][0])
    else:
        taus, ts = list(sol.t), [sol.y[:, i] for i in range(sol.y.shape[1])]

    def sample(tau, t):
        t = np.maximum(np.asarray(t, dtype=float), 0.0)
        sigmas = tuple(s + ta * g for s, ta, g in zip(sigma0, t, m.gammas))
        s_alphas = np.array([f(ta) for f, ta in zip(s_fns, t)])
        t_y = float(lam @ t)
        sigma_y = sigma_y0 + t_y * np.eye(2 * n)
        s_y = entropy(sigma_y)
        return FlowState(
            tau=float(tau), t_alphas=t, t_y=t_y, sigmas=sigmas, sigma_y=sigma_y,
            s_alphas=s_alphas, s_y=s_y, rate=rate_from_entropies(lam, s_alphas, s_y, n),
        )

    samples = tuple(sample(tau, t) for tau, t in zip(taus, ts))
    stats = {
        "status": int(sol.status),
        "nfev": int(nfev[0]),
        "steps": int(len(sol.sol.ts) - 1) if sol.sol is not None else 0,
        "ode_tol": ode_tol,
        "t_cap": t_cap,
    }
    trace = FlowTrace(samples=samples, solver_stats=stats, interpolant=sol.sol)
    if overflow:
        raise SolverOverflow(
            f"local time exceeded t_cap={t_cap:g} at tau={sol.t_events[0][0]:.6g}",
            partial=trace,
        )
    if not sol.success:
        raise SolverOverflow(f"ODE solver failed: {sol.message}", partial=trace)
    return trace


def entropy_derivative_check(m, inputs, trace, step=1e-3):
    """Largest relative mismatch between finite-difference and analytic entropy rates.

    Compares central differences of ``S_a(tau)`` and ``S_Y(tau)`` (through the
    dense ODE solution) with ``1/4 e^{S_a/n} tr(J_a gamma_a)`` and
    ``1/4 (sum lam_a e^{S_a/n}) tr J_Y``. Samples closer than ``step`` to the
    ends of the trace are skipped.
    """
    sol = trace.interpolant
    n = m.n
    lam = np.array(m.lambdas)
    sigma0 = [s.sigma for s in inputs.states]
    sigma_y0 = apply(m, inputs).sigma
    taus = trace.taus
    worst = 0.0

    def entropies(tau):
        t = np.maximum(sol(tau), 0.0)
        s_a = [entropy(s + ta * g) for s, ta, g in zip(sigma0, t, m.gammas)]
        return np.array(s_a), entropy(sigma_y0 + float(lam @ t) * np.eye(2 * n))

    for tau in taus:
        if tau - step <= 0 or tau + step > taus[-1]:
            continue
        sp_a, sp_y = entropies(tau + step)
        sm_a, sm_y = entropies(tau - step)
        fd_a = (sp_a - sm_a) / (2 * step)
        fd_y = (sp_y - sm_y) / (2 * step)
        t = np.maximum(sol(tau), 0.0)
        s_a, _ = entropies(tau)
        for a in range(m.k):
            if not m.invertible[a]:
                continue
            sig = sigma0[a] + t[a] * m.gammas[a]
            ana = 0.25 * np.exp(s_a[a] / n) * np.trace(fisher(sig).j @ m.gammas[a])
            worst = max(worst, abs(fd_a[a] - ana) / abs(ana))
        sig_y = sigma_y0 + float(lam @ t) * np.eye(2 * n)
        ana_y = 0.25 * float(lam @ np.exp(s_a / n)) * np.trace(fisher(sig_y).j)
        worst = max(worst, abs(fd_y - ana_y) / abs(ana_y))
    return worst


@dataclass(frozen=True)
class AsymptoticBounds:
    lower: float
    upper: float
    t1: float
    t2: float


def asymptotic_bounds(sigma, gamma, t):
    """Entropy sandwich for ``sigma + t gamma`` at large ``t``.

    ``t1 = 1/nu_min(gamma)`` is the least multiple making ``t1 gamma`` a valid
    covariance, ``t2 = lambda_max(sigma)/mu_min(gamma)`` guarantees
    ``sigma <= t2 gamma``. For ``t > 2 t1``::

        sum h((t - t1) nu_i) <= S(sigma + t gamma) <= sum h((t + t2) nu_i)

    with ``nu_i`` the symplectic eigenvalues of ``gamma``.
    """
    sigma = np.asarray(getattr(sigma, "sigma", sigma), dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    nus = symplectic_eigenvalues(gamma)
    t1 = 1.0 / nus[-1]
    if t <= 2.0 * t1:
        raise DomainError(f"bounds need t > 2*t1 = {2 * t1:.6g}, got t={t}")
    t2 = np.linalg.eigvalsh(sigma)[-1] / np.linalg.eigvalsh(gamma)[0]
    lower = float(np.sum(entropy_h((t - t1) * nus)))
    upper = float(np.sum(entropy_h((t + t2) * nus)))
    return AsymptoticBounds(lower=lower, upper=upper, t1=float(t1), t2=float(t2))


def entropy_power(sigma, gamma, ts):
    """``exp(S(sigma + t gamma)/n)`` for each ``t`` in ``ts``."""
    sigma = np.asarray(sigma, dtype=float)
    n = sigma.shape[0] // 2
    return np.array([np.exp(entropy(sigma + t * gamma) / n) for t in ts])


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    intercept: float
    max_residual: float


def scaling_fit(t, e_s):
    """Least-squares line through ``(t, exp(S/n))`` over the top decade of ``t``.

    The slope should approach ``(det gamma)^(1/2n) e/2``; the residual measures
    the bounded correction term.
    """
    t = np.asarray(t, dtype=float)
    e_s = np.asarray(e_s, dtype=float)
    t_lo, t_hi = np.min(t), np.max(t)
    if t_lo <= 0 or t_hi / t_lo < 100:
        raise InsufficientRange(f"need t_hi/t_lo >= 100, got {t_hi / max(t_lo, 1e-300):.3g}")
    top = t >= t_hi / 10.0
    if np.count_nonzero(top) < 3:
        raise InsufficientRange("need at least three samples in the top decade")
    slope, intercept = np.polyfit(t[top], e_s[top], 1)
    resid = e_s[top] - (slope * t[top] + intercept)
    return ScalingFit(float(slope), float(intercept), float(np.max(np.abs(resid))))
