"""Command-line harness: ``qepi-lab {verify-qepi,flow-trace,scaling,fock-corpus}``.

Exit codes: 0 pass, 1 inequality violation, 2 usage/config error,
3 solver or truncation failure. Any nonzero exit writes a diagnostic JSON next
to the output file (``<out>.diagnostic.json``) or to stderr when writing to
stdout. ``QEPI_LAB_LOG`` sets the log level.
"""

import argparse
import csv
import io
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .corpus import load_corpus
from .errors import QepiLabError, SolverOverflow, TruncationError
from .flow import entropy_power, integrate_flow, scaling_fit
from .fock_oracle import moments as fock_moments
from .fock_oracle import ORACLE_TOL_RATE, channel_apply, von_neumann_entropy
from .gaussian_state import GaussianState, entropy, gaussianize
from .mixing import ProductGaussianInput, amplifier, beam_splitter, random_mixing, saturating_family
from .qepi_check import hessian_data_processing_check, make_report, qepi_rate, stam_check
from .symplectic_core import random_covariance

log = logging.getLogger("qepi_lab")

SCHEMA_VERSION = 1
EXIT_OK, EXIT_VIOLATION, EXIT_CONFIG, EXIT_SOLVER = 0, 1, 2, 3

VERIFY_COLUMNS = [
    "trial", "seed", "n", "k", "rate", "qepi_ok", "hessian_min_eig", "hessian_ok",
    "stam_lhs", "stam_rhs", "stam_ok", "sandwich_consistent",
]
SCALING_COLUMNS = ["t", "exp_S_over_n"]
CORPUS_COLUMNS = [
    "state_1", "state_2", "channel", "param", "S_1", "S_2", "S_Y", "S_Y_gaussian",
    "rate", "qepi_ok", "extremal_ok", "trace_deficit",
]


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


# -- output helpers ------------------------------------------------------------

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def _jsonable(v):
    if isinstance(v, (np.bool_,)):
        return bool(v)
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    return v


def render(command, config, columns, rows, summary, fmt, timestamp, footer=None):
    """Serialize a result table as CSV (schema header row first) or JSON."""
    stamp = datetime.now(timezone.utc).isoformat(timespec="seconds") if timestamp else None
    if fmt == "json":
        doc = {
            "schema": SCHEMA_VERSION,
            "command": command,
            "config": config,
            "columns": columns,
            "rows": [dict(zip(columns, map(_jsonable, r))) for r in rows],
            "summary": {k: _jsonable(v) for k, v in summary.items()},
        }
        if stamp:
            doc["generated"] = stamp
        return json.dumps(doc, sort_keys=True, indent=1) + "\n"
    buf = io.StringIO()
    buf.write(f"# qepi-lab {command} schema {SCHEMA_VERSION}\n")
    if stamp:
        buf.write(f"# generated {stamp}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([_fmt(v) for v in r])
    if footer:
        buf.write(footer + "\n")
    return buf.getvalue()


def _write(out, text):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _sidecar(out, suffix):
    return None if out in (None, "-") else f"{out}.{suffix}"


def write_diagnostic(out, code, message, **extra):
    doc = {"exit_code": code, "message": message, **extra}
    text = json.dumps(doc, sort_keys=True, indent=1, default=_jsonable) + "\n"
    path = _sidecar(out, "diagnostic.json")
    if path is None:
        sys.stderr.write(text)
    else:
        Path(path).write_text(text)
    return path


# -- verify-qepi ---------------------------------------------------------------

def _random_instance(n, k, seed, scale, nu_max, temperature):
    rng = np.random.default_rng(seed)
    m = random_mixing(n, k, rng, scale)
    if temperature is None:
        states = tuple(
            GaussianState.from_cov(random_covariance(n, rng, (1.0 + 1e-3, nu_max), scale))
            for _ in range(k)
        )
        inputs = ProductGaussianInput(states)
    else:
        inputs = saturating_family(m, rng.uniform(1.0, 2.0, size=k), temperature)
    return m, inputs


def _verify_trial(args):
    trial, seed, n, k, scale, nu_max, temperature = args
    m, inputs = _random_instance(n, k, seed, scale, nu_max, temperature)
    rep = qepi_rate(m, inputs)
    min_eig, h_ok = hessian_data_processing_check(m, inputs)
    lhs, rhs, s_ok = stam_check(m, inputs)
    consistent = s_ok or not h_ok
    return [trial, seed, n, k, rep.rate, rep.satisfied, min_eig, h_ok, lhs, rhs, s_ok, consistent]


def violation_bundle(n, k, seed, scale, nu_max, temperature):
    m, inputs = _random_instance(n, k, seed, scale, nu_max, temperature)
    return {
        "seed": seed,
        "scale": scale,
        "nu_max": nu_max,
        "temperature": temperature,
        "mixing": m.to_dict(),
        "covariances": [s.sigma.tolist() for s in inputs.states],
        "means": [s.mean.tolist() for s in inputs.states],
    }


def cmd_verify_qepi(cfg):
    if cfg.trials < 1:
        raise ConfigError("--trials must be >= 1")
    if cfg.n < 1 or cfg.k < 1:
        raise ConfigError("--n and --k must be >= 1")
    if cfg.temperature is not None and cfg.temperature < 1:
        raise ConfigError("--temperature must be >= 1")
    tasks = [
        (i, cfg.seed + i, cfg.n, cfg.k, cfg.scale, cfg.nu_max, cfg.temperature)
        for i in range(cfg.trials)
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(cfg.jobs) as pool:
            rows = list(pool.map(_verify_trial, tasks, chunksize=64))
    else:
        rows = [_verify_trial(t) for t in tasks]
    rows.sort(key=lambda r: r[0])
    bad = [r for r in rows if not (r[5] and r[7] and r[10] and r[11])]
    summary = {
        "trials": len(rows),
        "violations": len(bad),
        "max_rate": max(r[4] for r in rows),
    }
    config = {k: getattr(cfg, k) for k in ("seed", "n", "k", "trials", "scale", "nu_max", "temperature")}
    _write(cfg.out, render("verify-qepi", config, VERIFY_COLUMNS, rows, summary, cfg.format, cfg.timestamp))
    if bad:
        bundle = [violation_bundle(cfg.n, cfg.k, r[1], cfg.scale, cfg.nu_max, cfg.temperature) for r in bad]
        path = _sidecar(cfg.out, "violations.json")
        if path:
            Path(path).write_text(json.dumps(bundle, sort_keys=True) + "\n")
        write_diagnostic(cfg.out, EXIT_VIOLATION, f"{len(bad)} violating trials",
                         violation_bundle=path, trials=[r[0] for r in bad])
        return EXIT_VIOLATION
    log.info("verify-qepi: %d trials, max rate %.12f", len(rows), summary["max_rate"])
    return EXIT_OK


# -- flow-trace ----------------------------------------------------------------

def _flow_setup(cfg):
    rng = np.random.default_rng(cfg.seed)
    if cfg.channel == "beam-splitter":
        m = beam_splitter(cfg.n, 0.5 if cfg.param is None else cfg.param)
    elif cfg.channel == "amplifier":
        m = amplifier(cfg.n, 2.0 if cfg.param is None else cfg.param)
    else:
        m = random_mixing(cfg.n, cfg.k, rng, cfg.scale)
    if cfg.inputs == "vacuum":
        states = tuple(GaussianState.vacuum(cfg.n) for _ in range(m.k))
    else:
        states = tuple(
            GaussianState.from_cov(random_covariance(cfg.n, rng, (1.0, cfg.nu_max), cfg.scale))
            for _ in range(m.k)
        )
    return m, ProductGaussianInput(states)


def _trace_text(cfg, trace, verdict):
    rows = list(trace.rows())
    summary = dict(verdict, solver_stats=trace.solver_stats)
    footer = "# verdict " + " ".join(f"{k}={_fmt(v)}" for k, v in verdict.items())
    config = {k: getattr(cfg, k) for k in ("seed", "n", "k", "channel", "param", "inputs", "tau_max", "samples", "t_y_target")}
    return render("flow-trace", config, trace.columns(), rows, summary, cfg.format, cfg.timestamp, footer)


def cmd_flow_trace(cfg):
    if not cfg.tau_max > 0:
        raise ConfigError("--tau-max must be positive")
    if cfg.samples < 2:
        raise ConfigError("--samples must be >= 2")
    try:
        m, inputs = _flow_setup(cfg)
    except QepiLabError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        trace = integrate_flow(m, inputs, cfg.tau_max, cfg.samples, stop_at_t_y=cfg.t_y_target)
    except SolverOverflow as exc:
        if exc.partial is not None:
            _write(cfg.out, _trace_text(cfg, exc.partial, {"monotone": exc.partial.is_monotone(), "overflow": True}))
        write_diagnostic(cfg.out, EXIT_SOLVER, str(exc))
        return EXIT_SOLVER
    rates = trace.rates
    verdict = {
        "monotone": trace.is_monotone(cfg.slack),
        "min_step": float(np.min(np.diff(rates))),
        "final_rate": float(rates[-1]),
        "final_t_Y": trace.samples[-1].t_y,
    }
    _write(cfg.out, _trace_text(cfg, trace, verdict))
    log.info("flow-trace verdict: %s", verdict)
    if not verdict["monotone"]:
        write_diagnostic(cfg.out, EXIT_VIOLATION, "rate decreased beyond slack", **verdict)
        return EXIT_VIOLATION
    return EXIT_OK


# -- scaling -------------------------------------------------------------------

def cmd_scaling(cfg):
    if not 0 < cfg.t_min < cfg.t_max or cfg.t_max / cfg.t_min < 100:
        raise ConfigError("need 0 < --t-min and --t-max / --t-min >= 100")
    if cfg.points < 10:
        raise ConfigError("--points must be >= 10")
    rng = np.random.default_rng(cfg.seed)
    sigma = random_covariance(cfg.n, rng, (1.0, cfg.nu_max), cfg.scale)
    if cfg.gamma == "identity":
        gamma = np.eye(2 * cfg.n)
    else:
        gamma = random_mixing(cfg.n, 2, rng, cfg.scale).gammas[0]
    ts = np.geomspace(cfg.t_min, cfg.t_max, cfg.points)
    e_s = entropy_power(sigma, gamma, ts)
    fit = scaling_fit(ts, e_s)
    lower = ts <= cfg.t_max / 10.0
    fit_lo = scaling_fit(ts[lower], e_s[lower]) if cfg.t_max / 10.0 / cfg.t_min >= 100 else None
    expected = np.linalg.det(gamma) ** (1.0 / (2 * cfg.n)) * np.e / 2.0
    rel = abs(fit.slope - expected) / expected
    summary = {
        "slope": fit.slope,
        "expected_slope": expected,
        "relative_error": rel,
        "intercept": fit.intercept,
        "max_residual": fit.max_residual,
        "max_residual_previous_decade": None if fit_lo is None else fit_lo.max_residual,
    }
    rows = [[t, e] for t, e in zip(ts, e_s)]
    footer = "# verdict " + " ".join(f"{k}={_fmt(v)}" for k, v in summary.items())
    config = {k: getattr(cfg, k) for k in ("seed", "n", "gamma", "t_min", "t_max", "points")}
    _write(cfg.out, render("scaling", config, SCALING_COLUMNS, rows, summary, cfg.format, cfg.timestamp, footer))
    if rel > cfg.rel_tol:
        write_diagnostic(cfg.out, EXIT_VIOLATION, "slope outside tolerance", **summary)
        return EXIT_VIOLATION
    return EXIT_OK


# -- fock-corpus ---------------------------------------------------------------

def corpus_rows(corpus):
    rows = []
    for a, b, u in corpus.cases():
        r1, r2 = corpus.states[a], corpus.states[b]
        for r in (r1, r2):
            if not r.trusted:
                raise TruncationError(f"input trace deficit {r.trace_deficit:.3e} over budget")
        out = channel_apply(u, r1, r2)
        s1, s2, s_y = von_neumann_entropy(r1), von_neumann_entropy(r2), von_neumann_entropy(out)
        rep = make_report(u.lambdas, (s1, s2), s_y, 1, tol=ORACLE_TOL_RATE)
        s_gauss = entropy(gaussianize(fock_moments(out)))
        rows.append([
            a, b, u.kind, u.param, s1, s2, s_y, s_gauss,
            rep.rate, rep.satisfied, s_y <= s_gauss + 1e-6, out.trace_deficit,
        ])
    return rows


def cmd_fock_corpus(cfg):
    path = cfg.fixtures
    if path is not None and not Path(path).is_file():
        raise ConfigError(f"fixture file not found: {path}")
    try:
        corpus = load_corpus(path)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot load fixture file: {exc}") from exc
    try:
        rows = corpus_rows(corpus)
    except TruncationError as exc:
        write_diagnostic(cfg.out, EXIT_SOLVER, str(exc))
        return EXIT_SOLVER
    bad = [r for r in rows if not (r[9] and r[10])]
    summary = {"cases": len(rows), "violations": len(bad), "max_rate": max(r[8] for r in rows)}
    config = {"fixtures": str(path) if path else "<bundled>"}
    _write(cfg.out, render("fock-corpus", config, CORPUS_COLUMNS, rows, summary, cfg.format, cfg.timestamp))
    if bad:
        write_diagnostic(cfg.out, EXIT_VIOLATION, f"{len(bad)} violating cases",
                         cases=[f"{r[0]}|{r[1]}|{r[2]}:{r[3]}" for r in bad])
        return EXIT_VIOLATION
    return EXIT_OK


# -- entry point -----------------------------------------------------------------

def build_parser():
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", default="-", help="output path ('-' for stdout)")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--no-timestamp", dest="timestamp", action="store_false")
    common.add_argument("--n", type=int, default=1)
    common.add_argument("--k", type=int, default=2)
    common.add_argument("--scale", type=float, default=0.3, help="random symplectic generator scale")
    common.add_argument("--nu-max", type=float, default=20.0)

    parser = _Parser(prog="qepi-lab", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("verify-qepi", parents=[common], help="random Gaussian qEPI / Stam sweep")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--temperature", type=float, default=None,
                   help="draw saturating-family inputs at this temperature")
    p.set_defaults(func=cmd_verify_qepi)

    p = sub.add_parser("flow-trace", parents=[common], help="integrate the rate flow")
    p.add_argument("--channel", choices=("beam-splitter", "amplifier", "random"), default="amplifier")
    p.add_argument("--param", type=float, default=None, help="lambda or kappa")
    p.add_argument("--inputs", choices=("vacuum", "random"), default="vacuum")
    p.add_argument("--tau-max", type=float, default=10.0)
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--t-y-target", type=float, default=None, help="stop once t_Y reaches this value")
    p.add_argument("--slack", type=float, default=1e-7)
    p.set_defaults(func=cmd_flow_trace)

    p = sub.add_parser("scaling", parents=[common], help="fit exp(S/n) against t")
    p.add_argument("--gamma", choices=("identity", "random"), default="identity")
    p.add_argument("--t-min", type=float, default=1.0)
    p.add_argument("--t-max", type=float, default=1e4)
    p.add_argument("--points", type=int, default=80)
    p.add_argument("--rel-tol", type=float, default=0.01)
    p.set_defaults(func=cmd_scaling)

    p = sub.add_parser("fock-corpus", parents=[common], help="qEPI on the non-Gaussian Fock corpus")
    p.add_argument("--fixtures", default=None, help="corpus JSON (default: bundled corpus)")
    p.set_defaults(func=cmd_fock_corpus)
    return parser


def _out_from_argv(argv):
    for i, a in enumerate(argv):
        if a == "--out" and i + 1 < len(argv):
            return argv[i + 1]
        if a.startswith("--out="):
            return a.split("=", 1)[1]
    return None


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    level = os.environ.get("QEPI_LAB_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(message)s")
    try:
        cfg = build_parser().parse_args(argv)
        if cfg.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        return cfg.func(cfg)
    except (SolverOverflow, TruncationError) as exc:
        sys.stderr.write(f"qepi-lab: solver failure: {exc}\n")
        write_diagnostic(_out_from_argv(argv), EXIT_SOLVER, str(exc))
        return EXIT_SOLVER
    except QepiLabError as exc:
        # invalid parameter combinations surface from the library as domain errors
        sys.stderr.write(f"qepi-lab: error: {exc}\n")
        write_diagnostic(_out_from_argv(argv), EXIT_CONFIG, str(exc))
        return EXIT_CONFIG
    except ConfigError as exc:
        sys.stderr.write(f"qepi-lab: error: {exc}\n")
        write_diagnostic(_out_from_argv(argv), EXIT_CONFIG, str(exc))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
