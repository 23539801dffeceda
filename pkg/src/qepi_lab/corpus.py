"""Loading of the JSON state corpus used for Fock-space qEPI spot checks.

A corpus document looks like::

    {
      "schema": 1,
      "cutoff": 40,
      "channels": [{"kind": "beam_splitter", "param": 0.5}, ...],
      "states": [{"name": "fock_1", "kind": "fock", "parameters": {"n": 1}}, ...],
      "pairs": [["fock_1", "vacuum"], ...]
    }

State kinds: ``fock`` (``n``), ``coherent_superposition`` (``amplitudes``,
``coefficients``; complex numbers as ``[re, im]``), ``mixture`` (``components``
given as state names or inline ``{kind, parameters}``, plus ``weights``),
``thermal`` (``nu``) and ``gaussian`` (``mean``, ``cov``).
"""

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .fock_oracle import DEFAULT_CUTOFF, FockState, TwoModeUnitary

CORPUS_SCHEMA = 1


def default_corpus_path():
    return Path(str(resources.files("qepi_lab") / "data" / "fock_corpus.json"))


def default_regression_path():
    return Path(str(resources.files("qepi_lab") / "data" / "fock_regression.json"))


def _complex(v):
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def build_state(spec, cutoff=DEFAULT_CUTOFF, named=None):
    """Construct a :class:`FockState` from a ``{kind, parameters}`` spec."""
    if isinstance(spec, str):
        if named is None or spec not in named:
            raise KeyError(f"unknown state reference {spec!r}")
        return named[spec]
    kind = spec["kind"]
    par = spec.get("parameters", {})
    if kind == "fock":
        return FockState.fock(int(par["n"]), cutoff)
    if kind == "coherent_superposition":
        amps = [_complex(a) for a in par["amplitudes"]]
        coefs = [_complex(c) for c in par["coefficients"]]
        return FockState.coherent_superposition(amps, coefs, cutoff)
    if kind == "mixture":
        comps = [build_state(c, cutoff, named) for c in par["components"]]
        return FockState.mixture(comps, par["weights"])
    if kind == "thermal":
        return FockState.thermal(float(par["nu"]), cutoff)
    if kind == "gaussian":
        return FockState.gaussian(par["mean"], par["cov"], cutoff)
    raise ValueError(f"unknown state kind {kind!r}")


@dataclass(frozen=True)
class Corpus:
    states: dict
    pairs: tuple
    channels: tuple
    cutoff: int

    def cases(self):
        """Yield ``(pair_name_1, pair_name_2, unitary)`` for every pair and channel."""
        for a, b in self.pairs:
            for ch in self.channels:
                yield a, b, ch


def load_corpus(path=None):
    path = default_corpus_path() if path is None else Path(path)
    with open(path) as fh:
        doc = json.load(fh)
    if doc.get("schema") != CORPUS_SCHEMA:
        raise ValueError(f"unsupported corpus schema {doc.get('schema')!r}")
    cutoff = int(doc.get("cutoff", DEFAULT_CUTOFF))
    named = {}
    for entry in doc["states"]:
        named[entry["name"]] = build_state(entry, cutoff, named)
    pairs = tuple((a, b) for a, b in doc["pairs"])
    for a, b in pairs:
        if a not in named or b not in named:
            raise KeyError(f"pair ({a}, {b}) references an unknown state")
    channels = tuple(TwoModeUnitary(c["kind"], c["param"]) for c in doc["channels"])
    return Corpus(states=named, pairs=pairs, channels=channels, cutoff=cutoff)


def case_key(a, b, unitary):
    return f"{a}|{b}|{unitary.kind}:{unitary.param:g}"
