"""Non-Gaussian spot checks in a truncated Fock basis."""

import numpy as np

from qepi_lab import FockState, channel_apply, entropy, gaussianize, qepi_spot_check, von_neumann_entropy
from qepi_lab.corpus import load_corpus
from qepi_lab.fock_oracle import moments

one, vac = FockState.fock(1), FockState.vacuum()

out = channel_apply(("beam_splitter", 0.5), one, vac)
print("|1>|0> through 50:50 BS: populations", np.round(np.diag(out.rho).real[:3], 12),
      " S =", von_neumann_entropy(out))

out = channel_apply(("two_mode_squeezer", 2.0), vac, vac)
mean, cov = moments(out)
print("vacua through amplifier k=2: covariance\n", np.round(cov, 9), "\n S =", von_neumann_entropy(out))

# Cat states are far from Gaussian; the qEPI still holds with margin.
cat = FockState.coherent_superposition([1.5, -1.5], [1, 1])
for kind, param in [("beam_splitter", 0.5), ("two_mode_squeezer", 1.5)]:
    rep = qepi_spot_check((kind, param), cat, cat)
    y = channel_apply((kind, param), cat, cat)
    print(f"cat (x) cat via {kind}({param}): rate {rep.rate:.6f}, "
          f"S_Y {von_neumann_entropy(y):.5f} <= Gaussianized {entropy(gaussianize(moments(y))):.5f}")

corpus = load_corpus()
rates = [qepi_spot_check(u, corpus.states[a], corpus.states[b]).rate for a, b, u in list(corpus.cases())[:40]]
print(f"first 40 corpus cases: max rate {max(rates):.6f}")
