"""
Pilots, observations and the classical baselines
================================================

A reader with M antennas listens to an RF source and K backscatter tags.
Each tag sends one row of a Hadamard matrix, and the source itself is
treated as an extra tag with the all-ones row. This script builds the
pilots, simulates one received block and recovers the channels with least
squares and linear MMSE.
"""

import numpy as np

from ambc_score import (
    FadingConfig,
    PriorSpec,
    build_pilots,
    derive_rng,
    ls_estimate,
    mmse_estimate,
    sample_hbar,
    simulate_observation,
)
from ambc_score.bench import nmse_per_link
from ambc_score.classical import ls_nmse, mmse_nmse

# Three tags and a length-4 pilot: the first four rows of a 4x4 Hadamard matrix.
pilots = build_pilots(K=3, tau=4, p_p=10.0)
print("C =\n", pilots.C.real.astype(int))
print("C C^H =\n", (pilots.C @ pilots.C.conj().T).real.astype(int))

###############################################################################
# The effective channel stacks the direct link and the scaled cascaded links
# ``sqrt(alpha_k) f_k g_k``. Its columns are far from Gaussian: the product of
# two Gaussians has heavy tails.

fading = FadingConfig(M=8, K=3, alpha=0.6)
H = sample_hbar(fading, 5000, derive_rng(0, "channel"))
kurt = np.mean(np.abs(H) ** 4, axis=(0, 1)) / np.mean(np.abs(H) ** 2, axis=(0, 1)) ** 2
print("normalised fourth moment per column (2 for a complex Gaussian):", kurt.round(2))

###############################################################################
# Simulate observations at unit noise power and compare the estimators. LS
# inverts the pilots exactly; MMSE shrinks each column by r / (r + n).

Y = simulate_observation(H, pilots, 1.0, derive_rng(0, "noise"))
prior = PriorSpec.from_fading(fading)
for name, est in (("LS", ls_estimate(Y, pilots)),
                  ("MMSE", mmse_estimate(Y, pilots, prior, 1.0))):
    per_link = nmse_per_link(H, est)
    print(f"{name:5s} direct {per_link[:, 0].mean():.4f}  cascaded {per_link[:, 1:].mean():.4f}")

###############################################################################
# For the Gaussian direct link the averages agree with the closed forms for the
# per-trial ratio. Both carry a factor M / (M - 1) relative to the familiar
# ratio of expectations.

n = 1.0 / (pilots.p_p * pilots.tau)
print("closed form: LS", round(float(ls_nmse(1.0, n, 8)), 4),
      " MMSE", round(float(mmse_nmse(1.0, n, 8)), 4))
