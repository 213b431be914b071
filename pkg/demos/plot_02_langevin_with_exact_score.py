"""
Annealed Langevin sampling with an exact prior score
====================================================

Before trusting a learned score, check the sampler with the exact one. If
every column is Gaussian, the score of the noise-perturbed prior is known in
closed form, and the posterior mean is the linear MMSE estimate. The sampler
should therefore land on MMSE.
"""

import numpy as np

from ambc_score import (
    AlsConfig,
    AnalyticGaussianScore,
    FadingConfig,
    PriorSpec,
    build_pilots,
    als_estimate,
    als_sample,
    derive_rng,
    mmse_estimate,
    simulate_observation,
)
from ambc_score.bench import nmse_per_link
from ambc_score.channel import column_variances, sample_gaussian_surrogate
from ambc_score.score import make_schedule

fading = FadingConfig(M=8, K=3, alpha=0.6)
r = column_variances(fading)
H = sample_gaussian_surrogate(fading, 2000, derive_rng(1, "channel"))

###############################################################################
# The step size shrinks with the noise level, ``beta_t = beta0 sigma_t^2 /
# sigma_T^2``. Scaling ``beta0`` by the LS error variance keeps it stable across
# SNR: the likelihood curvature is ``p_p tau / sigma^2``.

schedule = make_schedule(0.01, 1.0, 20)
for snr_db in (0, 10, 20):
    pilots = build_pilots(3, 4, p_p=10 ** (snr_db / 10))
    Y = simulate_observation(H, pilots, 1.0, derive_rng(1, "noise", snr_db))
    cfg = AlsConfig(beta0=1.9 / (pilots.p_p * pilots.tau), zeta=1e-4, n_steps=6,
                    schedule=schedule, score=AnalyticGaussianScore(r))
    als = nmse_per_link(H, als_estimate(Y, pilots, 1.0, cfg, derive_rng(1, "langevin", snr_db)))
    mm = nmse_per_link(H, mmse_estimate(Y, pilots, PriorSpec(r), 1.0))
    print(f"{snr_db:3d} dB  ALS {als.mean():.5f}  MMSE {mm.mean():.5f}  "
          f"ratio {als.mean() / mm.mean():.4f}")

###############################################################################
# Too large a step makes the iteration unstable. The harness flags such trials
# instead of averaging them in.

pilots = build_pilots(3, 4, p_p=10.0)
Y = simulate_observation(H[:10], pilots, 1.0, derive_rng(2, "noise"))
cfg = AlsConfig(beta0=1e5 / (pilots.p_p * pilots.tau), zeta=1e-4, n_steps=6, schedule=schedule,
                score=AnalyticGaussianScore(r))
_, diverged = als_sample(Y, pilots, 1.0, cfg, np.random.default_rng(0), on_diverge="mask")
print("diverged trials with beta0 = 1e5 x LS variance:", int(diverged.sum()), "of", len(diverged))
