"""Posterior channel estimation by annealed Langevin sampling.

Gradients follow the conjugate-Wirtinger convention used by the score
network: for a complex Gaussian CN(mu, v) the gradient of the log-density
is ``-(h - mu) / v``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import sample_complex_gaussian
from .pilots import PilotSet
from .score.nets import analytic_gaussian_score
from .score.schedule import NoiseSchedule


class SamplingDiverged(FloatingPointError):
    def __init__(self, t, n):
        super().__init__(
            f"Langevin iterate became non-finite at scale t={t}, step n={n}; "
            "try a smaller beta0"
        )
        self.t, self.n = t, n


class AnalyticGaussianScore:
    """Score of CN(0, r_k I) columns perturbed by CN(0, sigma^2 I)."""

    def __init__(self, r):
        self.r = np.asarray(r, dtype=np.float64)

    def __call__(self, h, sigma):
        return analytic_gaussian_score(h, self.r, sigma)


class ZeroScore:
    """Flat prior: the sampler follows the likelihood alone."""

    def __call__(self, h, sigma):
        return np.zeros_like(h)


@dataclass(frozen=True)
class AlsConfig:
    beta0: float
    zeta: float
    n_steps: int
    schedule: NoiseSchedule
    score: object

    def __post_init__(self):
        if not self.beta0 > 0:
            raise ValueError(f"beta0 must be > 0, got {self.beta0}")
        if self.zeta < 0:
            raise ValueError(f"zeta must be >= 0, got {self.zeta}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    def step_sizes(self):
        """``beta_t = beta0 sigma_t^2 / sigma_T^2`` for t = 1..T."""
        sig = np.asarray(self.schedule.sigmas)
        return self.beta0 * sig**2 / sig[-1] ** 2


def likelihood_grad(Y, h_hat, pilots: PilotSet, sigma2):
    """Gradient of ``log p(Y | H)``: ``sqrt(p_p)/sigma2 (Y - sqrt(p_p) H C S)(C S)^H``."""
    if not sigma2 > 0:
        raise ValueError(f"likelihood needs sigma2 > 0, got {sigma2}")
    CS = pilots.CS
    if h_hat.shape[-1] != CS.shape[0] or np.shape(Y)[-1] != CS.shape[1]:
        raise ValueError("observation, estimate and pilots have inconsistent shapes")
    sp = np.sqrt(pilots.p_p)
    resid = Y - sp * (h_hat @ CS)
    return (sp / sigma2) * (resid @ CS.conj().T)


def posterior_grad(Y, h_hat, pilots, sigma2, score, sigma_t):
    """Likelihood gradient plus prior score; the evidence term has zero gradient."""
    return likelihood_grad(Y, h_hat, pilots, sigma2) + score(h_hat, sigma_t)


def als_sample(Y, pilots, sigma2, cfg: AlsConfig, rng, on_diverge="raise"):
    """Run annealed Langevin sampling on one or many observations.

    ``Y`` has shape ``(..., M, tau)``. Scales are visited from the largest to
    the smallest; the last iterate at one scale seeds the next.

    With ``on_diverge="mask"`` non-finite trials are carried as NaN instead of
    raising, and the boolean mask of diverged trials is returned alongside.
    """
    Y = np.asarray(Y)
    M, L = Y.shape[-2], pilots.K + 1
    lead = Y.shape[:-2]
    sigmas = np.asarray(cfg.schedule.sigmas)
    betas = cfg.step_sizes()
    h = sample_complex_gaussian(M, L, sigmas[-1] ** 2, rng, batch=lead)
    diverged = np.zeros(lead, dtype=bool)
    with np.errstate(over="ignore", invalid="ignore"):
        for t in range(len(sigmas) - 1, -1, -1):
            beta, sig = betas[t], sigmas[t]
            noise_std = np.sqrt(2.0 * beta * cfg.zeta)
            for n in range(1, cfg.n_steps + 1):
                z = sample_complex_gaussian(M, L, 1.0, rng, batch=lead)
                grad = posterior_grad(Y, h, pilots, sigma2, cfg.score, sig)
                h = h + beta * grad + noise_std * z
                bad = ~np.isfinite(h).all(axis=(-2, -1))
                if bad.any():
                    if on_diverge == "raise":
                        raise SamplingDiverged(t + 1, n)
                    diverged |= bad
                    h = np.where(diverged[..., None, None], np.nan, h)
    if on_diverge == "raise":
        return h
    return h, diverged


def als_estimate(Y, pilots, sigma2, cfg: AlsConfig, rng):
    """Channel estimate from the final Langevin iterate; raises on divergence."""
    return als_sample(Y, pilots, sigma2, cfg, rng, on_diverge="raise")
