"""Weighted denoising score matching and least-squares GAN objectives.

All losses operate on real/imag stacked batches and come in two flavours:
``*_loss`` returns the scalar value, ``*_loss_and_grad`` also returns the
parameter gradients computed by backpropagation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..numerics import sample_complex_gaussian, to_real


@dataclass
class Batch:
    """Clean channels, perturbed channels, the noise and its level, all real-stacked."""

    hbar: np.ndarray
    h_tilde: np.ndarray
    z: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        if len(self.sigma) == 0:
            raise ValueError("empty batch")

    def __len__(self):
        return len(self.sigma)


def perturb(hbar, sigma_t, rng):
    """Add CN(0, sigma_t^2 I) noise; returns ``(h_tilde, z)``.

    ``sigma_t`` may be a scalar or one level per leading batch entry.
    """
    hbar = np.asarray(hbar)
    sigma_t = np.asarray(sigma_t, dtype=np.float64)
    if np.any(sigma_t <= 0):
        raise ValueError("noise level must be > 0")
    z = sample_complex_gaussian(hbar.shape[-2], hbar.shape[-1], 1.0, rng, batch=hbar.shape[:-2])
    if sigma_t.ndim:
        z = z * sigma_t.reshape(sigma_t.shape + (1, 1))
    else:
        z = z * sigma_t
    return hbar + z, z


def make_batch(hbar, schedule, rng) -> Batch:
    """Perturb each channel at a level drawn uniformly from ``schedule``."""
    hbar = np.asarray(hbar)
    if hbar.ndim != 3 or len(hbar) == 0:
        raise ValueError(f"expected a non-empty (B, M, L) batch, got shape {hbar.shape}")
    idx = rng.integers(0, schedule.T, size=len(hbar))
    sigma = np.asarray(schedule.sigmas)[idx]
    h_tilde, z = perturb(hbar, sigma, rng)
    return Batch(to_real(hbar), to_real(h_tilde), to_real(z), sigma)


def _dsm_terms(s, batch, lam):
    sig2 = batch.sigma[:, None] ** 2
    resid = s + batch.z / sig2
    per_sample = 0.5 * lam * batch.sigma**2 * np.sum(resid**2, axis=1)
    dscore = lam * sig2 * resid / len(batch)
    return per_sample.mean(), dscore


def dsm_loss_and_grad(model, batch: Batch, lam):
    s, cache = model.forward_real(batch.h_tilde, batch.sigma)
    loss, dscore = _dsm_terms(s, batch, lam)
    grads, _ = model.backward_real(cache, dscore)
    return loss, grads


def dsm_loss(model, batch: Batch, lam) -> float:
    """Mean over the batch of ``(lam/2) sigma^2 ||s(h_tilde, sigma) + z/sigma^2||^2``."""
    s, _ = model.forward_real(batch.h_tilde, batch.sigma)
    return float(_dsm_terms(s, batch, lam)[0])


def denoise_real(model, batch: Batch):
    s, _ = model.forward_real(batch.h_tilde, batch.sigma)
    return batch.h_tilde + batch.sigma[:, None] ** 2 * s


def disc_loss_and_grad(disc, model, batch: Batch):
    q = denoise_real(model, batch)
    d_real, c_real = disc.forward_real(batch.hbar)
    d_fake, c_fake = disc.forward_real(q)
    loss = np.mean((d_real - 1.0) ** 2) + np.mean((d_fake + 1.0) ** 2)
    B = len(batch)
    g_real, _ = disc.backward_real(c_real, 2.0 * (d_real - 1.0) / B)
    g_fake, _ = disc.backward_real(c_fake, 2.0 * (d_fake + 1.0) / B)
    return float(loss), {k: g_real[k] + g_fake[k] for k in g_real}


def disc_loss(disc, model, batch: Batch) -> float:
    """LSGAN discriminator objective, written as a quantity to minimize.

    Real channels are pushed to +1 and Empirical-Bayes denoised ones to -1.
    """
    q = denoise_real(model, batch)
    d_real, _ = disc.forward_real(batch.hbar)
    d_fake, _ = disc.forward_real(q)
    return float(np.mean((d_real - 1.0) ** 2) + np.mean((d_fake + 1.0) ** 2))


def gen_loss_and_grad(model, disc, batch: Batch, lam):
    """Generator objective and its gradient w.r.t. the score parameters only.

    Returns ``(loss, grads, (adv, dsm))``; the discriminator is held fixed.
    """
    s, cache = model.forward_real(batch.h_tilde, batch.sigma)
    sig2 = batch.sigma[:, None] ** 2
    q = batch.h_tilde + sig2 * s
    d, c_disc = disc.forward_real(q)
    adv = float(np.mean((d - 1.0) ** 2))
    _, dq = disc.backward_real(c_disc, 2.0 * (d - 1.0) / len(batch))
    dsm, dscore = _dsm_terms(s, batch, lam)
    grads, _ = model.backward_real(cache, dscore + sig2 * dq)
    return adv + float(dsm), grads, (adv, float(dsm))


def gen_loss(model, disc, batch: Batch, lam) -> float:
    s, _ = model.forward_real(batch.h_tilde, batch.sigma)
    q = batch.h_tilde + batch.sigma[:, None] ** 2 * s
    d, _ = disc.forward_real(q)
    return float(np.mean((d - 1.0) ** 2) + _dsm_terms(s, batch, lam)[0])
