"""Ground-truth direct and cascaded channels for an ambient backscatter link."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .numerics import sample_complex_gaussian, sample_nakagami_vector

RAYLEIGH = "rayleigh"
NAKAGAMI = "nakagami"


@dataclass(frozen=True)
class FadingConfig:
    """Fading law and geometry shared by every link.

    All three link types (direct ``h0``, forward ``f_k``, backscatter
    ``g_k``) use the same law and per-element variance.
    """

    M: int = 8
    K: int = 3
    alpha: tuple = 0.6
    distribution: str = RAYLEIGH
    m_shape: float = 1.0
    per_element_variance: float = 1.0

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.broadcast_to(self.alpha, (self.K,)))
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "distribution", self.distribution.lower())
        if self.M < 1 or self.K < 0:
            raise ValueError(f"need M >= 1 and K >= 0, got M={self.M}, K={self.K}")
        if any(not 0.0 < a <= 1.0 for a in alpha):
            raise ValueError(f"reflection factors must lie in (0, 1], got {alpha}")
        if self.distribution not in (RAYLEIGH, NAKAGAMI):
            raise ValueError(f"unknown fading law {self.distribution!r}")
        if self.distribution == NAKAGAMI and self.m_shape < 0.5:
            raise ValueError(f"Nakagami shape must be >= 0.5, got {self.m_shape}")
        if self.per_element_variance <= 0:
            raise ValueError("per_element_variance must be > 0")


@dataclass(frozen=True)
class ChannelSet:
    """One channel realization (or a batch of them along leading axes).

    ``h0`` is ``(..., M, 1)``, ``f`` is ``(..., 1, K)`` and ``g`` is
    ``(..., M, K)``.
    """

    h0: np.ndarray
    f: np.ndarray
    g: np.ndarray
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def M(self):
        return self.h0.shape[-2]

    @property
    def K(self):
        return self.g.shape[-1]


def _draw(config, rows, cols, rng, batch):
    if config.distribution == RAYLEIGH:
        return sample_complex_gaussian(rows, cols, config.per_element_variance, rng, batch)
    v = sample_nakagami_vector(config.m_shape, config.per_element_variance, rows * cols, rng, batch)
    return v.reshape(*tuple(batch), rows, cols)


def sample_channel_set(config: FadingConfig, rng, batch=()) -> ChannelSet:
    """Draw independent ``h0``, ``f`` and ``g`` from the configured law."""
    h0 = _draw(config, config.M, 1, rng, batch)
    f = _draw(config, 1, config.K, rng, batch)
    g = _draw(config, config.M, config.K, rng, batch)
    return ChannelSet(h0=h0, f=f, g=g, alpha=np.asarray(config.alpha, dtype=float))


def assemble_hbar(ch: ChannelSet) -> np.ndarray:
    """Effective channel ``[h0, sqrt(a_1) f_1 g_1, ..., sqrt(a_K) f_K g_K]``."""
    alpha = np.asarray(ch.alpha, dtype=float)
    if alpha.shape != (ch.K,):
        raise ValueError(f"need {ch.K} reflection factors, got shape {alpha.shape}")
    cascaded = np.sqrt(alpha) * ch.f * ch.g
    return np.concatenate([ch.h0, cascaded], axis=-1)


def sample_hbar(config: FadingConfig, n, rng) -> np.ndarray:
    """``n`` effective channel matrices, shape ``(n, M, K+1)``."""
    return assemble_hbar(sample_channel_set(config, rng, batch=(n,)))


def column_variances(config: FadingConfig) -> np.ndarray:
    """Per-element second moment of each column of the effective channel."""
    v = config.per_element_variance
    return np.array([v] + [a * v * v for a in config.alpha])


def sample_gaussian_surrogate(config: FadingConfig, n, rng) -> np.ndarray:
    """``n`` matrices whose column k is CN(0, r_k I) with the true second moments.

    This is the matched-Gaussian model under which the linear MMSE estimator
    is the exact posterior mean.
    """
    r = column_variances(config)
    return sample_complex_gaussian(config.M, config.K + 1, 1.0, rng, batch=(n,)) * np.sqrt(r)
