"""Complex-matrix helpers and seeded random streams.

Complex matrices are plain ``numpy.complex128`` arrays. Leading axes are
treated as batch axes wherever that is cheap to support, so the same
helpers serve a single trial and a stack of Monte-Carlo trials.
"""

from __future__ import annotations

import zlib

import numpy as np

# Stream identifiers. Keeping them fixed means, e.g., changing the number of
# Langevin steps never perturbs the channel draws of a sweep.
PURPOSES = {
    "channel": 0,
    "noise": 1,
    "training": 2,
    "langevin": 3,
    "pilots": 4,
    "validation": 5,
    "init": 6,
}


def make_rng(seed: int) -> np.random.Generator:
    """Return a PCG64 generator seeded from a 64-bit integer."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))


def derive_rng(seed: int, purpose: str, *index: int) -> np.random.Generator:
    """Independent stream for ``purpose`` (and optional integer indices).

    Streams are derived through ``SeedSequence`` spawn keys, so they are
    reproducible across platforms and statistically independent of each other.
    """
    if purpose in PURPOSES:
        key = PURPOSES[purpose]
    else:
        key = 1000 + zlib.crc32(purpose.encode())
    ss = np.random.SeedSequence(int(seed), spawn_key=(key, *map(int, index)))
    return np.random.Generator(np.random.PCG64(ss))


def sample_complex_gaussian(rows, cols, variance, rng, batch=()):
    """Draw i.i.d. CN(0, variance) entries.

    Real and imaginary parts are independent N(0, variance/2).

    Parameters
    ----------
    rows, cols : int
        Matrix shape.
    variance : float
        Per-element variance, must be non-negative.
    rng : numpy.random.Generator
    batch : tuple of int, optional
        Leading batch shape.
    """
    if variance < 0:
        raise ValueError(f"variance must be >= 0, got {variance}")
    shape = (*tuple(batch), rows, cols)
    std = np.sqrt(variance / 2.0)
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return std * (re + 1j * im)


def sample_nakagami_vector(m_shape, spread, n, rng, batch=()):
    """Nakagami-m magnitudes with uniform phase, shape ``(*batch, n, 1)``.

    ``|x|^2`` is Gamma(m, spread/m), so ``E|x|^2 = spread``; m = 1 is Rayleigh.
    """
    if m_shape < 0.5:
        raise ValueError(f"Nakagami shape must be >= 0.5, got {m_shape}")
    if spread <= 0:
        raise ValueError(f"spread must be > 0, got {spread}")
    shape = (*tuple(batch), n, 1)
    power = rng.gamma(m_shape, spread / m_shape, size=shape)
    phase = rng.uniform(0.0, 2.0 * np.pi, size=shape)
    return np.sqrt(power) * np.exp(1j * phase)


def matmul(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim < 2 or b.ndim < 2 or a.shape[-1] != b.shape[-2]:
        raise ValueError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def hermitian(a):
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(np.asarray(a), -1, -2))


def frob_norm_sq(a, axis=(-2, -1)):
    """Sum of squared moduli over ``axis`` (the matrix axes by default)."""
    a = np.asarray(a)
    return np.sum(a.real**2 + a.imag**2, axis=axis)


def is_finite(a) -> bool:
    return bool(np.all(np.isfinite(a)))


def to_real(h):
    """Stack real and imaginary parts: ``(..., M, L)`` -> ``(..., 2*M*L)``."""
    h = np.asarray(h)
    lead = h.shape[:-2]
    flat = h.reshape(*lead, -1)
    return np.concatenate([flat.real, flat.imag], axis=-1)


def from_real(x, rows, cols):
    """Inverse of :func:`to_real`."""
    x = np.asarray(x, dtype=np.float64)
    n = rows * cols
    if x.shape[-1] != 2 * n:
        raise ValueError(f"expected last axis {2 * n}, got {x.shape[-1]}")
    z = x[..., :n] + 1j * x[..., n:]
    return z.reshape(*x.shape[:-1], rows, cols)
