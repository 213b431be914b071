"""Orthogonal tag pilots and reader observation synthesis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import sample_complex_gaussian

ALL_ONES = "all_ones"
RANDOM_PHASE = "random_phase"


def hadamard(order: int) -> np.ndarray:
    """Sylvester Hadamard matrix of a power-of-two order (integer entries)."""
    order = int(order)
    if order < 1 or order & (order - 1):
        raise ValueError(f"Hadamard order must be a power of two, got {order}")
    h = np.ones((1, 1), dtype=np.int64)
    while h.shape[0] < order:
        h = np.block([[h, h], [h, -h]])
    return h


@dataclass(frozen=True)
class PilotSet:
    """Tag pilot matrix ``C`` ((K+1) x tau) and source pilot ``s`` (1 x tau).

    Row 0 of ``C`` is the all-ones pilot of the RF source, treated as an
    extra (imaginary) tag.
    """

    C: np.ndarray
    s: np.ndarray
    p_p: float = 1.0

    @property
    def tau(self) -> int:
        return self.C.shape[1]

    @property
    def K(self) -> int:
        return self.C.shape[0] - 1

    @property
    def S(self) -> np.ndarray:
        return np.diag(self.s.ravel())

    @property
    def CS(self) -> np.ndarray:
        """``C diag(s)``; scaling the columns of C avoids forming diag(s)."""
        return self.C * self.s

    def with_power(self, p_p: float) -> "PilotSet":
        if p_p <= 0:
            raise ValueError(f"pilot power must be > 0, got {p_p}")
        return PilotSet(self.C, self.s, float(p_p))


def build_pilots(K, tau, p_p=1.0, source_pilot=ALL_ONES, rng=None) -> PilotSet:
    """First K+1 Hadamard rows as tag pilots plus a unit-modulus source pilot."""
    tau = int(tau)
    if tau < 1 or tau & (tau - 1):
        raise ValueError(f"pilot length must be a power of two, got {tau}")
    if tau < K + 1:
        raise ValueError(f"pilot length {tau} too short for {K} tags (need >= {K + 1})")
    if p_p <= 0:
        raise ValueError(f"pilot power must be > 0, got {p_p}")
    C = hadamard(tau)[: K + 1].astype(np.complex128)
    if source_pilot == ALL_ONES:
        s = np.ones((1, tau), dtype=np.complex128)
    elif source_pilot == RANDOM_PHASE:
        if rng is None:
            raise ValueError("random-phase source pilot needs an rng")
        s = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=(1, tau)))
    else:
        raise ValueError(f"unknown source pilot kind {source_pilot!r}")
    return PilotSet(C=C, s=s, p_p=float(p_p))


def simulate_observation(hbar, pilots: PilotSet, sigma2, rng):
    """Received pilot block ``Y = sqrt(p_p) Hbar C S + N``.

    ``hbar`` may carry leading batch axes; the noise is drawn with the same
    batch shape.
    """
    hbar = np.asarray(hbar)
    if hbar.shape[-1] != pilots.C.shape[0]:
        raise ValueError(
            f"channel has {hbar.shape[-1]} columns but pilots cover {pilots.C.shape[0]} links"
        )
    if sigma2 < 0:
        raise ValueError(f"noise variance must be >= 0, got {sigma2}")
    clean = np.sqrt(pilots.p_p) * (hbar @ pilots.CS)
    if sigma2 == 0:
        return clean
    M = hbar.shape[-2]
    return clean + sample_complex_gaussian(M, pilots.tau, sigma2, rng, batch=hbar.shape[:-2])
