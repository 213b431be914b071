"""Geometric noise-level schedules."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TABLE1_SIGMA_MAX = float(np.sqrt(36.77))


@dataclass(frozen=True)
class NoiseSchedule:
    """Increasing noise levels ``sigma_1 < ... < sigma_T`` in geometric progression."""

    sigmas: np.ndarray

    @property
    def T(self) -> int:
        return len(self.sigmas)

    @property
    def sigma_min(self) -> float:
        return float(self.sigmas[0])

    @property
    def sigma_max(self) -> float:
        return float(self.sigmas[-1])

    def to_dict(self):
        return {"sigma_min": self.sigma_min, "sigma_max": self.sigma_max, "T": self.T}


def make_schedule(sigma_min: float, sigma_max: float, T: int) -> NoiseSchedule:
    if not 0 < sigma_min < sigma_max:
        raise ValueError(f"need 0 < sigma_min < sigma_max, got {sigma_min}, {sigma_max}")
    if T < 2:
        raise ValueError(f"schedule needs T >= 2, got {T}")
    sigmas = np.geomspace(sigma_min, sigma_max, int(T))
    sigmas.setflags(write=False)
    return NoiseSchedule(sigmas)
