"""Least-squares and linear-MMSE baselines."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import FadingConfig, column_variances
from .numerics import hermitian
from .pilots import PilotSet


@dataclass(frozen=True)
class PriorSpec:
    """Per-column prior scales ``r_k``; column k is modelled as CN(0, r_k I).

    ``label`` records where the scales came from, e.g. a moment-matched
    Gaussian surrogate for the non-Gaussian cascaded columns.
    """

    r: tuple
    label: str = "gaussian"

    def __post_init__(self):
        r = tuple(float(v) for v in self.r)
        if any(v < 0 for v in r):
            raise ValueError(f"prior scales must be >= 0, got {r}")
        object.__setattr__(self, "r", r)

    @classmethod
    def from_fading(cls, config: FadingConfig) -> "PriorSpec":
        return cls(tuple(column_variances(config)), label="moment-matched gaussian")


def _check(Y, pilots):
    Y = np.asarray(Y)
    if Y.shape[-1] != pilots.tau:
        raise ValueError(f"observation has {Y.shape[-1]} samples, pilots have {pilots.tau}")
    return Y


def ls_estimate(Y, pilots: PilotSet):
    """``Y S^H C^H / (sqrt(p_p) tau)``; exact inverse since ``C C^H = tau I``."""
    Y = _check(Y, pilots)
    return (Y @ hermitian(pilots.CS)) / (np.sqrt(pilots.p_p) * pilots.tau)


def ls_error_variance(pilots: PilotSet, sigma2) -> float:
    """Per-element error variance of the LS estimate."""
    return sigma2 / (pilots.p_p * pilots.tau)


def mmse_estimate(Y, pilots: PilotSet, prior: PriorSpec, sigma2):
    """Column-wise Wiener shrinkage of the LS estimate.

    With ``n = sigma2 / (p_p tau)`` each column is scaled by ``r_k / (r_k + n)``.
    This is the exact posterior mean when column k is truly CN(0, r_k I).
    """
    r = np.asarray(prior.r)
    if r.shape != (pilots.K + 1,):
        raise ValueError(f"prior needs {pilots.K + 1} scales, got {len(r)}")
    n = ls_error_variance(pilots, sigma2)
    denom = r + n
    gain = np.divide(r, denom, out=np.zeros_like(r), where=denom > 0)
    return ls_estimate(Y, pilots) * gain


def _ratio_factor(M):
    # E[||e||^2 / ||h||^2] / (n / r) for independent CN vectors of length M
    if M is None:
        return 1.0
    if M < 2:
        raise ValueError(f"per-trial NMSE has finite mean only for M >= 2, got {M}")
    return M / (M - 1.0)


def ls_nmse(r, n, M=None):
    """Closed-form mean NMSE of the LS estimate of a CN(0, r I) column.

    With ``M`` given, the mean of the per-trial ratio ``||h - h_ls||^2 / ||h||^2``
    over M-element columns, which is ``(n / r) M / (M - 1)``. Without it, the
    ratio of expectations ``n / r``.
    """
    r = np.asarray(r, dtype=float)
    return n / r * _ratio_factor(M)


def mmse_nmse(r, n, M=None):
    """Closed-form mean NMSE of the Wiener estimate of a CN(0, r I) column.

    With gain ``a = r / (r + n)`` the per-trial ratio has mean
    ``(1 - a)^2 + a^2 (n / r) M / (M - 1)``; without ``M`` this reduces to the
    ratio of expectations ``n / (r + n)``.
    """
    r = np.asarray(r, dtype=float)
    a = r / (r + n)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (1 - a) ** 2 + a * a * (n / r) * _ratio_factor(M)
    return np.where(r > 0, out, 1.0)


def cascaded_prior_scale(alpha, var_f, var_g) -> float:
    """Second moment of ``sqrt(alpha) f g`` with independent f and g."""
    if alpha <= 0 or var_f <= 0 or var_g <= 0:
        raise ValueError("alpha, var_f and var_g must all be > 0")
    return float(alpha * var_f * var_g)
