"""Finite-difference verification of backpropagated gradients."""

from __future__ import annotations

import numpy as np


def grad_check(params, loss_and_grad, epsilon=1e-5, n_checks=40, rng=None, floor=1e-8):
    """Compare analytic gradients with central differences.

    Parameters
    ----------
    params : dict of ndarray
        Parameters perturbed in place (and restored).
    loss_and_grad : callable
        ``loss_and_grad() -> (loss, grads)`` evaluated at the current ``params``.
    epsilon : float
        Central-difference step, within ``[1e-7, 1e-3]``.
    n_checks : int
        Number of randomly chosen scalar parameters to probe.
    floor : float
        Entries where both gradients are below this magnitude are skipped,
        since their relative error is pure round-off.

    Returns
    -------
    float
        Maximum of ``|a - n| / max(|a|, |n|)`` over the probed entries.
    """
    if not 1e-7 <= epsilon <= 1e-3:
        raise ValueError(f"epsilon must lie in [1e-7, 1e-3], got {epsilon}")
    rng = np.random.default_rng(0) if rng is None else rng
    _, grads = loss_and_grad()
    names = sorted(grads)
    sizes = np.array([params[k].size for k in names])
    worst = 0.0
    for _ in range(n_checks):
        k = names[rng.choice(len(names), p=sizes / sizes.sum())]
        i = rng.integers(params[k].size)
        flat = params[k].reshape(-1)
        old = flat[i]
        flat[i] = old + epsilon
        plus = loss_and_grad()[0]
        flat[i] = old - epsilon
        minus = loss_and_grad()[0]
        flat[i] = old
        numeric = (plus - minus) / (2.0 * epsilon)
        analytic = grads[k].reshape(-1)[i]
        scale = max(abs(analytic), abs(numeric))
        if scale < floor:
            continue
        worst = max(worst, abs(analytic - numeric) / scale)
    return worst
