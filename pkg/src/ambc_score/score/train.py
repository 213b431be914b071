"""Alternating discriminator / score-network training."""

from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass

import numpy as np

from ..numerics import derive_rng
from .losses import disc_loss_and_grad, gen_loss_and_grad, make_batch
from .nets import DiscModel, ScoreModel

log = logging.getLogger(__name__)

LOG_HEADER = ("epoch", "dsm_loss", "disc_loss", "gen_adv_loss")


@dataclass(frozen=True)
class TrainConfig:
    lam: float = 1.0
    batch_size: int = 32
    epochs: int = 50
    lr_score: float = 1e-3
    lr_disc: float = 1e-4
    lr_final_ratio: float = 1.0
    dataset_size: int = 10_000
    seed: int = 0
    width: int = 256
    depth: int = 4
    disc_width: int = 128
    disc_depth: int = 2
    data_scale: float = 1.0

    def __post_init__(self):
        for name in ("lam", "lr_score", "lr_disc", "lr_final_ratio", "data_scale"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        for name in ("batch_size", "dataset_size", "width", "depth", "disc_width", "disc_depth"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")

    def to_dict(self):
        return asdict(self)


class TrainingDiverged(RuntimeError):
    """A loss or parameter went non-finite; carries the last finite models."""

    def __init__(self, epoch, step, model, disc, history):
        super().__init__(f"training diverged at epoch {epoch}, step {step}")
        self.epoch, self.step = epoch, step
        self.model, self.disc, self.history = model, disc, history


class Adam:
    def __init__(self, params, lr, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params, grads, lr=None):
        lr = self.lr if lr is None else lr
        self.t += 1
        c1 = 1.0 - self.beta1**self.t
        c2 = 1.0 - self.beta2**self.t
        for k, g in grads.items():
            m, v = self.m[k], self.v[k]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            params[k] -= lr * (m / c1) / (np.sqrt(v / c2) + self.eps)


def init_models(M, L, config: TrainConfig):
    rng = derive_rng(config.seed, "init")
    model = ScoreModel(M, L, config.width, config.depth, config.data_scale, rng=rng)
    disc = DiscModel(M, L, config.disc_width, config.disc_depth, rng=rng)
    return model, disc


def _lr_factor(step, total, final_ratio):
    if total <= 1 or final_ratio == 1.0:
        return 1.0
    frac = step / (total - 1)
    return final_ratio + (1.0 - final_ratio) * 0.5 * (1.0 + np.cos(np.pi * frac))


def train_adversarial(config: TrainConfig, data, schedule, model=None, disc=None,
                      progress=None):
    """Train score network and discriminator by alternating updates.

    Every mini-batch gets one discriminator step with the score network
    frozen, then one score-network step with the discriminator frozen.

    Parameters
    ----------
    config : TrainConfig
    data : ndarray, shape (n, M, L)
        Clean channel matrices. Only the first ``config.dataset_size`` are used.
    schedule : NoiseSchedule
        Levels from which each sample's perturbation is drawn uniformly.
    model, disc : optional
        Starting networks; fresh ones are built from ``config`` otherwise.
    progress : callable, optional
        Called as ``progress(epoch, row)`` after each epoch.

    Returns
    -------
    model, disc, history
        ``history`` holds one ``(epoch, dsm_loss, disc_loss, gen_adv_loss)``
        row per epoch; ``dsm_loss`` is reported without the ``lam`` weight.
    """
    data = np.asarray(data)[: config.dataset_size]
    if data.ndim != 3 or len(data) == 0:
        raise ValueError(f"training data must be a non-empty (n, M, L) array, got {data.shape}")
    n, M, L = data.shape
    if model is None or disc is None:
        fresh_model, fresh_disc = init_models(M, L, config)
        model = model or fresh_model
        disc = disc or fresh_disc
    rng = derive_rng(config.seed, "training")
    opt_s = Adam(model.params, config.lr_score)
    opt_d = Adam(disc.params, config.lr_disc)
    n_batches = -(-n // config.batch_size)
    total = config.epochs * n_batches
    history = []
    step = 0
    for epoch in range(1, config.epochs + 1):
        snapshot = (model.copy(), disc.copy())
        order = rng.permutation(n)
        sums = np.zeros(3)
        for b in range(n_batches):
            idx = order[b * config.batch_size : (b + 1) * config.batch_size]
            batch = make_batch(data[idx], schedule, rng)
            f = _lr_factor(step, total, config.lr_final_ratio)

            d_loss, d_grads = disc_loss_and_grad(disc, model, batch)
            opt_d.step(disc.params, d_grads, config.lr_disc * f)

            _, g_grads, (adv, dsm) = gen_loss_and_grad(model, disc, batch, config.lam)
            opt_s.step(model.params, g_grads, config.lr_score * f)

            losses = np.array([dsm / config.lam, d_loss, adv])
            if not (np.all(np.isfinite(losses)) and model.all_finite()
                    and disc.all_finite()):
                raise TrainingDiverged(epoch, step, *snapshot, history)
            sums += losses * len(idx)
            step += 1
        row = (epoch, *(sums / n))
        history.append(row)
        if progress is not None:
            progress(epoch, row)
        log.debug("epoch %d dsm %.4g disc %.4g adv %.4g", *row)
    return model, disc, history


def write_log(path, history):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_HEADER)
        for epoch, *vals in history:
            w.writerow([epoch, *(f"{v:.10e}" for v in vals)])
