"""Noise-conditional score network, discriminator, losses and training."""

from .checkpoint import Checkpoint, CheckpointError, load, save
from .gradcheck import grad_check
from .losses import (
    Batch,
    disc_loss,
    disc_loss_and_grad,
    dsm_loss,
    dsm_loss_and_grad,
    gen_loss,
    gen_loss_and_grad,
    make_batch,
    perturb,
)
from .nets import DiscModel, ResMLP, ScoreModel, analytic_gaussian_score, denoise_empirical_bayes
from .schedule import TABLE1_SIGMA_MAX, NoiseSchedule, make_schedule
from .train import TrainConfig, TrainingDiverged, init_models, train_adversarial, write_log

__all__ = [
    "Batch", "Checkpoint", "CheckpointError", "DiscModel", "NoiseSchedule", "ResMLP",
    "ScoreModel", "TABLE1_SIGMA_MAX", "TrainConfig", "TrainingDiverged",
    "analytic_gaussian_score", "denoise_empirical_bayes", "disc_loss", "disc_loss_and_grad",
    "dsm_loss", "dsm_loss_and_grad", "gen_loss", "gen_loss_and_grad", "grad_check",
    "init_models", "load", "make_batch", "make_schedule", "perturb", "save",
    "train_adversarial", "write_log",
]
