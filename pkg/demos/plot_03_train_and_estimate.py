"""
Learning the channel prior and estimating with it
=================================================

Train the score network on simulated AmBC channels, then plug it into the
Langevin sampler. The cascaded columns are products of Gaussians. The
moment-matched Gaussian prior behind MMSE cannot represent them, but the
learned score can.

This takes a few minutes on one CPU. Pass ``--epochs`` to shorten it.
"""

import argparse
import os
import tempfile

from ambc_score import bench
from ambc_score.config import make_config

parser = argparse.ArgumentParser()
parser.add_argument("--epochs", type=int, default=60)
parser.add_argument("--trials", type=int, default=1000)
args = parser.parse_args()

cfg = make_config("desk", {
    "estimators": ["LS", "MMSE", "ALS-trained"],
    "trials": args.trials,
    "train": {"epochs": args.epochs},
})

###############################################################################
# Training alternates one discriminator step and one score step per batch.
# The loss log is a CSV with one row per epoch.

workdir = tempfile.mkdtemp()
ckpt_path = os.path.join(workdir, "desk.ckpt")
log_path = os.path.join(workdir, "desk.log.csv")


def progress(epoch, row):
    if epoch % 10 == 0 or epoch == args.epochs:
        print(f"epoch {epoch:3d}  dsm {row[1]:.3f}  disc {row[2]:.3f}  adv {row[3]:.3f}")


ckpt, _ = bench.train_command(cfg, ckpt_path, log_path, progress=progress)
print("checkpoint:", ckpt_path)

###############################################################################
# Sweep SNR. Rows are CSV-ready; here we print the two headline links.

rows = bench.run_sweep(cfg, model=ckpt.model, write=False)
print(f"{'SNR':>5s} {'link':>13s} {'LS':>8s} {'MMSE':>8s} {'ALS':>8s}")
for snr in cfg.snr_db:
    for link in ("direct", "cascaded_avg"):
        vals = [bench.find(rows, e, snr, link).nmse_mean for e in cfg.estimators]
        print(f"{snr:5.0f} {link:>13s} " + " ".join(f"{v:8.4f}" for v in vals))
