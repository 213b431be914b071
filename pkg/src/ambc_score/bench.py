"""Monte-Carlo NMSE sweeps, step-size grid search and the train/estimate commands."""

from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from .als import AlsConfig, AnalyticGaussianScore, als_sample
from .channel import sample_gaussian_surrogate, sample_hbar
from .classical import PriorSpec, ls_estimate, mmse_estimate
from .config import ESTIMATORS, ConfigError, ExperimentConfig
from .numerics import derive_rng
from .pilots import build_pilots, simulate_observation
from .score import checkpoint as ckpt_io
from .score.train import train_adversarial, write_log

log = logging.getLogger(__name__)

CSV_HEADER = ("estimator", "snr_db", "link", "nmse_mean", "nmse_ci95", "trials")
Z95 = 1.959963984540054


@dataclass
class NmseResult:
    """One CSV row. ``samples`` keeps per-trial NMSE (NaN for diverged trials)."""

    estimator: str
    snr_db: float
    link: str
    nmse_mean: float
    nmse_ci95: float
    trials: int
    diverged: int = 0
    samples: np.ndarray | None = None

    def csv_row(self):
        return [self.estimator, f"{self.snr_db:g}", self.link, f"{self.nmse_mean:.12e}",
                f"{self.nmse_ci95:.12e}", str(self.trials)]


def nmse(h_true, h_est):
    """``||h - h_est||^2 / ||h||^2`` for one column."""
    h_true = np.asarray(h_true).ravel()
    h_est = np.asarray(h_est).ravel()
    if h_true.shape != h_est.shape:
        raise ValueError(f"length mismatch: {h_true.shape} vs {h_est.shape}")
    ref = np.sum(np.abs(h_true) ** 2)
    if ref == 0:
        raise ValueError("NMSE undefined for an all-zero true channel")
    return float(np.sum(np.abs(h_true - h_est) ** 2) / ref)


def nmse_per_link(H, H_est):
    """Per-trial, per-column NMSE, shape ``(trials, K+1)``.

    Scaling a column by ``sqrt(alpha_k)`` scales error and reference alike, so
    the ratio computed on the effective channel equals the NMSE of ``h_k``.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        err = np.sum(np.abs(H - H_est) ** 2, axis=-2)
    ref = np.sum(np.abs(H) ** 2, axis=-2)
    return err / ref


def _score_trials(H, H_est, diverged):
    """Per-link NMSE with unusable trials set to NaN; also returns the updated mask.

    A trial whose iterate stayed finite but whose error overflows is counted
    as diverged too.
    """
    per_link = nmse_per_link(H, H_est)
    diverged = diverged | ~np.isfinite(per_link).all(axis=-1)
    per_link[diverged] = np.nan
    return per_link, diverged


def mean_ci(samples):
    x = np.asarray(samples, dtype=float)
    x = x[np.isfinite(x)]
    if x.size == 0:
        return math.nan, math.nan, 0
    half = Z95 * x.std(ddof=1) / np.sqrt(x.size) if x.size > 1 else 0.0
    return float(x.mean()), float(half), int(x.size)


def paired_difference(a: NmseResult, b: NmseResult):
    """Mean and 95% half-width of ``a - b`` over trials valid in both."""
    d = a.samples - b.samples
    mean, half, _ = mean_ci(d)
    return mean, half


def link_names(K):
    return ["direct"] + (["cascaded_avg"] + [f"cascaded_{k}" for k in range(1, K + 1)] if K else [])


def aggregate(estimator, snr_db, per_link):
    """Rows for the direct link, the tag average and each tag."""
    K = per_link.shape[1] - 1
    cols = {"direct": per_link[:, 0]}
    if K:
        cols["cascaded_avg"] = per_link[:, 1:].mean(axis=1)
        for k in range(1, K + 1):
            cols[f"cascaded_{k}"] = per_link[:, k]
    bad = ~np.isfinite(per_link).all(axis=1)
    rows = []
    for name in link_names(K):
        m, h, n = mean_ci(cols[name])
        rows.append(NmseResult(estimator, float(snr_db), name, m, h, n, int(bad.sum()), cols[name]))
    return rows


def pilot_power(cfg: ExperimentConfig, snr_db):
    return cfg.sigma2 * 10.0 ** (snr_db / 10.0)


def als_config(cfg: ExperimentConfig, pilots, score):
    s = cfg.als
    beta0 = s.beta0
    if s.beta0_mode == "per_snr":
        beta0 = s.beta0 * cfg.sigma2 / (pilots.p_p * pilots.tau)
    return AlsConfig(beta0, s.zeta, s.n_steps, s.schedule.build(), score)


def _base_pilots(cfg):
    return build_pilots(cfg.fading.K, cfg.tau, 1.0, cfg.source_pilot,
                        rng=derive_rng(cfg.seed, "pilots"))


def run_estimator(name, cfg, Y, pilots, rng, model=None):
    """Return ``(H_est, diverged_mask)`` for a batch of observations."""
    ok = np.zeros(Y.shape[:-2], dtype=bool)
    if name == "LS":
        return ls_estimate(Y, pilots), ok
    prior = PriorSpec.from_fading(cfg.fading)
    if name == "MMSE":
        return mmse_estimate(Y, pilots, prior, cfg.sigma2), ok
    if name == "ALS-analytic":
        score = AnalyticGaussianScore(prior.r)
    elif name == "ALS-trained":
        if model is None:
            raise ConfigError("checkpoint: ALS-trained needs a trained score model")
        score = model
    else:
        raise ConfigError(f"estimators: unknown estimator {name!r}")
    acfg = als_config(cfg, pilots, score)
    return als_sample(Y, pilots, cfg.sigma2 * cfg.als.sigma2_scale, acfg, rng, on_diverge="mask")


def sample_channels(cfg: ExperimentConfig, n, rng):
    """AmBC mixture, or the matched-Gaussian surrogate when ``cfg.channel == "gaussian"``."""
    if cfg.channel == "gaussian":
        return sample_gaussian_surrogate(cfg.fading, n, rng)
    return sample_hbar(cfg.fading, n, rng)


def _draw(cfg, snr_index, snr_db, pilots, purpose):
    if purpose == "test":
        ch_rng = derive_rng(cfg.seed, "channel", snr_index)
        nz_rng = derive_rng(cfg.seed, "noise", snr_index)
    else:
        ch_rng = derive_rng(cfg.seed, "validation", snr_index, 0)
        nz_rng = derive_rng(cfg.seed, "validation", snr_index, 1)
    H = sample_channels(cfg, cfg.trials, ch_rng)
    Y = simulate_observation(H, pilots, cfg.sigma2, nz_rng)
    return H, Y


def run_sweep(cfg: ExperimentConfig, model=None, write=True):
    """NMSE of every configured estimator over the SNR grid.

    Channel, noise and Langevin draws come from separate streams keyed by the
    SNR index (and, for Langevin, by the estimator's identity), so results do
    not depend on which other estimators are run or in what order.
    """
    if "ALS-trained" in cfg.estimators and model is None:
        raise ConfigError("checkpoint: ALS-trained requested but no checkpoint was given")
    base = _base_pilots(cfg)
    rows = []
    for i, snr in enumerate(cfg.snr_db):
        pilots = base.with_power(pilot_power(cfg, snr))
        H, Y = _draw(cfg, i, snr, pilots, "test")
        for name in cfg.estimators:
            rng = derive_rng(cfg.seed, "langevin", i, ESTIMATORS.index(name))
            H_est, diverged = run_estimator(name, cfg, Y, pilots, rng, model)
            per_link, diverged = _score_trials(H, H_est, diverged)
            if diverged.any():
                log.warning("%s at %g dB: %d of %d trials diverged and were excluded",
                            name, snr, int(diverged.sum()), len(diverged))
            rows.extend(aggregate(name, snr, per_link))
    order = {n: j for j, n in enumerate(cfg.estimators)}
    rows.sort(key=lambda r: (order[r.estimator], r.snr_db))
    if write and cfg.output:
        write_results(cfg.output, rows)
    return rows


def results_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def write_results(path, rows):
    with open(path, "w", newline="") as fh:
        fh.write(results_csv(rows))


def read_results(path):
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ()) != CSV_HEADER:
            raise ValueError(f"{path}: unexpected header {reader.fieldnames}")
        return [NmseResult(r["estimator"], float(r["snr_db"]), r["link"], float(r["nmse_mean"]),
                           float(r["nmse_ci95"]), int(r["trials"])) for r in reader]


def find(rows, estimator, snr_db, link):
    for r in rows:
        if r.estimator == estimator and r.snr_db == snr_db and r.link == link:
            return r
    raise KeyError((estimator, snr_db, link))


@dataclass
class GridCell:
    beta0: float
    zeta: float
    score_db: float
    diverged: bool


@dataclass
class GridSearchResult:
    beta0: float
    zeta: float
    table: list


def grid_search_beta(cfg: ExperimentConfig, beta0s, zetas, estimator="ALS-analytic", model=None):
    """Pick ``(beta0, zeta)`` minimizing validation NMSE.

    The validation observations are drawn from their own stream, disjoint from
    the sweep's test draws. The objective is the NMSE in dB averaged over the
    SNR grid and over all links; any divergent trial disqualifies a cell.
    ``beta0`` is interpreted according to ``cfg.als.beta0_mode``.
    """
    beta0s, zetas = list(beta0s), list(zetas)
    if not beta0s or not zetas:
        raise ValueError("grid search needs at least one beta0 and one zeta")
    if estimator not in ("ALS-analytic", "ALS-trained"):
        raise ValueError(f"grid search applies to ALS estimators, got {estimator!r}")
    base = _base_pilots(cfg)
    data = []
    for i, snr in enumerate(cfg.snr_db):
        pilots = base.with_power(pilot_power(cfg, snr))
        data.append((i, pilots, *_draw(cfg, i, snr, pilots, "validation")))
    table = []
    for b in beta0s:
        for z in zetas:
            c = replace(cfg, als=replace(cfg.als, beta0=float(b), zeta=float(z)))
            scores, bad = [], False
            for i, pilots, H, Y in data:
                rng = derive_rng(cfg.seed, "validation", i, 2)
                H_est, diverged = run_estimator(estimator, c, Y, pilots, rng, model)
                per_link, diverged = _score_trials(H, H_est, diverged)
                if diverged.any():
                    bad = True
                    break
                scores.append(10.0 * np.log10(np.mean(per_link)))
            cell = GridCell(float(b), float(z), math.inf if bad else float(np.mean(scores)), bad)
            table.append(cell)
            log.info("grid beta0=%g zeta=%g -> %s", b, z, "diverged" if bad else f"{cell.score_db:.4f} dB")
    if len(table) == 1:
        best = table[0]
    else:
        valid = [c for c in table if not c.diverged]
        if not valid:
            raise FloatingPointError("every (beta0, zeta) candidate diverged")
        best = min(valid, key=lambda c: c.score_db)
    return GridSearchResult(best.beta0, best.zeta, table)


def grid_csv(result: GridSearchResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("beta0", "zeta", "score_db", "diverged", "selected"))
    for c in result.table:
        sel = c.beta0 == result.beta0 and c.zeta == result.zeta
        w.writerow((f"{c.beta0:.6e}", f"{c.zeta:.6e}", f"{c.score_db:.6f}", int(c.diverged), int(sel)))
    return buf.getvalue()


def training_data(cfg: ExperimentConfig):
    """The fixed training set drawn from the configured channel model."""
    rng = derive_rng(cfg.train.seed, "dataset")
    return sample_channels(cfg, cfg.train.dataset_size, rng)


def train_command(cfg: ExperimentConfig, checkpoint_path, log_path=None, progress=None):
    """Train on the configured channel model and write checkpoint and log CSV."""
    schedule = cfg.train_schedule.build()
    model, disc, history = train_adversarial(cfg.train, training_data(cfg), schedule,
                                             progress=progress)
    meta = {"train": cfg.train.to_dict(), "fading": {
        "M": cfg.fading.M, "K": cfg.fading.K, "alpha": list(cfg.fading.alpha),
        "distribution": cfg.fading.distribution, "m_shape": cfg.fading.m_shape,
        "per_element_variance": cfg.fading.per_element_variance}}
    ckpt = ckpt_io.Checkpoint(model, disc, schedule, meta)
    ckpt_io.save(checkpoint_path, ckpt)
    if log_path is not None:
        write_log(log_path, history)
    return ckpt, history


def load_model(cfg: ExperimentConfig, checkpoint_path=None):
    path = checkpoint_path or cfg.checkpoint
    if path is None:
        raise ConfigError("checkpoint: ALS-trained requested but no checkpoint path was given")
    try:
        ckpt = ckpt_io.load(path)
    except FileNotFoundError:
        raise ConfigError(f"checkpoint: file not found: {path}") from None
    m = ckpt.model
    if (m.M, m.L) != (cfg.fading.M, cfg.fading.K + 1):
        raise ConfigError(
            f"checkpoint: model is for {m.M}x{m.L} channels, config needs "
            f"{cfg.fading.M}x{cfg.fading.K + 1}"
        )
    return m


def estimate_command(cfg: ExperimentConfig, checkpoint_path=None):
    """Run the sweep, loading a checkpoint only when ALS-trained is requested."""
    model = None
    if "ALS-trained" in cfg.estimators:
        model = load_model(cfg, checkpoint_path)
    return run_sweep(cfg, model=model)
