"""Experiment configuration: presets, YAML loading and validation."""

from __future__ import annotations

import copy
from dataclasses import asdict, dataclass, field

import yaml

from .channel import FadingConfig
from .score.schedule import TABLE1_SIGMA_MAX, make_schedule
from .score.train import TrainConfig

ESTIMATORS = ("LS", "MMSE", "ALS-analytic", "ALS-trained")
CHANNELS = ("ambc", "gaussian")


class ConfigError(ValueError):
    """Malformed configuration; the message starts with the offending field path."""


@dataclass(frozen=True)
class ScheduleSpec:
    sigma_min: float = 0.01
    sigma_max: float = TABLE1_SIGMA_MAX
    T: int = 20

    def build(self):
        return make_schedule(self.sigma_min, self.sigma_max, self.T)


@dataclass(frozen=True)
class AlsSettings:
    """Sampler settings as configured.

    ``beta0_mode = "per_snr"`` makes ``beta0`` a multiplier of the LS error
    variance ``sigma2 / (p_p tau)``, i.e. the inverse likelihood curvature, so
    one value stays stable across an SNR sweep. ``sigma2_scale`` mis-states
    the noise power handed to the likelihood, for robustness sweeps.
    """

    beta0: float = 1.9
    beta0_mode: str = "per_snr"
    zeta: float = 1e-4
    n_steps: int = 6
    schedule: ScheduleSpec = ScheduleSpec(0.01, 1.0, 20)
    sigma2_scale: float = 1.0


@dataclass(frozen=True)
class ExperimentConfig:
    fading: FadingConfig = FadingConfig()
    channel: str = "ambc"
    tau: int = 4
    source_pilot: str = "all_ones"
    sigma2: float = 1.0
    snr_db: tuple = (-5.0, 0.0, 5.0, 10.0, 15.0, 20.0)
    estimators: tuple = ("LS", "MMSE")
    trials: int = 2000
    seed: int = 0
    als: AlsSettings = AlsSettings()
    train: TrainConfig = TrainConfig()
    train_schedule: ScheduleSpec = ScheduleSpec()
    checkpoint: str | None = None
    output: str | None = None
    meta: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d.pop("meta")
        return d


DESK = {
    "fading": {"M": 8, "K": 3, "alpha": 0.6, "distribution": "rayleigh", "m_shape": 1.0,
               "per_element_variance": 1.0},
    "channel": "ambc",
    "tau": 4,
    "source_pilot": "all_ones",
    "sigma2": 1.0,
    "snr_db": [-5.0, 0.0, 5.0, 10.0, 15.0, 20.0],
    "estimators": ["LS", "MMSE", "ALS-analytic"],
    "trials": 2000,
    "seed": 0,
    "als": {"beta0": 1.9, "beta0_mode": "per_snr", "zeta": 1e-4, "n_steps": 6,
            "schedule": {"sigma_min": 0.01, "sigma_max": 1.0, "T": 20}, "sigma2_scale": 1.0},
    "train": {"lam": 1.0, "batch_size": 32, "epochs": 60, "lr_score": 1e-3, "lr_disc": 1e-4,
              "lr_final_ratio": 0.01, "dataset_size": 10_000, "width": 256, "depth": 4,
              "disc_width": 128, "disc_depth": 2, "data_scale": 1.0, "seed": None},
    "train_schedule": {"sigma_min": 0.01, "sigma_max": TABLE1_SIGMA_MAX, "T": 20},
    "checkpoint": None,
    "output": None,
}

TABLE1 = copy.deepcopy(DESK)
TABLE1.update({
    "fading": {"M": 48, "K": 7, "alpha": 0.6, "distribution": "rayleigh", "m_shape": 1.0,
               "per_element_variance": 1.0},
    "tau": 8,
    "estimators": ["LS", "MMSE"],
    "als": {"beta0": 3e-9, "beta0_mode": "absolute", "zeta": 1e-4, "n_steps": 6,
            "schedule": {"sigma_min": 0.01, "sigma_max": TABLE1_SIGMA_MAX, "T": 2311},
            "sigma2_scale": 1.0},
    "train_schedule": {"sigma_min": 0.01, "sigma_max": TABLE1_SIGMA_MAX, "T": 2311},
})
TABLE1["train"] = dict(DESK["train"], epochs=600, lr_final_ratio=1.0)

PRESETS = {"desk": DESK, "table1": TABLE1}


def _merge(base, override, path=""):
    out = copy.deepcopy(base)
    for key, val in override.items():
        where = f"{path}{key}"
        if key not in base:
            raise ConfigError(f"{where}: unknown field")
        if isinstance(base[key], dict) and val is not None:
            if not isinstance(val, dict):
                raise ConfigError(f"{where}: expected a mapping, got {type(val).__name__}")
            out[key] = _merge(base[key], val, where + ".")
        else:
            out[key] = val
    return out


def _as_number(val, where, kind=float):
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {val!r}")
    if kind is int and float(val) != int(val):
        raise ConfigError(f"{where}: expected an integer, got {val!r}")
    return kind(val)


def _num(d, key, path, kind=float):
    return _as_number(d[key], f"{path}{key}", kind)


def _schedule(d, path):
    try:
        spec = ScheduleSpec(_num(d, "sigma_min", path), _num(d, "sigma_max", path),
                            _num(d, "T", path, int))
        spec.build()
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"{path.rstrip('.')}: {exc}") from None
    return spec


def build_config(d) -> ExperimentConfig:
    """Validate a fully merged mapping into an :class:`ExperimentConfig`."""
    f = d["fading"]
    try:
        alpha = f["alpha"]
        if isinstance(alpha, (int, float)):
            alpha = [alpha] * _num(f, "K", "fading.", int)
        fading = FadingConfig(
            M=_num(f, "M", "fading.", int), K=_num(f, "K", "fading.", int), alpha=tuple(alpha),
            distribution=str(f["distribution"]), m_shape=_num(f, "m_shape", "fading."),
            per_element_variance=_num(f, "per_element_variance", "fading."),
        )
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"fading: {exc}") from None

    snr = d["snr_db"]
    if not isinstance(snr, (list, tuple)) or not snr:
        raise ConfigError("snr_db: expected a non-empty list")
    snr = tuple(_as_number(v, f"snr_db[{i}]") for i, v in enumerate(snr))
    if any(b <= a for a, b in zip(snr, snr[1:])):
        raise ConfigError(f"snr_db: grid must be strictly increasing, got {list(snr)}")

    est = d["estimators"]
    if not isinstance(est, (list, tuple)) or not est:
        raise ConfigError("estimators: expected a non-empty list")
    for i, e in enumerate(est):
        if e not in ESTIMATORS:
            raise ConfigError(f"estimators[{i}]: unknown estimator {e!r}; choose from {ESTIMATORS}")

    trials = _num(d, "trials", "", int)
    if trials < 1:
        raise ConfigError("trials: must be >= 1")
    sigma2 = _num(d, "sigma2", "")
    if sigma2 <= 0:
        raise ConfigError("sigma2: must be > 0")
    tau = _num(d, "tau", "", int)
    if tau < fading.K + 1 or tau & (tau - 1):
        raise ConfigError(f"tau: must be a power of two >= K+1 = {fading.K + 1}, got {tau}")
    if d["channel"] not in CHANNELS:
        raise ConfigError(f"channel: expected one of {CHANNELS}, got {d['channel']!r}")
    if d["source_pilot"] not in ("all_ones", "random_phase"):
        raise ConfigError(f"source_pilot: expected all_ones or random_phase, got {d['source_pilot']!r}")

    a = d["als"]
    if a["beta0_mode"] not in ("absolute", "per_snr"):
        raise ConfigError(f"als.beta0_mode: expected absolute or per_snr, got {a['beta0_mode']!r}")
    als = AlsSettings(
        beta0=_num(a, "beta0", "als."), beta0_mode=a["beta0_mode"], zeta=_num(a, "zeta", "als."),
        n_steps=_num(a, "n_steps", "als.", int), schedule=_schedule(a["schedule"], "als.schedule."),
        sigma2_scale=_num(a, "sigma2_scale", "als."),
    )
    if als.beta0 <= 0 or als.zeta < 0 or als.n_steps < 1 or als.sigma2_scale <= 0:
        raise ConfigError("als: need beta0 > 0, zeta >= 0, n_steps >= 1, sigma2_scale > 0")

    t = dict(d["train"])
    if t.get("seed") is None:
        t["seed"] = d["seed"]
    kinds = {"batch_size": int, "epochs": int, "dataset_size": int, "seed": int, "width": int,
             "depth": int, "disc_width": int, "disc_depth": int}
    try:
        train = TrainConfig(**{k: _num(t, k, "train.", kinds.get(k, float)) for k in t})
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"train: {exc}") from None

    return ExperimentConfig(
        fading=fading, channel=d["channel"], tau=tau, source_pilot=d["source_pilot"], sigma2=sigma2, snr_db=snr,
        estimators=tuple(est), trials=trials, seed=_num(d, "seed", "", int), als=als,
        train=train, train_schedule=_schedule(d["train_schedule"], "train_schedule."),
        checkpoint=d["checkpoint"], output=d["output"],
    )


def make_config(preset="desk", overrides=None) -> ExperimentConfig:
    if preset not in PRESETS:
        raise ConfigError(f"preset: unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    merged = _merge(PRESETS[preset], overrides or {})
    return build_config(merged)


def load_config(path, preset="desk", **overrides) -> ExperimentConfig:
    """Read a YAML file on top of a preset; keyword overrides are applied last."""
    with open(path) as fh:
        try:
            raw = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"<file>: not valid YAML: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError("<root>: expected a mapping at top level")
    preset = raw.pop("preset", preset)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return make_config(preset, raw)
