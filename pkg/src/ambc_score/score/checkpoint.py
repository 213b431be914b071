"""Self-describing binary checkpoints.

Layout: 8-byte magic, little-endian uint32 format version, uint32 header
length, UTF-8 JSON header, then every parameter as little-endian float64 in
the order listed by the header.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field

import numpy as np

from .nets import DiscModel, ScoreModel
from .schedule import NoiseSchedule, make_schedule

MAGIC = b"AMBCSCOR"
VERSION = 1


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    model: ScoreModel
    disc: DiscModel | None = None
    schedule: NoiseSchedule | None = None
    meta: dict = field(default_factory=dict)


def _layout(net):
    return [[name, list(shape)] for name, shape in net.layout()]


def to_bytes(ckpt: Checkpoint) -> bytes:
    header = {
        "format": "ambc-score-checkpoint",
        "score": {"hyper": ckpt.model.hyper(), "params": _layout(ckpt.model)},
        "disc": None,
        "schedule": ckpt.schedule.to_dict() if ckpt.schedule is not None else None,
        "meta": ckpt.meta,
    }
    blobs = [ckpt.model.flat()]
    if ckpt.disc is not None:
        header["disc"] = {"hyper": ckpt.disc.hyper(), "params": _layout(ckpt.disc)}
        blobs.append(ckpt.disc.flat())
    text = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    body = np.concatenate(blobs).astype("<f8").tobytes()
    return MAGIC + struct.pack("<II", VERSION, len(text)) + text + body


def _section(header, key):
    try:
        return header[key]["hyper"], header[key]["params"]
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"checkpoint header: missing field {key}.{exc}") from None


def from_bytes(raw: bytes) -> Checkpoint:
    if raw[:8] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    if len(raw) < 16:
        raise CheckpointError("checkpoint truncated in preamble")
    version, hlen = struct.unpack("<II", raw[8:16])
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        header = json.loads(raw[16 : 16 + hlen].decode())
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"checkpoint header is not valid JSON: {exc}") from None
    body = np.frombuffer(raw[16 + hlen :], dtype="<f8").astype(np.float64)

    hyper, params = _section(header, "score")
    try:
        model = ScoreModel(hyper["M"], hyper["L"], hyper["width"], hyper["depth"],
                           hyper["data_scale"])
    except KeyError as exc:
        raise CheckpointError(f"checkpoint header: missing field score.hyper.{exc}") from None
    if _layout(model) != params:
        raise CheckpointError("checkpoint header: score.params does not match hyperparameters")
    n = model.n_params()
    disc = None
    if header.get("disc") is not None:
        dh, dparams = _section(header, "disc")
        try:
            disc = DiscModel(dh["M"], dh["L"], dh["width"], dh["depth"])
        except KeyError as exc:
            raise CheckpointError(f"checkpoint header: missing field disc.hyper.{exc}") from None
        if _layout(disc) != dparams:
            raise CheckpointError("checkpoint header: disc.params does not match hyperparameters")
    expected = n + (disc.n_params() if disc else 0)
    if body.size != expected:
        raise CheckpointError(f"checkpoint body holds {body.size} values, expected {expected}")
    model.set_flat(body[:n])
    if disc is not None:
        disc.set_flat(body[n:])
    sched = header.get("schedule")
    schedule = None
    if sched is not None:
        schedule = make_schedule(sched["sigma_min"], sched["sigma_max"], sched["T"])
    return Checkpoint(model, disc, schedule, header.get("meta") or {})


def save(path, ckpt: Checkpoint):
    with open(path, "wb") as fh:
        fh.write(to_bytes(ckpt))


def load(path) -> Checkpoint:
    with open(path, "rb") as fh:
        return from_bytes(fh.read())
