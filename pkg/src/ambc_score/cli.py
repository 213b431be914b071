"""Command-line entry point: ``train``, ``sweep`` and ``grid-search``."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path

from . import bench
from .config import PRESETS, ConfigError, load_config, make_config
from .score.checkpoint import CheckpointError


def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _config(args):
    overrides = {"seed": args.seed}
    if args.config:
        return load_config(args.config, preset=args.preset, **overrides)
    return make_config(args.preset, {k: v for k, v in overrides.items() if v is not None})


def build_parser():
    p = argparse.ArgumentParser(prog="ambc-bench", description=__doc__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML experiment file layered on the preset")
    common.add_argument("--preset", choices=sorted(PRESETS), default="desk")
    common.add_argument("--seed", type=int, help="master seed (overrides the config)")
    common.add_argument("--out", help="output CSV path")
    common.add_argument("--checkpoint", help="score-model checkpoint path")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("train", parents=[common],
                   help="train the score model; --checkpoint is written, --out gets the log CSV")
    sub.add_parser("sweep", parents=[common], help="NMSE versus SNR for the configured estimators")
    g = sub.add_parser("grid-search", parents=[common], help="select (beta0, zeta) on validation data")
    g.add_argument("--beta0", type=_floats, required=True, help="comma-separated candidates")
    g.add_argument("--zeta", type=_floats, default=[1e-4], help="comma-separated candidates")
    g.add_argument("--estimator", choices=["ALS-analytic", "ALS-trained"], default="ALS-analytic")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _config(args)
        if args.command == "train":
            ckpt = args.checkpoint or cfg.checkpoint or "score_model.ckpt"
            log_path = args.out or str(Path(ckpt).with_suffix(".log.csv"))

            def progress(epoch, row):
                if args.verbose:
                    print(f"epoch {epoch}: dsm {row[1]:.4g} disc {row[2]:.4g} adv {row[3]:.4g}",
                          file=sys.stderr)

            bench.train_command(cfg, ckpt, log_path, progress=progress)
            print(f"wrote {ckpt} and {log_path}")
        elif args.command == "sweep":
            cfg = replace(cfg, output=args.out or cfg.output)
            rows = bench.estimate_command(cfg, args.checkpoint)
            if not cfg.output:
                sys.stdout.write(bench.results_csv(rows))
        else:
            model = None
            if args.estimator == "ALS-trained":
                model = bench.load_model(cfg, args.checkpoint)
            result = bench.grid_search_beta(cfg, args.beta0, args.zeta, args.estimator, model)
            text = bench.grid_csv(result)
            if args.out:
                Path(args.out).write_text(text)
            else:
                sys.stdout.write(text)
            print(f"selected beta0={result.beta0:g} zeta={result.zeta:g}", file=sys.stderr)
    except (ConfigError, CheckpointError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
