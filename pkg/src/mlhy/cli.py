"""Command line entry point: ``mlhy {construct,fer,rate-loss,capacity,rcu}``."""

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config
from .construction import CodeConstruction, construct
from .sim import (ConstructionMismatch, base_metadata, capacity_sweep, fer_crossing, fer_sweep,
                  rate_loss_sweep, rcu_sweep, write_csv)

log = logging.getLogger("mlhy")


def _load(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
        cfg.validate()
    return cfg


def _construction(args, cfg, required=True):
    if args.construction:
        return CodeConstruction.load(args.construction)
    if required:
        raise SystemExit("error: --construction is required for this command")
    return None


def _out(args, default):
    return Path(args.out) if args.out else Path(default)


def cmd_construct(args):
    cfg = _load(args)
    cons = construct(cfg)
    out = _out(args, "construction.json")
    cons.save(out)
    log.info("wrote %s: data=%d dm=%d frozen=%d", out, cons.n_data, cons.count(2), cons.count(0))


def cmd_fer(args):
    cfg = _load(args)
    cons = _construction(args, cfg)
    recs = fer_sweep(cfg, cons, workers=args.workers,
                     progress=lambda r: log.info("snr %.2f dB: %d/%d errors, FER %.3g",
                                                 r.snr_db, r.frame_errors, r.frames, r.fer))
    meta = base_metadata(cfg, cons)
    meta.update(min_errors=cfg.min_errors, max_frames=cfg.max_frames, batch_frames=cfg.batch_frames,
                list_enc=cfg.list_enc, list_dec=cfg.list_dec, encoder_rule=cfg.encoder_rule,
                fer_crossing_1e2_db=round(fer_crossing(recs), 4))
    write_csv(_out(args, "fer.csv"), recs, meta)


def cmd_rate_loss(args):
    cfg = _load(args)
    rows = rate_loss_sweep(cfg, progress=lambda r: log.info("M=%d N=%d mlhy %.4f ccdm %.4f",
                                                             r.M, r.N, r.mlhy, r.ccdm))
    meta = base_metadata(cfg)
    meta.update(list_enc=cfg.list_enc, rate_loss_frames=cfg.rate_loss_frames,
                rate_loss_definition="H(pooled empirical pmf) - data positions / N")
    write_csv(_out(args, "rate_loss.csv"), rows, meta)


def cmd_capacity(args):
    cfg = _load(args)
    rows, thr = capacity_sweep(cfg)
    meta = base_metadata(cfg)
    meta.update({k: round(v, 6) for k, v in thr.items()})
    write_csv(_out(args, "capacity.csv"), rows, meta)


def cmd_rcu(args):
    cfg = _load(args)
    cons = _construction(args, cfg, required=False)
    rows, info = rcu_sweep(cfg, cons, progress=lambda r: log.info("snr %.2f dB: RCU %.3g", r["snr_db"],
                                                                   r["rcu"]))
    meta = base_metadata(cfg, cons)
    meta.update(info)
    meta.update(grid_step=cfg.rcu_grid_step, outer_trials=cfg.rcu_outer_trials)
    write_csv(_out(args, "rcu.csv"), rows, meta)


COMMANDS = {
    "construct": (cmd_construct, "estimate bitchannel entropies and pick Data/Frozen/DM sets"),
    "fer": (cmd_fer, "frame error rate sweep"),
    "rate-loss": (cmd_rate_loss, "shaping-only rate loss against CCDM"),
    "capacity": (cmd_capacity, "constellation-constrained capacity and thresholds"),
    "rcu": (cmd_rcu, "random-coding union bound sweep"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="mlhy", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (fn, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--construction", help="construction JSON (fer, rcu)")
        p.add_argument("--out", help="output path")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--workers", type=int, default=1, help="worker processes for fer")
        p.set_defaults(func=fn)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(asctime)s %(message)s")
    if args.workers < 1:
        print("error: --workers must be at least 1", file=sys.stderr)
        return 2
    try:
        args.func(args)
    except ConstructionMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
