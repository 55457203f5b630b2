"""Simulation drivers behind the command line: FER, rate loss, capacity, RCU.

Every frame draws its randomness from ``SeedSequence([seed, snr_index, frame])``
and frames are consumed in fixed-size batches, so results do not depend on
the number of worker processes.
"""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Optional

import numpy as np

from . import __version__
from .bounds import rcu_bound
from .ccdm import CcdmCode, ccdm_rate_loss, quantize_distribution
from .config import ExperimentConfig
from .construction import CodeConstruction, construct
from .modem import (GH_NODES, InputDistribution, awgn_transmit, constellation_capacity,
                    empirical_pmf, entropy_matched, make_constellation, pair_symmetric_pmf,
                    rate_optimal, shaped_threshold, uniform_pmf, uniform_threshold)
from .shaping import mlhy_decode, mlhy_encode, rate_loss

SNR_CONVENTION = "SNR = E[X^2] / sigma^2, E[X^2] measured on encoder output (calibration frames)"
_CALIBRATION_KEY = 0xCA1B
_RCU_KEY = 0x5C0


class ConstructionMismatch(ValueError):
    """The construction file was built from a different configuration."""


@dataclass
class FerRecord:
    snr_db: float
    frames: int
    frame_errors: int
    bit_errors: int
    fer: float
    ber: float
    ci_low: float
    ci_high: float
    wall_time: float
    max_frames_hit: bool

    @classmethod
    def from_counts(cls, snr_db, frames, frame_errors, bit_errors, payload, wall, capped):
        fer = frame_errors / frames if frames else float("nan")
        half = 1.96 * math.sqrt(fer * (1 - fer) / frames) if frames else float("nan")
        ber = bit_errors / (frames * payload) if frames and payload else float("nan")
        return cls(snr_db, frames, frame_errors, bit_errors, fer, ber, max(fer - half, 0.0),
                   min(fer + half, 1.0), wall, capped)


def check_construction(cfg: ExperimentConfig, cons: CodeConstruction):
    want = cfg.hash()
    got = cons.meta.get("config_hash")
    if got != want:
        raise ConstructionMismatch(f"construction was built for config {got}, this config is {want}")


def decoder_dm_rule(cfg: ExperimentConfig) -> str:
    """DM handling at the receiver that matches the encoder."""
    if cfg.encoder_rule == "fork" and cfg.list_enc > 1:
        return "fork"
    return cfg.encoder_rule if cfg.encoder_rule != "fork" else "argmax"


class Link:
    """Everything needed to run one frame, built once per process."""

    def __init__(self, cfg: ExperimentConfig, cons: CodeConstruction):
        self.cfg = cfg
        self.cons = cons
        self.c = make_constellation(cfg.kind, cfg.m)
        self.pmf = InputDistribution(np.asarray(cons.pmf), None, "construction")
        self.crc = cfg.crc
        if cfg.mode == "uniform-mlpc":
            self.enc_rule, self.list_enc = "argmax", 1
        else:
            self.enc_rule, self.list_enc = cfg.encoder_rule, cfg.list_enc
        self.dec_rule = "argmax" if cfg.mode == "uniform-mlpc" else decoder_dm_rule(cfg)

    def encode(self, rng):
        msg = rng.integers(0, 2, self.cons.payload_bits, dtype=np.uint8)
        cw = mlhy_encode(msg, self.cons, self.pmf, self.c, self.list_enc, self.enc_rule,
                         self.crc, rng=rng)
        return msg, cw

    def frame(self, rng, sigma):
        msg, cw = self.encode(rng)
        y = awgn_transmit(self.c.points[cw.symbols], sigma, rng)
        res = mlhy_decode(y, self.cons, self.pmf, self.c, sigma, self.cfg.list_dec, self.crc,
                          self.dec_rule, uniforms=cw.uniforms)
        errs = int(np.count_nonzero(res.payload != msg))
        return errs > 0, errs


def calibrate(link: Link, frames: int, seed: int):
    """Average symbol energy and symbol pmf actually produced by the encoder."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, _CALIBRATION_KEY]))
    syms = [link.encode(rng)[1].symbols for _ in range(max(frames, 1))]
    sym = np.concatenate(syms)
    energy = float(np.mean(link.c.points[sym] ** 2))
    return energy, empirical_pmf(sym, link.c.M)


_WORKER_LINK: Optional[Link] = None


def _init_worker(cfg_dict, cons_json):
    global _WORKER_LINK
    _WORKER_LINK = Link(ExperimentConfig.from_dict(cfg_dict), CodeConstruction.from_json(cons_json))


def _run_frames(link, seed, snr_idx, sigma, frames):
    fe = be = 0
    for f in frames:
        rng = np.random.default_rng(np.random.SeedSequence([seed, snr_idx, f]))
        bad, errs = link.frame(rng, sigma)
        fe += bad
        be += errs
    return fe, be


def _worker_frames(args):
    return _run_frames(_WORKER_LINK, *args)


def fer_sweep(cfg: ExperimentConfig, cons: CodeConstruction, workers: int = 1,
              energy: Optional[float] = None, progress=None) -> List[FerRecord]:
    """Frame error rate per SNR point with the configured stopping rule."""
    check_construction(cfg, cons)
    link = Link(cfg, cons)
    if energy is None:
        energy, _ = calibrate(link, cfg.calibration_frames, cfg.seed)
    records = []
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(workers, initializer=_init_worker,
                                   initargs=(cfg.to_dict(), cons.to_json()))
    try:
        for si, snr in enumerate(cfg.snr_db):
            sigma = math.sqrt(energy / 10 ** (snr / 10))
            frames = fe = be = 0
            t0 = time.perf_counter()
            while True:
                n = min(cfg.batch_frames, cfg.max_frames - frames)
                if n <= 0:
                    break
                ids = range(frames, frames + n)
                if pool is None:
                    a, b = _run_frames(link, cfg.seed, si, sigma, ids)
                else:
                    chunks = [ids[w::workers] for w in range(workers)]
                    jobs = [(cfg.seed, si, sigma, ch) for ch in chunks if len(ch)]
                    a = b = 0
                    for x, y in pool.map(_worker_frames, jobs):
                        a += x
                        b += y
                frames += n
                fe += a
                be += b
                if fe >= cfg.min_errors and frames >= cfg.min_frames:
                    break
            capped = fe < cfg.min_errors
            rec = FerRecord.from_counts(snr, frames, fe, be, cons.payload_bits,
                                        time.perf_counter() - t0, capped)
            records.append(rec)
            if progress:
                progress(rec)
    finally:
        if pool is not None:
            pool.shutdown()
    return records


def crossing(snr_db, values, target: float = 1e-2) -> float:
    """SNR where a decreasing error curve crosses ``target``, interpolating in log domain."""
    pts = sorted(zip(snr_db, values))
    for (s0, f0), (s1, f1) in zip(pts, pts[1:]):
        if f0 >= target >= f1 and f0 > 0 and f1 > 0 and f0 != f1:
            return s0 + (math.log(target) - math.log(f0)) * (s1 - s0) / (math.log(f1) - math.log(f0))
    return float("nan")


def fer_crossing(records: List[FerRecord], target: float = 1e-2) -> float:
    return crossing([r.snr_db for r in records], [r.fer for r in records], target)


@dataclass
class RateLossRow:
    M: int
    rate: float
    N: int
    mlhy: float
    ccdm: float
    frames: int
    trials: int
    ccdm_k: int


RATE_LOSS_RATES = {4: 1.625, 8: 2.375, 16: 3.25}


def dm_construction_trials(cfg: ExperimentConfig, N: int) -> int:
    """Trials for a shaping-only construction: the configured count at N=64, scaled down as 1/N."""
    return max(1000, cfg.construction_trials * 64 // N)


def rate_loss_point(cfg: ExperimentConfig, M: int, N: int, rate: Optional[float] = None) -> RateLossRow:
    rate = RATE_LOSS_RATES[M] if rate is None else rate
    m = int(math.log2(M))
    trials = dm_construction_trials(cfg, N)
    sub = ExperimentConfig.from_dict({**cfg.to_dict(), "mode": "dm-only", "m": m, "N": N,
                                      "rate": rate, "crc": None, "n_dm": 0,
                                      "construction_trials": trials})
    cons = construct(sub)
    c = make_constellation(sub.kind, m)
    pmf = entropy_matched(c, rate)
    rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, M, N]))
    cws = [mlhy_encode(rng.integers(0, 2, cons.payload_bits, dtype=np.uint8), cons, pmf, c,
                       cfg.list_enc, "fork" if cfg.list_enc > 1 else "argmax")
           for _ in range(cfg.rate_loss_frames)]
    comp = quantize_distribution(pmf, N)
    return RateLossRow(M, rate, N, rate_loss(cws, cons, M), ccdm_rate_loss(pmf, N),
                       cfg.rate_loss_frames, trials, CcdmCode(comp).k)


def rate_loss_sweep(cfg: ExperimentConfig, orders=(4, 8, 16), progress=None) -> List[RateLossRow]:
    rows = []
    for M in orders:
        for N in cfg.rate_loss_lengths:
            row = rate_loss_point(cfg, M, N)
            rows.append(row)
            if progress:
                progress(row)
    return rows


def capacity_sweep(cfg: ExperimentConfig):
    """MI for uniform and rate-optimal inputs over the SNR grid, plus thresholds at ``cfg.rate``."""
    c = make_constellation(cfg.kind, cfg.m)
    u = uniform_pmf(c)
    rows = []
    for snr in cfg.snr_db:
        p = rate_optimal(c, snr)
        rows.append({"snr_db": snr, "mi_uniform": constellation_capacity(c, u, snr),
                     "mi_shaped": constellation_capacity(c, p, snr), "nu": p.nu,
                     "entropy_shaped": p.entropy()})
    ts = shaped_threshold(c, cfg.rate)
    tu = uniform_threshold(c, cfg.rate)
    tp = shaped_threshold(c, cfg.rate, pair_symmetric_pmf) if cfg.kind == "PAM" else None
    thresholds = {"threshold_shaped_db": ts, "threshold_uniform_db": tu,
                  "shaping_gain_db": tu - ts}
    if tp is not None:
        thresholds["threshold_pair_symmetric_db"] = tp
        thresholds["asymmetry_gain_db"] = tp - ts
    return rows, thresholds


def rcu_sweep(cfg: ExperimentConfig, cons: Optional[CodeConstruction] = None, progress=None):
    """RCU bound per SNR for the encoder-realized pmf (target pmf without a construction).

    The message count is ``2^payload_bits``, i.e. the rate net of the CRC.
    """
    c = make_constellation(cfg.kind, cfg.m)
    if cons is not None:
        check_construction(cfg, cons)
        link = Link(cfg, cons)
        energy, pmf = calibrate(link, cfg.calibration_frames, cfg.seed)
        source = "encoder"
        payload = cons.payload_bits
    else:
        pmf = design_pmf(cfg, c)
        energy = pmf.energy(c)
        source = "target"
        payload = cfg.payload_bits
    R = payload / cfg.N
    rows = []
    for si, snr in enumerate(cfg.snr_db):
        sigma = math.sqrt(energy / 10 ** (snr / 10))
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, _RCU_KEY, si]))
        r = rcu_bound(c, pmf, sigma, cfg.N, R, cfg.rcu_outer_trials, cfg.rcu_grid_step, rng)
        row = {"snr_db": snr, "rcu": r.bound, "stderr": r.stderr, "trials": r.trials}
        rows.append(row)
        if progress:
            progress(row)
    return rows, {"pmf_source": source, "rcu_rate": R, "pmf": [round(float(v), 6) for v in pmf.pmf],
                  "energy": energy}


def design_pmf(cfg: ExperimentConfig, c) -> InputDistribution:
    from .construction import design_distribution, make_uniform
    if cfg.mode == "uniform-mlpc":
        return make_uniform(c)
    if cfg.mode == "dm-only":
        return entropy_matched(c, cfg.rate)
    return design_distribution(c, cfg.dsnr_db, cfg.kappa_db)


def base_metadata(cfg: ExperimentConfig, cons: Optional[CodeConstruction] = None) -> dict:
    meta = {
        "tool": "mlhy",
        "tool_version": __version__,
        "config_hash": cfg.hash(),
        "config_full_hash": cfg.full_hash(),
        "mode": cfg.mode,
        "constellation": f"{2 ** cfg.m}-{cfg.kind}",
        "N": cfg.N,
        "rate": cfg.rate,
        "seed": cfg.seed,
        "snr_convention": SNR_CONVENTION,
        "gh_nodes": GH_NODES,
        "crc": "none" if cfg.crc is None else cfg.crc.name,
        "crc_poly": "none" if cfg.crc is None else f"0x{cfg.crc.poly:x}",
    }
    if cons is not None:
        meta["construction_hash"] = cons.content_hash()
        meta["data_positions"] = cons.n_data
        meta["payload_bits"] = cons.payload_bits
    return meta


def write_csv(path, rows, meta: dict, columns=None):
    """CSV with a ``# key: value`` header block."""
    rows = [asdict(r) if hasattr(r, "__dataclass_fields__") else dict(r) for r in rows]
    if columns is None:
        columns = list(rows[0]) if rows else []
    with open(path, "w", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}: {v}\n")
        w = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def read_csv(path):
    """Inverse of :func:`write_csv`: returns ``(meta, rows)`` with string values."""
    meta, lines = {}, []
    with open(path) as fh:
        for line in fh:
            if line.startswith("# "):
                k, _, v = line[2:].rstrip("\n").partition(": ")
                meta[k] = v
            else:
                lines.append(line)
    return meta, list(csv.DictReader(lines))
