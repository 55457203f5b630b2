"""Experiment configuration: YAML in, canonical JSON for hashing."""

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import List, Optional

import yaml

from .crc import CrcSpec

MODES = ("mlhy", "uniform-mlpc", "dm-only")
ENCODER_RULES = ("argmax", "fork", "sample")


@dataclass
class ExperimentConfig:
    mode: str = "mlhy"
    kind: str = "ASK"
    m: int = 3
    N: int = 64
    rate: float = 1.75
    dsnr_db: float = 13.0
    kappa_db: float = 0.0
    n_dm: int = 0
    list_enc: int = 32
    list_dec: int = 32
    encoder_rule: str = "fork"
    crc: Optional[CrcSpec] = None
    snr_db: List[float] = field(default_factory=lambda: [10.0])
    seed: int = 0
    min_frames: int = 0
    min_errors: int = 100
    max_frames: int = 1_000_000
    batch_frames: int = 256
    construction_trials: int = 100_000
    calibration_frames: int = 2000
    rcu_outer_trials: int = 2000
    rcu_grid_step: float = 0.01
    rate_loss_lengths: List[int] = field(default_factory=lambda: [2 ** k for k in range(6, 14)])
    rate_loss_frames: int = 100

    def __post_init__(self):
        if isinstance(self.crc, dict):
            self.crc = CrcSpec(int(self.crc["width"]), int(self.crc["poly"]))
        self.kind = self.kind.upper()
        self.snr_db = [float(s) for s in self.snr_db]
        self.rate_loss_lengths = [int(n) for n in self.rate_loss_lengths]
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        if self.encoder_rule not in ENCODER_RULES:
            raise ValueError(f"encoder_rule must be one of {ENCODER_RULES}")
        if self.N < 1 or self.N & (self.N - 1):
            raise ValueError("N must be a power of two")
        for name in ("m", "list_enc", "list_dec", "batch_frames"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        for name in ("n_dm", "min_frames", "min_errors", "max_frames", "seed",
                     "construction_trials", "calibration_frames", "rcu_outer_trials"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if not 0 < self.rate <= self.m:
            raise ValueError("rate must lie in (0, m]")
        if not self.snr_db:
            raise ValueError("SNR sweep must not be empty")
        if abs(self.rate * self.N - round(self.rate * self.N)) > 1e-9:
            raise ValueError("rate * N must be an integer number of bits")

    @property
    def data_positions(self) -> int:
        return int(round(self.rate * self.N))

    @property
    def crc_len(self) -> int:
        return 0 if self.crc is None else self.crc.width

    @property
    def payload_bits(self) -> int:
        return self.data_positions - self.crc_len

    def to_dict(self) -> dict:
        d = asdict(self)
        d["crc"] = None if self.crc is None else self.crc.to_dict()
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def hash(self, exclude=("snr_db", "min_frames", "min_errors", "max_frames", "batch_frames",
                             "seed", "calibration_frames", "rcu_outer_trials", "rcu_grid_step",
                             "rate_loss_lengths", "rate_loss_frames")) -> str:
        """Digest of the fields that determine the code construction."""
        d = {k: v for k, v in self.to_dict().items() if k not in exclude}
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]

    def full_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:16]


def load_config(path) -> ExperimentConfig:
    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: config must be a mapping")
    return ExperimentConfig.from_dict(raw)


def save_config(cfg: ExperimentConfig, path):
    Path(path).write_text(yaml.safe_dump(cfg.to_dict(), sort_keys=True))
