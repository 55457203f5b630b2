"""Monte-Carlo bit-channel entropies and Data / Frozen / DM selection.

For every bitlevel ``l`` and index ``i`` two conditional entropies are
estimated with genie-aided multistage SC (true bits fed forward):
``h_source = H(U^l_i | V^l_i)`` from the input pmf alone and
``h_channel = H(U^l_i | V^l_i, Y)`` with the AWGN observation added.
``V^l_i`` collects the preceding bits of level ``l`` and the code bits of
all lower levels.
"""

import hashlib
import json
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from . import __version__
from ._accel import jit, select
from .config import ExperimentConfig
from .modem import (Constellation, InputDistribution, constellation_capacity, make_constellation,
                    rate_optimal, snr_to_sigma, source_llr_table)
from .polar import (DATA, DM, FROZEN, LLR_MAX, ROLE_NAMES, bit_reversal_permutation, genie_llrs,
                    polar_transform)

MIN_TRIALS = 1000
_LN2 = np.log(2.0)


def binary_entropy_from_llr(llr) -> np.ndarray:
    """``h_b(P(bit = 1))`` in bits for LLRs ``log P0/P1``."""
    a = np.abs(np.asarray(llr, dtype=np.float64))
    e = np.exp(-a)
    return (a * e / (1.0 + e) + np.log1p(e)) / _LN2


def _genie_batch_loop(leaf, xperm, u):
    T, N = leaf.shape
    out = np.empty((T, N))
    n = 0
    while (1 << n) < N:
        n += 1
    # layer s lives at offset 2^s; beta holds left-sibling partial sums
    alpha = np.empty(2 * N)
    beta = np.zeros(2 * N, dtype=np.uint8)
    cur = np.empty(N, dtype=np.uint8)
    nxt = np.empty(N, dtype=np.uint8)
    for t in range(T):
        for k in range(N):
            alpha[N + k] = leaf[t, k]
        for i in range(N):
            if i == 0:
                s = n - 1
            else:
                k = 0
                while ((i >> k) & 1) == 0:
                    k += 1
                h = 1 << k
                for j in range(h):
                    a = alpha[2 * h + j]
                    b = alpha[3 * h + j]
                    alpha[h + j] = b - a if beta[h + j] else b + a
                s = k - 1
            while s >= 0:
                h = 1 << s
                for j in range(h):
                    a = alpha[2 * h + j]
                    b = alpha[3 * h + j]
                    mm = min(abs(a), abs(b))
                    if (a < 0) != (b < 0):
                        mm = -mm
                    alpha[h + j] = mm + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))
                s -= 1
            out[t, i] = alpha[1]
            cur[0] = u[t, i]
            s = 0
            j = i
            while (j & 1) == 1 and s < n:
                h = 1 << s
                for r in range(h):
                    nxt[r] = beta[h + r] ^ cur[r]
                    nxt[h + r] = cur[r]
                for r in range(2 * h):
                    cur[r] = nxt[r]
                s += 1
                j >>= 1
            if s < n:
                h = 1 << s
                for r in range(h):
                    beta[h + r] = cur[r]
    return out


def _genie_batch_numpy(leaf, xperm, u):
    return genie_llrs(leaf, xperm)


_genie_batch = select(_genie_batch_loop, _genie_batch_numpy)


@dataclass
class BitchannelStats:
    h_source: np.ndarray            # (m, N)
    h_channel: np.ndarray           # (m, N), NaN when no channel was simulated
    se_source: np.ndarray
    se_channel: np.ndarray
    trials: int
    sigma: Optional[float] = None
    pmf: Optional[np.ndarray] = None
    low_trials: bool = False

    @property
    def m(self) -> int:
        return self.h_source.shape[0]

    @property
    def N(self) -> int:
        return self.h_source.shape[1]

    def to_dict(self) -> dict:
        return {
            "h_source": self.h_source.tolist(),
            "h_channel": np.where(np.isnan(self.h_channel), None, self.h_channel).tolist(),
            "se_source": self.se_source.tolist(),
            "se_channel": np.where(np.isnan(self.se_channel), None, self.se_channel).tolist(),
            "trials": self.trials,
            "sigma": self.sigma,
            "pmf": None if self.pmf is None else list(map(float, self.pmf)),
            "low_trials": self.low_trials,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "BitchannelStats":
        def arr(v):
            return np.array([[np.nan if e is None else e for e in row] for row in v], dtype=np.float64)

        return cls(arr(d["h_source"]), arr(d["h_channel"]), arr(d["se_source"]),
                   arr(d["se_channel"]), int(d["trials"]), d.get("sigma"),
                   None if d.get("pmf") is None else np.array(d["pmf"]), bool(d.get("low_trials")))


def _level_channel_llr(y, idx, lv, c: Constellation, logp, sigma):
    """LLR of bitlevel ``lv`` given ``y`` and the true lower bits, per element."""
    pts = c.points
    pidx = np.arange(c.M)
    low = idx & ((1 << lv) - 1)
    match = (pidx[None, None, :] & ((1 << lv) - 1)) == low[..., None]
    bit = (pidx >> lv) & 1
    logw = logp[None, None, :] - (y[..., None] - pts[None, None, :]) ** 2 / (2.0 * sigma ** 2)
    with np.errstate(divide="ignore"):
        l0 = logsumexp(np.where(match & (bit == 0), logw, -np.inf), axis=-1)
        l1 = logsumexp(np.where(match & (bit == 1), logw, -np.inf), axis=-1)
    with np.errstate(invalid="ignore"):
        llr = l0 - l1
    return np.clip(np.nan_to_num(llr, nan=0.0, posinf=LLR_MAX, neginf=-LLR_MAX), -LLR_MAX, LLR_MAX)


def estimate_bitchannels(c: Constellation, pmf: InputDistribution, sigma: Optional[float],
                         N: int, trials: int, rng: np.random.Generator,
                         batch: Optional[int] = None) -> BitchannelStats:
    """Monte-Carlo estimate of both entropy families for every (level, index).

    ``sigma=None`` estimates only ``h_source`` (shaping-only codes).
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    low = trials < MIN_TRIALS
    if low:
        warnings.warn(f"{trials} trials is below the recommended {MIN_TRIALS}", stacklevel=2)
    m, M = c.m, c.M
    n = N.bit_length() - 1
    perm = bit_reversal_permutation(n)
    p = np.asarray(pmf.pmf)
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    src_tab = source_llr_table(c, pmf)
    if batch is None:
        batch = max(1, min(trials, (1 << 19) // (N * M)))
    acc = np.zeros((2, m, N))
    acc2 = np.zeros((2, m, N))
    done = 0
    while done < trials:
        T = min(batch, trials - done)
        idx = rng.choice(M, size=(T, N), p=p)
        if sigma is not None:
            y = c.points[idx] + sigma * rng.standard_normal((T, N))
        for lv in range(m):
            xbits = np.ascontiguousarray(((idx >> lv) & 1).astype(np.uint8)[:, perm])
            pat = idx & ((1 << lv) - 1)
            leaf = src_tab[lv][pat][:, perm]
            ubits = polar_transform(((idx >> lv) & 1).astype(np.uint8))
            h = binary_entropy_from_llr(_genie_batch(np.ascontiguousarray(leaf), xbits, ubits))
            acc[0, lv] += h.sum(axis=0)
            acc2[0, lv] += (h * h).sum(axis=0)
            if sigma is not None:
                leaf = _level_channel_llr(y, idx, lv, c, logp, sigma)[:, perm]
                h = binary_entropy_from_llr(_genie_batch(np.ascontiguousarray(leaf), xbits, ubits))
                acc[1, lv] += h.sum(axis=0)
                acc2[1, lv] += (h * h).sum(axis=0)
        done += T
    mean = acc / trials
    var = np.maximum(acc2 / trials - mean ** 2, 0.0)
    se = np.sqrt(var / max(trials - 1, 1))
    if sigma is None:
        mean[1] = np.nan
        se[1] = np.nan
    return BitchannelStats(mean[0], mean[1], se[0], se[1], trials, sigma, p.copy(), low)


def design_distribution(c: Constellation, snr_design_db: float, kappa_db: float = 0.0,
                        target_rate: Optional[float] = None) -> InputDistribution:
    """Rate-optimal Maxwell-Boltzmann pmf at ``snr_design_db + kappa_db``."""
    return rate_optimal(c, snr_design_db + kappa_db)


@dataclass
class CodeConstruction:
    roles: np.ndarray                       # (m, N) FROZEN / DATA / DM
    config: dict = field(default_factory=dict)
    stats: Optional[BitchannelStats] = None
    pmf: Optional[np.ndarray] = None
    crc_len: int = 0
    meta: dict = field(default_factory=dict)

    @property
    def m(self) -> int:
        return self.roles.shape[0]

    @property
    def N(self) -> int:
        return self.roles.shape[1]

    def count(self, role: int) -> int:
        return int(np.sum(self.roles == role))

    @property
    def n_data(self) -> int:
        return self.count(DATA)

    @property
    def payload_bits(self) -> int:
        return self.n_data - self.crc_len

    def to_dict(self) -> dict:
        return {
            "classification": [[ROLE_NAMES[int(r)] for r in row] for row in self.roles],
            "config": self.config,
            "counts": {"data": self.n_data, "dm": self.count(DM), "frozen": self.count(FROZEN),
                       "crc": self.crc_len, "payload": self.payload_bits},
            "crc_len": self.crc_len,
            "meta": self.meta,
            "pmf": None if self.pmf is None else [float(v) for v in self.pmf],
            "stats": None if self.stats is None else self.stats.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    def content_hash(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()[:16]

    @classmethod
    def from_dict(cls, d: dict) -> "CodeConstruction":
        names = {v: k for k, v in ROLE_NAMES.items()}
        roles = np.array([[names[r] for r in row] for row in d["classification"]], dtype=np.int8)
        stats = None if d.get("stats") is None else BitchannelStats.from_dict(d["stats"])
        pmf = None if d.get("pmf") is None else np.array(d["pmf"])
        return cls(roles, d.get("config", {}), stats, pmf, int(d.get("crc_len", 0)), d.get("meta", {}))

    @classmethod
    def from_json(cls, text: str) -> "CodeConstruction":
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "CodeConstruction":
        with open(path) as fh:
            return cls.from_json(fh.read())


def select_sets(stats: BitchannelStats, n_data: int, n_dm: int, crc_len: int = 0,
                config: Optional[dict] = None) -> CodeConstruction:
    """Pick DM positions by lowest ``h_source``, Frozen by highest ``h_channel``.

    ``n_data`` positions (payload plus CRC) remain as Data. Ties go to the
    lexicographically smaller ``(level, index)``.
    """
    m, N = stats.m, stats.N
    total = m * N
    n_frozen = total - n_data - n_dm
    if n_data < crc_len or n_dm < 0 or n_frozen < 0:
        raise ValueError(f"infeasible counts: data={n_data}, dm={n_dm}, frozen={n_frozen}, crc={crc_len}")
    roles = np.full(total, DATA, dtype=np.int8)
    hs = stats.h_source.ravel()
    order = np.argsort(hs, kind="stable")
    dm = order[:n_dm]
    roles[dm] = DM
    if n_frozen:
        hc = stats.h_channel.ravel()
        if np.any(np.isnan(hc)):
            raise ValueError("frozen positions need channel entropies")
        rest = np.flatnonzero(roles == DATA)
        fr = rest[np.argsort(-hc[rest], kind="stable")[:n_frozen]]
        roles[fr] = FROZEN
    return CodeConstruction(roles.reshape(m, N), dict(config or {}), stats,
                            None if stats.pmf is None else stats.pmf.copy(), crc_len)


def construct(cfg: ExperimentConfig, rng: Optional[np.random.Generator] = None) -> CodeConstruction:
    """Full pipeline for a config: design pmf, entropies, set selection."""
    if rng is None:
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, 0x5EED]))
    c = make_constellation(cfg.kind, cfg.m)
    if cfg.mode == "mlhy":
        pmf = design_distribution(c, cfg.dsnr_db, cfg.kappa_db)
        n_dm = cfg.n_dm
    elif cfg.mode == "uniform-mlpc":
        pmf = make_uniform(c)
        n_dm = 0
    else:
        from .modem import entropy_matched
        pmf = entropy_matched(c, cfg.rate)
        n_dm = cfg.m * cfg.N - cfg.data_positions
    sigma = None if cfg.mode == "dm-only" else snr_to_sigma(c, pmf, cfg.dsnr_db)
    stats = estimate_bitchannels(c, pmf, sigma, cfg.N, cfg.construction_trials, rng)
    cons = select_sets(stats, cfg.data_positions, n_dm, cfg.crc_len, cfg.to_dict())
    cons.pmf = np.asarray(pmf.pmf).copy()
    cons.meta = {
        "tool_version": __version__,
        "config_hash": cfg.hash(),
        "estimator": "genie-aided multistage SC, mean binary entropy of bit posteriors",
        "pmf_nu": pmf.nu,
        "sigma_design": sigma,
        "design_snr_db": cfg.dsnr_db,
        "pmf_snr_db": cfg.dsnr_db + cfg.kappa_db if cfg.mode == "mlhy" else None,
        "seed": cfg.seed,
    }
    return cons


def make_uniform(c: Constellation) -> InputDistribution:
    return InputDistribution(np.full(c.M, 1.0 / c.M), 0.0, "mb")


def polarization_fractions(stats: BitchannelStats, delta: float) -> dict:
    """Fractions of positions below ``delta``, above ``1 - delta`` and in between.

    Also reports ``|H'_U and L'_{U|Y}| / N``, the per-symbol size of the
    set that both looks uniform to the source and is reliable given ``Y``.
    """
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    out = {}
    for name, h in (("source", stats.h_source), ("channel", stats.h_channel)):
        if np.all(np.isnan(h)):
            continue
        lo = float(np.mean(h < delta))
        hi = float(np.mean(h > 1 - delta))
        out[name] = {"low": lo, "high": hi, "unpolarized": 1.0 - lo - hi}
    if "channel" in out:
        info = (stats.h_source > 1 - delta) & (stats.h_channel < delta)
        out["info_per_symbol"] = float(info.sum()) / stats.N
    return out


def information_rate(c: Constellation, pmf: InputDistribution, sigma: float) -> float:
    from .modem import mutual_information
    return mutual_information(c, pmf, sigma)


__all__ = [
    "BitchannelStats", "CodeConstruction", "estimate_bitchannels", "select_sets",
    "design_distribution", "polarization_fractions", "construct", "binary_entropy_from_llr",
    "constellation_capacity",
]
