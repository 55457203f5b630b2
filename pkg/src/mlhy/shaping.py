"""Multilevel Honda-Yamamoto encoder and multistage list receiver."""

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .construction import CodeConstruction
from .crc import CrcSpec, crc_check, crc_compute
from .modem import (Constellation, InputDistribution, channel_llr_table, empirical_pmf,
                    entropy_bits, source_llr_table)
from .polar import DATA, DM, DecisionPolicy, list_pass, polar_transform

ENCODER_RULES = ("argmax", "fork", "sample")


@dataclass
class Codeword:
    symbols: np.ndarray        # (N,) symbol indices
    x_planes: np.ndarray       # (m, N) code bits per level
    u_planes: np.ndarray       # (m, N)
    shaping_logprob: float = 0.0
    word_logprob: float = 0.0
    uniforms: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return self.symbols.shape[0]


def _source_table(c: Constellation, pmf: InputDistribution, N: int) -> np.ndarray:
    tab = source_llr_table(c, pmf)
    return np.ascontiguousarray(np.broadcast_to(tab[None], (N,) + tab.shape))


def place_message(msg, construction: CodeConstruction, crc: Optional[CrcSpec] = None) -> np.ndarray:
    """Data-position values: payload in (level, index) order, CRC on the last slots."""
    msg = np.asarray(msg, dtype=np.uint8).ravel()
    crc_len = 0 if crc is None else crc.width
    if crc_len != construction.crc_len:
        raise ValueError("CRC width does not match the construction")
    if msg.size != construction.payload_bits:
        raise ValueError(f"message must have {construction.payload_bits} bits, got {msg.size}")
    word = msg if crc is None else np.concatenate([msg, crc_compute(msg, crc)])
    values = np.zeros(construction.roles.shape, dtype=np.uint8)
    values[construction.roles == DATA] = word
    return values


def mlhy_encode(msg, construction: CodeConstruction, pmf: InputDistribution, c: Constellation,
                list_size: int = 1, rule: str = "argmax", crc: Optional[CrcSpec] = None,
                rng: Optional[np.random.Generator] = None, metric: str = "source") -> Codeword:
    """Shape and encode one frame.

    ``rule`` decides the DM positions: ``"argmax"`` (deterministic),
    ``"fork"`` (list search keeping the ``list_size`` most probable shaping
    choices) or ``"sample"`` (randomized, draws from ``rng``).
    """
    if rule not in ENCODER_RULES:
        raise ValueError(f"rule must be one of {ENCODER_RULES}")
    if list_size < 1:
        raise ValueError("list size must be at least one")
    values = place_message(msg, construction, crc)
    uniforms = None
    if rule == "sample":
        if rng is None:
            raise ValueError("randomized encoding needs an rng")
        uniforms = rng.random(construction.roles.shape)
    policy = DecisionPolicy(construction.roles, values, fork_data=False, dm_rule=rule,
                            metric=metric, uniforms=uniforms)
    res = list_pass(_source_table(c, pmf, construction.N), None, policy,
                    list_size if rule == "fork" else 1)
    u = res.u[0]
    x = polar_transform(u)
    return Codeword(symbols=c.index_from_bits(x), x_planes=x, u_planes=u,
                    shaping_logprob=float(res.metric[0]), word_logprob=float(res.source_logprob[0]),
                    uniforms=uniforms)


@dataclass
class DecodeResult:
    payload: np.ndarray
    u_planes: np.ndarray
    symbols: np.ndarray
    crc_ok: Optional[bool]
    metric: float
    paths: int
    level_errors: Optional[np.ndarray] = None


def mlhy_decode(y, construction: CodeConstruction, pmf: InputDistribution, c: Constellation,
                sigma: float, list_size: int = 32, crc: Optional[CrcSpec] = None,
                dm_rule: str = "argmax", uniforms: Optional[np.ndarray] = None,
                reference: Optional[Codeword] = None) -> DecodeResult:
    """Multistage list decoding over all bitlevels.

    Every path carries its own lower-level decisions. ``dm_rule`` must mirror
    the encoder: ``"argmax"`` re-derives DM bits per path from the source
    posterior, ``"sample"`` does the same against the shared ``uniforms`` and
    ``"fork"`` treats them as unknown bits, which is required after list
    encoding since its shaping choices are not a function of the past.
    With ``crc`` the best surviving path whose data bits pass the check is
    returned.
    """
    if dm_rule not in ENCODER_RULES:
        raise ValueError(f"dm_rule must be one of {ENCODER_RULES}")
    if (dm_rule == "sample") != (uniforms is not None):
        raise ValueError("uniforms are required exactly for the sample rule")
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (construction.N,):
        raise ValueError(f"expected {construction.N} channel outputs")
    policy = DecisionPolicy(construction.roles, fork_data=True, dm_rule=dm_rule,
                            metric="channel", uniforms=uniforms)
    src = _source_table(c, pmf, construction.N) if construction.count(DM) else None
    res = list_pass(src, channel_llr_table(y, c, pmf, sigma), policy, list_size)
    mask = construction.roles == DATA
    best, ok = 0, None
    if crc is not None:
        ok = False
        for r in range(res.u.shape[0]):
            if crc_check(res.u[r][mask], crc):
                best, ok = r, True
                break
    u = res.u[best]
    data = u[mask]
    payload = data[: construction.payload_bits]
    x = polar_transform(u)
    level_errors = None
    if reference is not None:
        level_errors = (u != reference.u_planes).sum(axis=1)
    return DecodeResult(payload=payload, u_planes=u, symbols=c.index_from_bits(x), crc_ok=ok,
                        metric=float(res.metric[best]), paths=int(res.u.shape[0]),
                        level_errors=level_errors)


def rate_loss(codewords, construction: CodeConstruction, M: Optional[int] = None) -> float:
    """Empirical-entropy rate loss ``H(P_hat) - |U| / N`` of a set of codewords.

    ``|U|`` counts the positions carrying uniform data bits.
    """
    codewords = list(codewords)
    if not codewords:
        raise ValueError("need at least one codeword")
    if M is None:
        M = 1 << construction.m
    sym = np.concatenate([cw.symbols for cw in codewords])
    h = entropy_bits(empirical_pmf(sym, M).pmf)
    rate = construction.n_data / construction.N
    if h < rate:
        warnings.warn("empirical entropy below the data rate: degenerate sample", stacklevel=2)
    return h - rate
