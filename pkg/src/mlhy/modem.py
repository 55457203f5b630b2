"""Real constellations, Maxwell-Boltzmann inputs, AWGN and bitlevel posteriors.

Labelling is set partitioning by natural index: the symbol with index
``k = sum_l b_l 2^(l-1)`` carries bit ``b_l`` on bitlevel ``l`` (level 1 is
the least significant bit). Fixing the lower levels leaves every
``2^l``-th point, so the intra-subset distance doubles per level.

SNR convention everywhere: ``SNR = E[X^2] / sigma^2`` with the second moment
taken under the input pmf actually used.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.special import logsumexp

from .polar import LLR_MAX

GH_NODES = 128


class DegenerateConditioningError(ValueError):
    """Lower-level bit pattern has zero probability under the pmf."""


@dataclass(frozen=True)
class Constellation:
    kind: str
    m: int
    points: np.ndarray

    @property
    def M(self) -> int:
        return 1 << self.m

    @property
    def labels(self) -> np.ndarray:
        """``(M, m)`` bit labels, column ``l`` is bitlevel ``l + 1``."""
        idx = np.arange(self.M)
        return ((idx[:, None] >> np.arange(self.m)[None, :]) & 1).astype(np.uint8)

    def index_from_bits(self, bits) -> np.ndarray:
        """Symbol indices from bit planes of shape ``(m, ...)``."""
        bits = np.asarray(bits, dtype=np.int64)
        weights = (1 << np.arange(self.m)).reshape((self.m,) + (1,) * (bits.ndim - 1))
        return (bits * weights).sum(axis=0)

    def bits_from_index(self, idx) -> np.ndarray:
        """Bit planes of shape ``(m, ...)`` from symbol indices."""
        idx = np.asarray(idx, dtype=np.int64)
        shifts = np.arange(self.m).reshape((self.m,) + (1,) * idx.ndim)
        return ((idx[None, ...] >> shifts) & 1).astype(np.uint8)

    def min_distance(self) -> float:
        return float(np.min(np.diff(np.sort(self.points))))


def make_constellation(kind: str, m: int) -> Constellation:
    """``ASK`` gives odd integers symmetric around zero, ``PAM`` gives 0..M-1."""
    if m < 1:
        raise ValueError("m must be at least 1")
    M = 1 << m
    kind = kind.upper()
    if kind == "ASK":
        pts = np.arange(-(M - 1), M, 2, dtype=np.float64)
    elif kind == "PAM":
        pts = np.arange(M, dtype=np.float64)
    else:
        raise ValueError(f"unsupported constellation kind {kind!r}")
    pts.setflags(write=False)
    return Constellation(kind, m, pts)


@dataclass(frozen=True)
class InputDistribution:
    pmf: np.ndarray
    nu: Optional[float] = None
    family: str = "mb"

    def __post_init__(self):
        p = np.asarray(self.pmf, dtype=np.float64)
        if np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("pmf must be non-negative and sum to one")

    def entropy(self) -> float:
        return entropy_bits(self.pmf)

    def energy(self, c: Constellation) -> float:
        return float(np.dot(self.pmf, c.points ** 2))


def entropy_bits(p) -> float:
    p = np.asarray(p, dtype=np.float64)
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def maxent_pmf(c: Constellation, nu: float) -> InputDistribution:
    """Maxwell-Boltzmann pmf ``P(x) ~ exp(-nu x^2)``."""
    if nu < 0:
        raise ValueError("nu must be non-negative")
    e = -nu * c.points ** 2
    p = np.exp(e - e.max())
    return InputDistribution(p / p.sum(), float(nu), "mb")


def pair_symmetric_pmf(c: Constellation, nu: float) -> InputDistribution:
    """Maxwell-Boltzmann weights shared by the point pairs ``(2i, 2i+1)``."""
    if nu < 0:
        raise ValueError("nu must be non-negative")
    pts = c.points
    e = -nu * 0.5 * (pts[0::2] ** 2 + pts[1::2] ** 2)
    w = np.repeat(np.exp(e - e.max()), 2)
    return InputDistribution(w / w.sum(), float(nu), "pair")


def uniform_pmf(c: Constellation) -> InputDistribution:
    return maxent_pmf(c, 0.0)


def snr_to_sigma(c: Constellation, pmf: InputDistribution, snr_db: float) -> float:
    return float(np.sqrt(pmf.energy(c) / 10.0 ** (snr_db / 10.0)))


def awgn_transmit(symbols, sigma: float, rng: np.random.Generator) -> np.ndarray:
    """``y = x + z`` with i.i.d. ``N(0, sigma^2)`` noise."""
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(symbols, dtype=np.float64)
    return x + sigma * rng.standard_normal(x.shape)


# ---------------------------------------------------------------------------
# bitlevel posteriors


def _level_masks(c: Constellation):
    """For each (level, lower pattern, bit): boolean mask over points."""
    M, m = c.M, c.m
    P = 1 << (m - 1)
    idx = np.arange(M)
    masks = np.zeros((m, P, 2, M), dtype=bool)
    for lv in range(m):
        low = idx & ((1 << lv) - 1)
        b = (idx >> lv) & 1
        for pat in range(1 << lv):
            for bit in range(2):
                masks[lv, pat, bit] = (low == pat) & (b == bit)
    return masks


@lru_cache(maxsize=16)
def _cached_masks(kind: str, m: int):
    return _level_masks(make_constellation(kind, m))


def _masked_llr(logw, masks):
    """LLR tables from per-point log weights ``(..., M)`` and masks ``(m, P, 2, M)``."""
    w = logw[..., None, None, None, :]
    with np.errstate(divide="ignore"):
        lm = logsumexp(np.where(masks, w, -np.inf), axis=-1)
    l0, l1 = lm[..., 0], lm[..., 1]
    both_dead = np.isneginf(l0) & np.isneginf(l1)
    with np.errstate(invalid="ignore"):
        llr = l0 - l1
    llr = np.where(both_dead, 0.0, llr)
    return np.clip(np.nan_to_num(llr, posinf=LLR_MAX, neginf=-LLR_MAX), -LLR_MAX, LLR_MAX), both_dead


def source_llr_table(c: Constellation, pmf: InputDistribution) -> np.ndarray:
    """``(m, P)`` LLRs of ``X^{B,l}`` given the lower-level pattern, no channel."""
    with np.errstate(divide="ignore"):
        logw = np.log(np.asarray(pmf.pmf))
    llr, _ = _masked_llr(logw, _cached_masks(c.kind, c.m))
    return llr


def channel_llr_table(y, c: Constellation, pmf: InputDistribution, sigma: float) -> np.ndarray:
    """``(N, m, P)`` LLRs of ``X^{B,l}`` given ``y_j`` and the lower-level pattern."""
    y = np.asarray(y, dtype=np.float64)
    with np.errstate(divide="ignore"):
        logp = np.log(np.asarray(pmf.pmf))
    logw = logp[None, :] - (y[:, None] - c.points[None, :]) ** 2 / (2.0 * sigma ** 2)
    llr, _ = _masked_llr(logw, _cached_masks(c.kind, c.m))
    return llr


def bitlevel_posteriors(y: float, c: Constellation, pmf: InputDistribution,
                        lower_bits, sigma: float):
    """Posterior and prior of the next bitlevel given decided lower bits.

    ``lower_bits`` lists bitlevels ``1..l-1``; the returned pairs are
    ``(P(b=0), P(b=1))`` for level ``l`` with and without the observation.
    """
    lower = [int(b) for b in lower_bits]
    lv = len(lower)
    if lv >= c.m:
        raise ValueError("all bitlevels are already decided")
    idx = np.arange(c.M)
    match = np.ones(c.M, dtype=bool)
    for k, b in enumerate(lower):
        match &= ((idx >> k) & 1) == b
    bit = (idx >> lv) & 1
    p = np.asarray(pmf.pmf)
    prior = np.array([p[match & (bit == 0)].sum(), p[match & (bit == 1)].sum()])
    if prior.sum() <= 0:
        raise DegenerateConditioningError(f"lower bits {lower} have zero probability")
    with np.errstate(divide="ignore"):
        logw = np.log(p) - (y - c.points) ** 2 / (2.0 * sigma ** 2)
    l0 = logsumexp(np.where(match & (bit == 0), logw, -np.inf))
    l1 = logsumexp(np.where(match & (bit == 1), logw, -np.inf))
    top = max(l0, l1)
    post = np.exp(np.array([l0, l1]) - top)
    return post / post.sum(), prior / prior.sum()


# ---------------------------------------------------------------------------
# mutual information


@lru_cache(maxsize=8)
def _gh(nodes: int):
    t, w = np.polynomial.hermite.hermgauss(nodes)
    return t, w / np.sqrt(np.pi)


def mutual_information(c: Constellation, pmf: InputDistribution, sigma: float,
                       nodes: int = GH_NODES) -> float:
    """``I(X;Y)`` in bits for the real AWGN channel via Gauss-Hermite quadrature."""
    t, w = _gh(nodes)
    p = np.asarray(pmf.pmf)
    live = p > 0
    pts, p = c.points[live], p[live]
    z = np.sqrt(2.0) * sigma * t                       # (K,)
    d = pts[:, None] - pts[None, :]                    # x - x'
    # log p(y|x')/p(y|x) for y = x + z
    expo = -((d[:, :, None] + z[None, None, :]) ** 2 - z[None, None, :] ** 2) / (2 * sigma ** 2)
    lse = logsumexp(expo, axis=1, b=p[None, :, None])  # (M, K)
    return float(-(p[:, None] * w[None, :] * lse).sum() / np.log(2.0))


def constellation_capacity(c: Constellation, pmf: InputDistribution, snr_db: float,
                           nodes: int = GH_NODES) -> float:
    """Mutual information at ``snr_db`` under the SNR convention of this module."""
    if not np.isfinite(snr_db):
        if snr_db < 0:
            return 0.0
        return pmf.entropy()
    return mutual_information(c, pmf, snr_to_sigma(c, pmf, snr_db), nodes)


def _nu_scale(c: Constellation) -> float:
    e = c.points ** 2
    return 1.0 / max(e.max() - e.min(), 1e-12)


def rate_optimal(c: Constellation, snr_db: float, family: Callable = maxent_pmf,
                 grid: int = 200) -> InputDistribution:
    """Pmf of ``family`` maximizing the mutual information at ``snr_db``.

    A log-spaced grid over ``nu`` is refined by golden-section search around
    the best grid point. ``nu = 0`` is always a candidate.
    """
    scale = _nu_scale(c)
    nus = np.concatenate([[0.0], np.logspace(-5, np.log10(40.0), grid) * scale])

    def neg_mi(nu):
        return -constellation_capacity(c, family(c, max(nu, 0.0)), snr_db)

    vals = np.array([neg_mi(v) for v in nus])
    k = int(np.argmin(vals))
    if 0 < k < len(nus) - 1:
        res = minimize_scalar(neg_mi, bracket=(nus[k - 1], nus[k], nus[k + 1]),
                              method="golden", tol=1e-8)
        if res.fun <= vals[k]:
            return family(c, max(float(res.x), 0.0))
    return family(c, float(nus[k]))


def entropy_matched(c: Constellation, target_rate: float, family: Callable = maxent_pmf,
                    tol: float = 1e-9) -> InputDistribution:
    """Pmf of ``family`` whose entropy equals ``target_rate`` bits (bisection on ``nu``)."""
    if not 0 < target_rate <= c.m:
        raise ValueError(f"target rate must lie in (0, {c.m}]")
    if abs(target_rate - c.m) < 1e-12:
        return family(c, 0.0)
    lo, hi = 0.0, _nu_scale(c)
    while family(c, hi).entropy() > target_rate:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError("target entropy is not reachable")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if family(c, mid).entropy() > target_rate:
            lo = mid
        else:
            hi = mid
        if hi - lo < tol * max(hi, 1e-12):
            break
    return family(c, 0.5 * (lo + hi))


def optimize_nu(c: Constellation, target_rate: Optional[float] = None,
                snr_db: Optional[float] = None, mode: str = "entropy",
                family: Callable = maxent_pmf) -> InputDistribution:
    """``mode="entropy"`` matches ``H(P_X)`` to ``target_rate``;
    ``mode="rate"`` maximizes ``I(X;Y)`` at ``snr_db``."""
    if target_rate is not None and not 0 < target_rate < c.m + 1e-12:
        raise ValueError(f"target rate must lie in (0, {c.m})")
    if mode == "entropy":
        if target_rate is None:
            raise ValueError("entropy mode needs a target rate")
        return entropy_matched(c, target_rate, family)
    if mode == "rate":
        if snr_db is None:
            raise ValueError("rate mode needs an SNR")
        return rate_optimal(c, snr_db, family)
    raise ValueError(f"unknown mode {mode!r}")


def capacity_threshold(c: Constellation, rate: float, pmf_at: Callable[[float], InputDistribution],
                       lo: float = -10.0, hi: float = 40.0, xtol: float = 1e-4) -> float:
    """Smallest SNR in dB at which ``I(X;Y) = rate`` for the pmf chosen by ``pmf_at(snr)``."""
    def gap(snr):
        return constellation_capacity(c, pmf_at(snr), snr) - rate

    return float(brentq(gap, lo, hi, xtol=xtol))


def shaped_threshold(c: Constellation, rate: float, family: Callable = maxent_pmf) -> float:
    return capacity_threshold(c, rate, lambda s: rate_optimal(c, s, family))


def uniform_threshold(c: Constellation, rate: float) -> float:
    u = uniform_pmf(c)
    return capacity_threshold(c, rate, lambda s: u)


def empirical_pmf(symbol_indices, M: int) -> InputDistribution:
    counts = np.bincount(np.asarray(symbol_indices).ravel(), minlength=M).astype(np.float64)
    return InputDistribution(counts / counts.sum(), None, "empirical")
