"""Constant-composition distribution matching.

The matcher maps ``k`` uniform bits to one of the sequences with a fixed
composition. Encoding is arithmetic coding with exact integer intervals:
the interval for each next symbol is proportional to the number of
completions of the remaining composition, so the map is the lexicographic
unranking of multiset permutations and is exactly invertible.
"""

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .modem import InputDistribution, entropy_bits


@dataclass(frozen=True)
class Composition:
    counts: tuple

    def __post_init__(self):
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")

    @property
    def N(self) -> int:
        return sum(self.counts)

    @property
    def M(self) -> int:
        return len(self.counts)

    def pmf(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=np.float64) / self.N


def multinomial(counts: Sequence[int]) -> int:
    """Exact ``N! / prod(c!)``."""
    total, out = 0, 1
    for c in counts:
        total += c
        out *= math.comb(total, c)
    return out


def log2_multinomial(counts: Sequence[int]) -> float:
    N = sum(counts)
    return (math.lgamma(N + 1) - sum(math.lgamma(c + 1) for c in counts)) / math.log(2)


@dataclass(frozen=True)
class CcdmCode:
    composition: Composition

    @property
    def k(self) -> int:
        """Input length ``floor(log2 multinomial)``."""
        return multinomial(self.composition.counts).bit_length() - 1

    @property
    def N(self) -> int:
        return self.composition.N


def _divergence_term(c: int, p: float) -> float:
    return 0.0 if c == 0 else c * math.log(c / p)


def quantize_distribution(pmf, N: int) -> Composition:
    """N-type closest to ``pmf`` in informational divergence.

    Starts from ``floor(N p)`` and hands out the remaining slots one at a
    time to the symbol with the smallest divergence increase. Ties go to the
    lowest symbol index.
    """
    if N < 1:
        raise ValueError("N must be positive")
    p = np.asarray(pmf.pmf if isinstance(pmf, InputDistribution) else pmf, dtype=np.float64)
    counts = [int(math.floor(N * v)) for v in p]
    while sum(counts) > N:  # guards against floating-point overshoot
        counts[int(np.argmax(counts))] -= 1
    for _ in range(N - sum(counts)):
        best, best_gain = -1, math.inf
        for j, (c, pj) in enumerate(zip(counts, p)):
            if pj <= 0:
                continue
            gain = _divergence_term(c + 1, pj) - _divergence_term(c, pj)
            if gain < best_gain - 1e-15:
                best, best_gain = j, gain
        counts[best] += 1
    return Composition(tuple(counts))


def ccdm_encode(bits, code: CcdmCode) -> np.ndarray:
    """Map ``k`` bits (MSB first) to a sequence with the code's composition."""
    bits = [int(b) for b in np.asarray(bits).ravel()]
    if len(bits) != code.k:
        raise ValueError(f"expected {code.k} input bits, got {len(bits)}")
    r = 0
    for b in bits:
        r = (r << 1) | b
    counts = list(code.composition.counts)
    remaining = code.N
    total = multinomial(counts)
    out = np.empty(code.N, dtype=np.int64)
    for pos in range(code.N):
        for a, ca in enumerate(counts):
            if ca == 0:
                continue
            # completions with symbol a placed here
            size = total * ca // remaining
            if r < size:
                out[pos] = a
                counts[a] -= 1
                total = size
                break
            r -= size
        remaining -= 1
    return out


def ccdm_decode(symbols, code: CcdmCode) -> np.ndarray:
    """Inverse of :func:`ccdm_encode`."""
    sym = np.asarray(symbols, dtype=np.int64).ravel()
    counts = list(code.composition.counts)
    if len(sym) != code.N or tuple(np.bincount(sym, minlength=len(counts))) != tuple(counts):
        raise ValueError("sequence does not have the code composition")
    remaining = code.N
    total = multinomial(counts)
    r = 0
    for s in sym:
        for a in range(s):
            if counts[a]:
                r += total * counts[a] // remaining
        total = total * counts[s] // remaining
        counts[s] -= 1
        remaining -= 1
    k = code.k
    return np.array([(r >> (k - 1 - j)) & 1 for j in range(k)], dtype=np.uint8)


def ccdm_rate_loss(pmf, N: int) -> float:
    """``H(type) - k / N`` for the CCDM built on the quantized composition."""
    comp = quantize_distribution(pmf, N)
    code = CcdmCode(comp)
    return entropy_bits(comp.pmf()) - code.k / N


__all__ = ["Composition", "CcdmCode", "quantize_distribution", "ccdm_encode", "ccdm_decode",
           "ccdm_rate_loss", "multinomial", "log2_multinomial"]
