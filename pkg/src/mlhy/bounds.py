"""Random-coding union bound for i.i.d. inputs over the AWGN channel.

For each outer sample ``(x, y)`` the pairwise error probability
``Pr(i(Xbar; y) >= i(x; y))`` is computed exactly up to grid quantization by
convolving the per-symbol information-density atoms. Atoms are rounded up
to the grid, which can only enlarge the tail, so the bound stays valid.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from ._accel import select
from .modem import Constellation, InputDistribution

MAX_BINS = 1 << 22


class GridOverflowError(RuntimeError):
    """The convolution window exceeded the allotted grid."""


@dataclass
class RcuResult:
    bound: float
    stderr: float
    trials: int
    grid_step: float
    log2_messages: float


def info_density_atoms(y, c: Constellation, pmf: InputDistribution, sigma: float):
    """``i(x_j; y_k)`` in bits for every received sample and candidate point, shape (N, M)."""
    y = np.asarray(y, dtype=np.float64)[:, None]
    logw = -((y - c.points[None, :]) ** 2) / (2 * sigma ** 2)
    p = np.asarray(pmf.pmf)
    with np.errstate(divide="ignore"):
        logp = np.log(p)
    logpy = logsumexp(logw + logp[None, :], axis=1, keepdims=True)
    return (logw - logpy) / math.log(2)


def _tail_loop(atoms, weights, thr):
    """Exact tail ``Pr(sum_k a_k[J_k] >= thr)`` over integer atoms with pruning."""
    N, M = atoms.shape
    amax = np.empty(N, dtype=np.int64)
    amin = np.empty(N, dtype=np.int64)
    big = np.int64(1) << 62
    for k in range(N):
        hi = -big
        lo = big
        for j in range(M):
            if weights[j] > 0:
                hi = max(hi, atoms[k, j])
                lo = min(lo, atoms[k, j])
        amax[k] = hi
        amin[k] = lo
    rmax = np.zeros(N + 1, dtype=np.int64)
    rmin = np.zeros(N + 1, dtype=np.int64)
    for k in range(N - 1, -1, -1):
        rmax[k] = rmax[k + 1] + amax[k]
        rmin[k] = rmin[k + 1] + amin[k]
    if rmax[0] < thr:
        return 0.0
    if rmin[0] >= thr:
        return 1.0
    need = 1
    for k in range(N):
        need += amax[k] - amin[k]
    if need > MAX_BINS:
        need = MAX_BINS
    cur = np.zeros(need)
    nxt = np.zeros(need)
    cur[0] = 1.0
    base = 0          # value represented by cur[0]
    width = 1
    tail = 0.0
    for k in range(N):
        nbase = base + amin[k]
        nwidth = width + amax[k] - amin[k]
        if nwidth > MAX_BINS:
            return -1.0
        for r in range(nwidth):
            nxt[r] = 0.0
        for j in range(M):
            w = weights[j]
            if w == 0:
                continue
            off = atoms[k, j] - amin[k]
            for r in range(width):
                nxt[r + off] += w * cur[r]
        # values below lo_keep can no longer reach thr, values at or above
        # hi_done reach it whatever follows
        lo_keep = thr - rmax[k + 1]
        hi_done = thr - rmin[k + 1]
        start = 0
        if lo_keep > nbase:
            start = lo_keep - nbase
        stop = nwidth
        if hi_done - nbase < stop:
            stop = hi_done - nbase
            if stop < 0:
                stop = 0
            for r in range(stop if stop > start else start, nwidth):
                tail += nxt[r]
        if stop <= start:
            return tail
        width = stop - start
        for r in range(width):
            cur[r] = nxt[start + r]
        base = nbase + start
    return tail


def _tail_numpy(atoms, weights, thr):
    N, M = atoms.shape
    live = weights > 0
    amax = atoms[:, live].max(axis=1)
    amin = atoms[:, live].min(axis=1)
    rmax = np.concatenate([np.cumsum(amax[::-1])[::-1], [0]])
    rmin = np.concatenate([np.cumsum(amin[::-1])[::-1], [0]])
    if rmax[0] < thr:
        return 0.0
    if rmin[0] >= thr:
        return 1.0
    cur = np.ones(1)
    base = 0
    tail = 0.0
    for k in range(N):
        nbase = base + amin[k]
        nwidth = cur.size + amax[k] - amin[k]
        if nwidth > MAX_BINS:
            return -1.0
        nxt = np.zeros(nwidth)
        for j in np.flatnonzero(live):
            off = atoms[k, j] - amin[k]
            nxt[off:off + cur.size] += weights[j] * cur
        start = max(thr - rmax[k + 1] - nbase, 0)
        stop = min(max(thr - rmin[k + 1] - nbase, 0), nwidth)
        tail += nxt[max(stop, start):].sum()
        if stop <= start:
            return float(tail)
        cur = nxt[start:stop]
        base = nbase + start
    return float(tail)


_tail = select(_tail_loop, _tail_numpy)


def pairwise_tail(atoms_bits, weights, threshold_bits, grid_step: float) -> float:
    """Upper estimate of ``Pr(sum_k i(Xbar_k; y_k) >= threshold)`` on a grid.

    Atoms are rounded up and the threshold index is ``ceil(threshold / step)``.
    Since every true event keeps its rounded sum at or above the rounded
    threshold, the result never falls below the exact tail.
    """
    if grid_step <= 0:
        raise ValueError("grid step must be positive")
    atoms = np.ceil(np.asarray(atoms_bits) / grid_step - 1e-9).astype(np.int64)
    thr = int(math.ceil(threshold_bits / grid_step - 1e-9))
    w = np.ascontiguousarray(np.asarray(weights, dtype=np.float64))
    out = _tail(np.ascontiguousarray(atoms), w, thr)
    if out < 0:
        raise GridOverflowError(f"convolution needs more than {MAX_BINS} bins at step {grid_step}")
    return min(float(out), 1.0)


def rcu_bound(c: Constellation, pmf: InputDistribution, sigma: float, N: int, R: float,
              outer_trials: int, grid_step: float = 0.01, rng=None) -> RcuResult:
    """Monte-Carlo RCU bound ``E[min(1, (2^{NR} - 1) Pr(i(Xbar;Y) >= i(X;Y) | X, Y))]``."""
    if outer_trials < 1:
        raise ValueError("need at least one outer trial")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if rng is None:
        rng = np.random.default_rng()
    p = np.asarray(pmf.pmf, dtype=np.float64)
    log2_msgs = N * R
    msgs = 2.0 ** log2_msgs - 1.0
    vals = np.empty(outer_trials)
    for t in range(outer_trials):
        idx = rng.choice(c.M, size=N, p=p)
        y = c.points[idx] + sigma * rng.standard_normal(N)
        atoms = info_density_atoms(y, c, pmf, sigma)
        thr = float(atoms[np.arange(N), idx].sum())
        vals[t] = min(1.0, msgs * pairwise_tail(atoms, p, thr, grid_step))
    se = float(vals.std(ddof=1) / math.sqrt(outer_trials)) if outer_trials > 1 else float("nan")
    return RcuResult(float(vals.mean()), se, outer_trials, grid_step, log2_msgs)
