"""Binary polar transform and a successive-cancellation list engine.

The engine works on one or several bitlevels chained in multistage fashion.
Each bit position carries a role (frozen, data or shaping) and two
log-likelihood ratios are tracked for every bit: one computed from the
channel-free source prior and one from the channel posterior. The same
engine therefore runs the shaping encoder and the receiver; only the
:class:`DecisionPolicy` differs.

LLRs are ``log P(bit=0) - log P(bit=1)`` in natural-log units.

Indexing convention: ``x = u G_N`` with ``G_N = B_N F^{(x)n}``. The transform
permutes ``u`` by bit reversal and then runs the ``F^{(x)n}`` butterflies.
The decoder equivalently bit-reverses the channel LLRs and walks the
``F^{(x)n}`` tree, which visits ``u`` in natural order.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._accel import NUMBA_ENABLED, jit, select
from .crc import CrcSpec, crc_check

FROZEN, DATA, DM = 0, 1, 2
ROLE_NAMES = {FROZEN: "frozen", DATA: "data", DM: "dm"}

LLR_MAX = 500.0

_DM_RULES = {"argmax": 0, "fork": 1, "sample": 2}
_METRICS = {"channel": 0, "source": 1, "word": 2}


@dataclass(frozen=True)
class PolarParams:
    n: int

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be non-negative")

    @property
    def N(self) -> int:
        return 1 << self.n

    @classmethod
    def from_length(cls, N: int) -> "PolarParams":
        n = int(N).bit_length() - 1
        if N < 1 or (1 << n) != N:
            raise ValueError(f"block length {N} is not a power of two")
        return cls(n)


def bit_reversal_permutation(n: int) -> np.ndarray:
    """Image of every 0-based index under n-bit reversal."""
    if n < 0:
        raise ValueError("n must be non-negative")
    idx = np.arange(1 << n, dtype=np.int64)
    out = np.zeros_like(idx)
    for b in range(n):
        out |= ((idx >> b) & 1) << (n - 1 - b)
    return out


def _butterfly_loop(x):
    N = x.shape[0]
    h = 1
    while h < N:
        for start in range(0, N, 2 * h):
            for j in range(start, start + h):
                x[j] ^= x[j + h]
        h *= 2
    return x


def _butterfly_numpy(x):
    N = x.shape[-1]
    h = 1
    while h < N:
        v = x.reshape(x.shape[:-1] + (-1, 2, h))
        v[..., 0, :] ^= v[..., 1, :]
        h *= 2
    return x


_butterfly = select(_butterfly_loop, _butterfly_numpy)


def polar_transform(u, params: Optional[PolarParams] = None) -> np.ndarray:
    """Compute ``x = u G_N`` over GF(2). The map is its own inverse.

    Accepts a single word of shape ``(N,)`` or a batch ``(..., N)``.
    """
    u = np.asarray(u)
    N = u.shape[-1]
    if params is None:
        params = PolarParams.from_length(N)
    elif params.N != N:
        raise ValueError(f"expected {params.N} bits, got {N}")
    perm = bit_reversal_permutation(params.n)
    x = np.ascontiguousarray(u[..., perm], dtype=np.uint8)
    if x.ndim == 1:
        return _butterfly(x)
    return _butterfly_numpy(x)


def boxplus(a, b):
    """Exact LLR of the XOR of two independent bits."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    return (np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
            + np.log1p(np.exp(-np.abs(a + b))) - np.log1p(np.exp(-np.abs(a - b))))


def genie_llrs(leaf_llr, x_perm):
    """Bit-channel LLRs given the true preceding bits, vectorized over a batch.

    ``leaf_llr`` and ``x_perm`` have shape ``(T, N)`` and are in the
    bit-reversed arrangement used by the decoder (``x'[k] = x[rev(k)]``).
    Returns ``(T, N)`` LLRs of ``U_i`` given ``u_{<i}`` in natural order.
    """
    L = np.asarray(leaf_llr, dtype=np.float64)
    x = np.asarray(x_perm, dtype=np.uint8)
    N = L.shape[-1]
    if N == 1:
        return L.copy()
    h = N // 2
    top, bot = L[:, :h], L[:, h:]
    c = x[:, :h] ^ x[:, h:]
    left = genie_llrs(boxplus(top, bot), c)
    right = genie_llrs(bot + (1.0 - 2.0 * c) * top, x[:, h:])
    return np.concatenate([left, right], axis=1)


def llr_from_posteriors(p) -> np.ndarray:
    """LLRs from an ``(N, 2)`` array of ``(p0, p1)`` pairs."""
    p = np.asarray(p, dtype=np.float64)
    if p.ndim != 2 or p.shape[1] != 2:
        raise ValueError("posteriors must have shape (N, 2)")
    if np.any(p < -1e-12) or np.any(np.abs(p.sum(axis=1) - 1.0) > 1e-9):
        raise ValueError("posterior pairs must be probabilities summing to one")
    with np.errstate(divide="ignore"):
        llr = np.log(p[:, 0]) - np.log(p[:, 1])
    return np.clip(np.nan_to_num(llr, nan=0.0, posinf=LLR_MAX, neginf=-LLR_MAX), -LLR_MAX, LLR_MAX)


# ---------------------------------------------------------------------------
# list kernel


def _f_loop(dst, d0, src, s0, h):
    for j in range(h):
        a = src[s0 + j]
        b = src[s0 + h + j]
        m = min(abs(a), abs(b))
        if (a < 0) != (b < 0):
            m = -m
        dst[d0 + j] = m + np.log1p(np.exp(-abs(a + b))) - np.log1p(np.exp(-abs(a - b)))


def _f_numpy(dst, d0, src, s0, h):
    dst[d0:d0 + h] = boxplus(src[s0:s0 + h], src[s0 + h:s0 + 2 * h])


def _g_loop(dst, d0, src, s0, beta, b0, h):
    for j in range(h):
        if beta[b0 + j]:
            dst[d0 + j] = src[s0 + h + j] - src[s0 + j]
        else:
            dst[d0 + j] = src[s0 + h + j] + src[s0 + j]


def _g_numpy(dst, d0, src, s0, beta, b0, h):
    sgn = 1.0 - 2.0 * beta[b0:b0 + h]
    dst[d0:d0 + h] = src[s0 + h:s0 + 2 * h] + sgn * src[s0:s0 + h]


def _combine_loop(dst, left, l0, right, h):
    for j in range(h):
        dst[j] = left[l0 + j] ^ right[j]
        dst[h + j] = right[j]


def _combine_numpy(dst, left, l0, right, h):
    dst[:h] = left[l0:l0 + h] ^ right[:h]
    dst[h:2 * h] = right[:h]


_f_layer = select(_f_loop, _f_numpy)
_g_layer = select(_g_loop, _g_numpy)
_combine = select(_combine_loop, _combine_numpy)


@jit
def _log_prob(u, llr):
    # log P(bit = u) for an LLR, stable for large magnitudes
    z = -llr if u == 0 else llr
    if z > 0:
        return -(z + np.log1p(np.exp(-z)))
    return -np.log1p(np.exp(z))


@jit
def _own(ptr, refc, s, p):
    """Give path ``p`` exclusive ownership of its layer-``s`` buffer."""
    b = ptr[s, p]
    if refc[s, b] > 1:
        refc[s, b] -= 1
        nb = 0
        while refc[s, nb] != 0:
            nb += 1
        refc[s, nb] = 1
        ptr[s, p] = nb
        return nb
    return b


def _scl_kernel(src_tab, ch_tab, perm, roles, values, uniforms, L,
                fork_data, dm_rule, use_channel, need_src, metric_kind, record):
    N = perm.shape[0]
    m = roles.shape[0]
    n = 0
    while (1 << n) < N:
        n += 1
    nl = n + 1

    alpha_s = np.zeros((L, 2 * N))
    alpha_c = np.zeros((L, 2 * N))
    aptr = np.zeros((nl, L), dtype=np.int64)
    arefc = np.zeros((nl, L), dtype=np.int64)
    beta = np.zeros((L, 2 * N), dtype=np.uint8)
    bptr = np.zeros((nl, L), dtype=np.int64)
    brefc = np.zeros((nl, L), dtype=np.int64)

    active = np.zeros(L, dtype=np.bool_)
    active[0] = True
    pm = np.zeros(L)
    pm_src = np.zeros(L)
    pm_ch = np.zeros(L)
    lowpat = np.zeros((L, N), dtype=np.int64)
    newpat = np.zeros((L, N), dtype=np.int64)
    xlev = np.zeros((L, N), dtype=np.uint8)
    steps = m * N
    hist_bit = np.zeros((steps, L), dtype=np.uint8)
    hist_par = np.zeros((steps, L), dtype=np.int64)
    rec_src = np.zeros((m, N))
    rec_ch = np.zeros((m, N))

    llr_s = np.zeros(L)
    llr_c = np.zeros(L)
    cand_metric = np.zeros(2 * L)
    keep = np.zeros((L, 2), dtype=np.bool_)
    bits = np.zeros(L, dtype=np.uint8)
    cur = np.zeros(N, dtype=np.uint8)
    nxt = np.zeros(N, dtype=np.uint8)

    for lv in range(m):
        # fresh trees for this level: every path owns buffer p on each layer
        for s in range(nl):
            for p in range(L):
                aptr[s, p] = p
                bptr[s, p] = p
                arefc[s, p] = 1 if active[p] else 0
                brefc[s, p] = 1 if active[p] else 0
        for p in range(L):
            if not active[p]:
                continue
            for k in range(N):
                j = perm[k]
                pat = lowpat[p, j]
                if need_src:
                    alpha_s[p, N + k] = src_tab[j, lv, pat]
                if use_channel:
                    alpha_c[p, N + k] = ch_tab[j, lv, pat]

        for i in range(N):
            t = lv * N + i
            if i == 0:
                top = n
            else:
                k = 0
                while ((i >> k) & 1) == 0:
                    k += 1
                top = k + 1
            for p in range(L):
                if not active[p]:
                    continue
                s = top - 1
                if i != 0:
                    # right child at layer s: g step using the left partial sums
                    src_buf = aptr[s + 1, p]
                    dst_buf = _own(aptr, arefc, s, p)
                    bb = bptr[s, p]
                    h = 1 << s
                    if need_src:
                        _g_layer(alpha_s[dst_buf], h, alpha_s[src_buf], 2 * h, beta[bb], h, h)
                    if use_channel:
                        _g_layer(alpha_c[dst_buf], h, alpha_c[src_buf], 2 * h, beta[bb], h, h)
                    s -= 1
                while s >= 0:
                    src_buf = aptr[s + 1, p]
                    dst_buf = _own(aptr, arefc, s, p)
                    h = 1 << s
                    if need_src:
                        _f_layer(alpha_s[dst_buf], h, alpha_s[src_buf], 2 * h, h)
                    if use_channel:
                        _f_layer(alpha_c[dst_buf], h, alpha_c[src_buf], 2 * h, h)
                    s -= 1
                b0 = aptr[0, p]
                llr_s[p] = alpha_s[b0, 1]
                llr_c[p] = alpha_c[b0, 1]

            if record:
                rec_src[lv, i] = llr_s[0]
                rec_ch[lv, i] = llr_c[0]

            role = roles[lv, i]
            forking = (role == 1 and fork_data) or (role == 2 and dm_rule == 1)
            for p in range(L):
                if not active[p]:
                    continue
                hist_par[t, p] = p
            if forking:
                for p in range(L):
                    for b in range(2):
                        if active[p]:
                            inc = 0.0
                            if metric_kind == 0:
                                inc = _log_prob(b, llr_c[p])
                            elif role == 2 or metric_kind == 2:
                                inc = _log_prob(b, llr_s[p])
                            cand_metric[2 * p + b] = pm[p] + inc
                        else:
                            cand_metric[2 * p + b] = -np.inf
                order = np.argsort(-cand_metric, kind="mergesort")
                for p in range(L):
                    keep[p, 0] = False
                    keep[p, 1] = False
                for r in range(L):
                    c = order[r]
                    if active[c // 2]:
                        keep[c // 2, c % 2] = True
                # prune paths that lost both children
                for p in range(L):
                    if active[p] and not keep[p, 0] and not keep[p, 1]:
                        active[p] = False
                        for s in range(nl):
                            arefc[s, aptr[s, p]] -= 1
                            brefc[s, bptr[s, p]] -= 1
                for p in range(L):
                    if not active[p] or not (keep[p, 0] or keep[p, 1]):
                        continue
                    if keep[p, 0] and keep[p, 1]:
                        q = 0
                        while active[q]:
                            q += 1
                        active[q] = True
                        for s in range(nl):
                            aptr[s, q] = aptr[s, p]
                            arefc[s, aptr[s, p]] += 1
                            bptr[s, q] = bptr[s, p]
                            brefc[s, bptr[s, p]] += 1
                        pm[q] = pm[p]
                        pm_src[q] = pm_src[p]
                        pm_ch[q] = pm_ch[p]
                        llr_s[q] = llr_s[p]
                        llr_c[q] = llr_c[p]
                        hist_par[t, q] = p
                        bits[q] = 1
                        bits[p] = 0
                        # the clone is already decided; mark it so the loop skips it
                        keep[q, 0] = False
                        keep[q, 1] = False
                        pm[q] = cand_metric[2 * p + 1]
                        pm[p] = cand_metric[2 * p]
                    elif keep[p, 0]:
                        bits[p] = 0
                        pm[p] = cand_metric[2 * p]
                    else:
                        bits[p] = 1
                        pm[p] = cand_metric[2 * p + 1]
            else:
                for p in range(L):
                    if not active[p]:
                        continue
                    if role == 0:
                        b = values[lv, i]
                    elif role == 1:
                        b = values[lv, i]
                    elif dm_rule == 0:
                        b = 1 if llr_s[p] < 0 else 0
                    else:
                        p1 = 1.0 / (1.0 + np.exp(min(llr_s[p], 700.0)))
                        b = 1 if uniforms[lv, i] < p1 else 0
                    bits[p] = b
                    if metric_kind == 0:
                        pm[p] += _log_prob(b, llr_c[p])
                    elif role == 2 or metric_kind == 2:
                        pm[p] += _log_prob(b, llr_s[p])

            # commit decisions and propagate partial sums
            for p in range(L):
                if not active[p]:
                    continue
                b = bits[p]
                hist_bit[t, p] = b
                pm_src[p] += _log_prob(b, llr_s[p])
                if use_channel:
                    pm_ch[p] += _log_prob(b, llr_c[p])
                cur[0] = b
                s = 0
                j = i
                while (j & 1) == 1 and s < n:
                    h = 1 << s
                    _combine(nxt, beta[bptr[s, p]], h, cur, h)
                    for r in range(2 * h):
                        cur[r] = nxt[r]
                    s += 1
                    j >>= 1
                if s < n:
                    bb = _own(bptr, brefc, s, p)
                    h = 1 << s
                    for r in range(h):
                        beta[bb, h + r] = cur[r]
                else:
                    for r in range(N):
                        xlev[p, r] = cur[r]

        if lv + 1 < m:
            # carry this level's code bits into the lower-bit pattern of each path
            for q in range(L):
                if not active[q]:
                    continue
                a = q
                for t in range(lv * N + N - 1, lv * N - 1, -1):
                    a = hist_par[t, a]
                for j in range(N):
                    newpat[q, j] = lowpat[a, j] | (np.int64(xlev[q, perm[j]]) << lv)
            for q in range(L):
                if active[q]:
                    for j in range(N):
                        lowpat[q, j] = newpat[q, j]

    # rank survivors and trace back their decisions
    keyed = np.empty(L)
    for p in range(L):
        keyed[p] = -pm[p] if active[p] else np.inf
    order = np.argsort(keyed, kind="mergesort")
    u_out = np.zeros((L, m, N), dtype=np.uint8)
    out_pm = np.full(L, -np.inf)
    out_src = np.full(L, -np.inf)
    out_ch = np.full(L, -np.inf)
    out_alive = np.zeros(L, dtype=np.bool_)
    for r in range(L):
        p = order[r]
        if not active[p]:
            continue
        out_alive[r] = True
        out_pm[r] = pm[p]
        out_src[r] = pm_src[p]
        out_ch[r] = pm_ch[p]
        a = p
        for t in range(steps - 1, -1, -1):
            u_out[r, t // N, t % N] = hist_bit[t, a]
            a = hist_par[t, a]
    return u_out, out_pm, out_src, out_ch, out_alive, rec_src, rec_ch


_scl_kernel = jit(_scl_kernel)


# ---------------------------------------------------------------------------
# public engine


@dataclass
class DecisionPolicy:
    """Per-position decision rule for the list engine.

    ``roles`` holds FROZEN / DATA / DM per (level, index). ``values`` gives the
    bit used when a position is not searched: the frozen value, or the data
    bit when ``fork_data`` is off (encoder side, genie runs). DM positions
    follow ``dm_rule``: ``"argmax"`` of the source posterior, ``"fork"``
    (list search on the source metric) or ``"sample"`` against ``uniforms``.
    ``metric`` chooses the path metric: ``"channel"`` accumulates the channel
    log-posterior of every decision, ``"source"`` the source log-posterior of
    DM decisions only and ``"word"`` the source log-posterior of every
    decision, i.e. the log-probability of the whole word under the prior.
    """

    roles: np.ndarray
    values: Optional[np.ndarray] = None
    fork_data: bool = True
    dm_rule: str = "argmax"
    metric: str = "channel"
    uniforms: Optional[np.ndarray] = None

    def __post_init__(self):
        roles = np.asarray(self.roles, dtype=np.int8)
        if roles.ndim == 1:
            roles = roles[None, :]
        if roles.size and (roles.min() < 0 or roles.max() > 2):
            raise ValueError("roles must be FROZEN, DATA or DM")
        self.roles = roles
        if self.values is None:
            self.values = np.zeros(roles.shape, dtype=np.uint8)
        vals = np.asarray(self.values, dtype=np.int64).reshape(roles.shape)
        if vals.size and (vals.min() < 0 or vals.max() > 1):
            raise ValueError("decision values must be binary")
        self.values = vals.astype(np.uint8)
        if self.dm_rule not in _DM_RULES:
            raise ValueError(f"unknown dm_rule {self.dm_rule!r}")
        if self.metric not in _METRICS:
            raise ValueError(f"unknown metric {self.metric!r}")
        if self.uniforms is None:
            self.uniforms = np.full(roles.shape, 0.5)
        self.uniforms = np.asarray(self.uniforms, dtype=np.float64).reshape(roles.shape)

    @classmethod
    def all_frozen(cls, N: int, values=None) -> "DecisionPolicy":
        return cls(np.zeros(N, dtype=np.int8), values=values, fork_data=False)

    @classmethod
    def hard_decision(cls, N: int) -> "DecisionPolicy":
        """Every bit is data; with list size one this is plain SC argmax."""
        return cls(np.ones(N, dtype=np.int8))


@dataclass
class ListResult:
    """Ranked survivors of a list pass, best first."""

    u: np.ndarray          # (paths, m, N)
    metric: np.ndarray     # selection metric per path
    source_logprob: np.ndarray
    channel_logprob: np.ndarray
    best: int = 0
    crc_ok: Optional[bool] = None
    llr_source: Optional[np.ndarray] = field(default=None, repr=False)
    llr_channel: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def best_u(self) -> np.ndarray:
        return self.u[self.best]


def _leaf_table(llr, N, m):
    t = np.asarray(llr, dtype=np.float64)
    if t.ndim == 1:
        t = t.reshape(N, 1, 1)
    elif t.ndim == 2:
        t = t.reshape(N, m, 1)
    return np.ascontiguousarray(np.clip(t, -LLR_MAX, LLR_MAX))


def list_pass(src_llr, ch_llr, policy: DecisionPolicy, list_size: int = 1,
              record: bool = False) -> ListResult:
    """Run the multilevel list engine.

    ``src_llr`` / ``ch_llr`` are leaf LLR tables of shape ``(N, m, P)``
    indexed by symbol position, level and the integer pattern of the lower
    level code bits of that symbol (``P = 2^(m-1)``). Single-level callers can
    pass plain ``(N,)`` arrays. ``ch_llr=None`` skips the channel tree.
    """
    if list_size < 1:
        raise ValueError("list size must be at least one")
    m, N = policy.roles.shape
    params = PolarParams.from_length(N)
    use_channel = ch_llr is not None
    src = np.zeros((N, m, 1)) if src_llr is None else _leaf_table(src_llr, N, m)
    ch = _leaf_table(ch_llr, N, m) if use_channel else np.zeros((N, m, 1))
    if src.shape[:2] != (N, m) or ch.shape[:2] != (N, m):
        raise ValueError("leaf tables do not match the policy shape")
    if policy.metric == "channel" and not use_channel:
        raise ValueError("channel metric requires channel LLRs")
    perm = bit_reversal_permutation(params.n)
    need_src = policy.metric in ("source", "word") or bool(np.any(policy.roles == DM)) or record
    u, pm, ps, pc, alive, rs, rc = _scl_kernel(
        src, ch, perm, policy.roles, policy.values, policy.uniforms, int(list_size),
        bool(policy.fork_data), _DM_RULES[policy.dm_rule], use_channel, need_src,
        _METRICS[policy.metric], bool(record))
    keep = np.flatnonzero(alive)
    return ListResult(u=u[keep], metric=pm[keep], source_logprob=ps[keep],
                      channel_logprob=pc[keep],
                      llr_source=rs if record else None,
                      llr_channel=rc if record else None)


@dataclass
class ScResult:
    u: np.ndarray
    x: np.ndarray
    logprob: float
    llr_channel: np.ndarray
    llr_source: np.ndarray

    def posterior(self, which: str = "channel") -> np.ndarray:
        """``P(U_i = 1 | ...)`` along the decided path."""
        llr = self.llr_channel if which == "channel" else self.llr_source
        return 1.0 / (1.0 + np.exp(np.clip(llr, -700, 700)))


def sc_pass(channel_posteriors, prior_posteriors=None,
            policy: Optional[DecisionPolicy] = None) -> ScResult:
    """Successive cancellation over one polar block.

    ``channel_posteriors`` and ``prior_posteriors`` are ``(N, 2)`` arrays of
    ``P(x_j = 0), P(x_j = 1)``; the prior defaults to uniform. The default
    policy decides every bit by argmax of the channel posterior.
    """
    ch = llr_from_posteriors(channel_posteriors)
    N = ch.shape[0]
    src = np.zeros(N) if prior_posteriors is None else llr_from_posteriors(prior_posteriors)
    if policy is None:
        policy = DecisionPolicy.hard_decision(N)
    if policy.roles.shape != (1, N):
        raise ValueError("policy length does not match the block")
    res = list_pass(src, ch, policy, 1, record=True)
    u = res.u[0, 0]
    logprob = res.metric[0] if policy.metric in ("source", "word") else res.channel_logprob[0]
    return ScResult(u=u, x=polar_transform(u), logprob=float(logprob),
                    llr_channel=res.llr_channel[0], llr_source=res.llr_source[0])


@dataclass
class SclCandidate:
    u: np.ndarray
    x: np.ndarray
    metric: float


@dataclass
class SclResult:
    candidates: list
    best: int
    crc_ok: Optional[bool]

    @property
    def u(self) -> np.ndarray:
        return self.candidates[self.best].u

    @property
    def x(self) -> np.ndarray:
        return self.candidates[self.best].x


def data_bits(u, roles) -> np.ndarray:
    """Bits on DATA positions in (level, index) order."""
    u = np.asarray(u).reshape(np.shape(roles))
    return u[np.asarray(roles) == DATA]


def scl_pass(channel_posteriors, prior_posteriors=None,
             policy: Optional[DecisionPolicy] = None, list_size: int = 8,
             crc: Optional[CrcSpec] = None) -> SclResult:
    """Successive cancellation list decoding of one polar block.

    With ``crc`` the chosen path is the best-metric survivor whose DATA bits
    end in a valid CRC; if none passes, the best-metric path is returned and
    ``crc_ok`` is False.
    """
    ch = llr_from_posteriors(channel_posteriors)
    N = ch.shape[0]
    src = np.zeros(N) if prior_posteriors is None else llr_from_posteriors(prior_posteriors)
    if policy is None:
        policy = DecisionPolicy.hard_decision(N)
    res = list_pass(src, ch, policy, list_size)
    cands = [SclCandidate(u=res.u[r, 0], x=polar_transform(res.u[r, 0]), metric=float(res.metric[r]))
             for r in range(res.u.shape[0])]
    best, ok = 0, None
    if crc is not None:
        ok = False
        for r, c in enumerate(cands):
            if crc_check(data_bits(c.u, policy.roles[0]), crc):
                best, ok = r, True
                break
    return SclResult(candidates=cands, best=best, crc_ok=ok)


__all__ = [
    "FROZEN", "DATA", "DM", "LLR_MAX", "NUMBA_ENABLED", "PolarParams", "DecisionPolicy",
    "ListResult", "ScResult", "SclResult", "bit_reversal_permutation", "polar_transform",
    "boxplus", "genie_llrs", "list_pass", "sc_pass", "scl_pass", "data_bits",
    "llr_from_posteriors",
]
