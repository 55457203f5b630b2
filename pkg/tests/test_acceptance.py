"""Acceptance criteria 1-8. Each test prints one ``CRITERION k: PASS|FAIL`` line.

Criteria 5 and 6 read the FER and RCU sweeps written by ``results/run_all.sh``
(10^5 frames per point); the hashes in the CSV headers must match the
checked-in configs and constructions.
"""

import itertools
from pathlib import Path

import numpy as np
import pytest

from mlhy.ccdm import CcdmCode, Composition, ccdm_decode, ccdm_encode, ccdm_rate_loss
from mlhy.config import load_config
from mlhy.construction import (CodeConstruction, design_distribution, estimate_bitchannels,
                               polarization_fractions)
from mlhy.modem import (bitlevel_posteriors, entropy_matched, make_constellation, maxent_pmf,
                        mutual_information, pair_symmetric_pmf, shaped_threshold, snr_to_sigma,
                        uniform_threshold)
from mlhy.polar import polar_transform, sc_pass
from mlhy.sim import Link, crossing, fer_sweep, rate_loss_point, read_csv

pytestmark = pytest.mark.acceptance

ROOT = Path(__file__).resolve().parents[1]
RESULTS = ROOT / "results"

# pinned tolerances
TOL_ANCHOR_DB = 0.05
TOL_GAIN_DB = 0.05
TOL_ASYM_DB = 0.10
GAIN_WINDOW_DB = (0.45, 0.85)
RCU_GAP_FIG3_DB = 0.5
RCU_GAP_FIG4_DB = 0.3
TOL_POSTERIOR = 1e-9
TOL_CHAIN = 1e-9


def report(capsys, k, ok, detail):
    with capsys.disabled():
        print(f"\nCRITERION {k}: {'PASS' if ok else 'FAIL'} ({detail})")
    assert ok, detail


def test_criterion_1_capacity_anchors(capsys):
    c = make_constellation("ASK", 3)
    ts, tu = shaped_threshold(c, 1.75), uniform_threshold(c, 1.75)
    ok = abs(ts - 10.16) <= TOL_ANCHOR_DB and abs(tu - 10.84) <= TOL_ANCHOR_DB
    report(capsys, 1, ok, f"shaped {ts:.4f} dB, uniform {tu:.4f} dB, tol {TOL_ANCHOR_DB}")


def test_criterion_2_shaping_gain(capsys):
    c = make_constellation("ASK", 3)
    gain = uniform_threshold(c, 1.75) - shaped_threshold(c, 1.75)
    report(capsys, 2, abs(gain - 0.68) <= TOL_GAIN_DB, f"gain {gain:.4f} dB vs 0.68 +- {TOL_GAIN_DB}")


def test_criterion_3_pam_asymmetry(capsys):
    c = make_constellation("PAM", 2)
    gap = shaped_threshold(c, 1.25, pair_symmetric_pmf) - shaped_threshold(c, 1.25)
    report(capsys, 3, abs(gap - 0.34) <= TOL_ASYM_DB, f"gap {gap:.4f} dB vs 0.34 +- {TOL_ASYM_DB}")


@pytest.mark.slow
def test_criterion_4_rate_loss_orderings(capsys):
    cfg = load_config(ROOT / "configs" / "rate_loss_ask8.yaml")
    rows = {N: rate_loss_point(cfg, 8, N) for N in (64, 128, 256, 512, 1024, 8192)}
    below = all(rows[N].mlhy < rows[N].ccdm for N in (64, 128, 256, 512, 1024))
    reversed_ = rows[8192].mlhy > rows[8192].ccdm
    ccdm_m = [ccdm_rate_loss(entropy_matched(make_constellation("ASK", m), r), 64)
              for m, r in ((2, 1.625), (3, 2.375), (4, 3.25))]
    increasing = ccdm_m[0] < ccdm_m[1] < ccdm_m[2]
    detail = ", ".join(f"N={N} {r.mlhy:.4f}/{r.ccdm:.4f}" for N, r in rows.items())
    detail += "; CCDM N=64 M=4,8,16: " + "/".join(f"{v:.4f}" for v in ccdm_m)
    report(capsys, 4, below and reversed_ and increasing, "MLHY/CCDM " + detail)


def _sweep(name, kind):
    path = RESULTS / f"{name}.{kind}.csv"
    if not path.exists():
        return None, None
    meta, rows = read_csv(path)
    cfg = load_config(ROOT / "configs" / f"{name}.yaml")
    cons = CodeConstruction.load(RESULTS / f"{name}.construction.json")
    if meta.get("config_hash") != cfg.hash() or meta.get("construction_hash") != cons.content_hash():
        raise AssertionError(f"{path} was produced from a different config or construction")
    return meta, rows


def _fer_at_target(name):
    meta, rows = _sweep(name, "fer")
    if rows is None:
        return float("nan"), f"{name}.fer.csv missing"
    frames = [int(r["frames"]) for r in rows]
    s = crossing([float(r["snr_db"]) for r in rows], [float(r["fer"]) for r in rows])
    return s, f"{name}: {len(rows)} points, max {max(frames)} frames"


def _rcu_at_target(name):
    meta, rows = _sweep(name, "rcu")
    if rows is None:
        return float("nan")
    return crossing([float(r["snr_db"]) for r in rows], [float(r["rcu"]) for r in rows])


def test_criterion_5_ask8_end_to_end(capsys):
    s_mlhy, info = _fer_at_target("ask8_mlhy")
    s_unif, _ = _fer_at_target("ask8_uniform")
    s_rcu = _rcu_at_target("ask8_mlhy")
    gain = s_unif - s_mlhy
    gap = s_mlhy - s_rcu
    ok = (GAIN_WINDOW_DB[0] <= gain <= GAIN_WINDOW_DB[1]) and abs(gap) <= RCU_GAP_FIG3_DB
    report(capsys, 5, ok, f"FER=1e-2 at MLHY {s_mlhy:.3f}, uniform {s_unif:.3f}, RCU {s_rcu:.3f} dB; "
                          f"gain {gain:.3f} in {GAIN_WINDOW_DB}, MLHY-RCU {gap:.3f} <= {RCU_GAP_FIG3_DB}; "
                          f"{info}")


def test_criterion_6_pam4_end_to_end(capsys):
    s_mlhy, info = _fer_at_target("pam4_mlhy")
    s_rcu = _rcu_at_target("pam4_mlhy")
    gap = s_mlhy - s_rcu
    report(capsys, 6, abs(gap) <= RCU_GAP_FIG4_DB,
           f"FER=1e-2 at MLHY {s_mlhy:.3f}, RCU {s_rcu:.3f} dB; gap {gap:.3f} <= {RCU_GAP_FIG4_DB}; {info}")


def _brute_sc_error(rng, N):
    """Largest gap between SC posteriors and brute-force marginals along the decided path."""
    n = N.bit_length() - 1
    G = np.ones((1, 1), dtype=np.int64)
    for _ in range(n):
        G = np.kron(G, np.array([[1, 0], [1, 1]]))
    G = G[[int(format(i, f"0{n}b")[::-1], 2) for i in range(N)]]
    p1 = 1 / (1 + np.exp(-2 * rng.standard_normal(N)))
    post = np.stack([1 - p1, p1], axis=1)
    words = np.array(list(itertools.product([0, 1], repeat=N)))
    w = np.prod(post[np.arange(N), (words @ G) % 2], axis=1)
    res = sc_pass(post)
    got = res.posterior("channel")
    mask = np.ones(len(words), dtype=bool)
    worst = 0.0
    for i in range(N):
        a1 = (w * mask)[words[:, i] == 1].sum() / (w * mask).sum()
        worst = max(worst, abs(got[i] - a1))
        mask &= words[:, i] == res.u[i]
    return worst


@pytest.mark.slow
def test_criterion_7_property_suites(capsys):
    rng = np.random.default_rng(7)
    checks = {}
    checks["involution"] = all(
        np.array_equal(polar_transform(polar_transform(u)), u)
        for N in (2 ** k for k in range(0, 11))
        for u in [rng.integers(0, 2, (2, N), dtype=np.uint8)])
    checks["sc_posterior"] = max(_brute_sc_error(rng, N) for N in (2, 4, 8, 16)) < TOL_POSTERIOR
    roundtrip = True
    for name in ("ask8_mlhy", "pam4_mlhy"):
        cfg = load_config(ROOT / "configs" / f"{name}.yaml")
        link = Link(cfg, CodeConstruction.load(RESULTS / f"{name}.construction.json"))
        frng = np.random.default_rng(1)
        roundtrip &= not any(link.frame(frng, 1e-3)[0] for _ in range(1000))
    checks["roundtrip_1000"] = roundtrip
    ccdm_ok = True
    for counts in ((4, 4, 4), (6, 3, 2, 1), (5, 7), (3, 3, 3, 3)):
        code = CcdmCode(Composition(counts))
        for bits in itertools.product((0, 1), repeat=code.k):
            x = ccdm_encode(np.array(bits), code)
            ccdm_ok &= tuple(np.bincount(x, minlength=len(counts))) == counts
            ccdm_ok &= tuple(ccdm_decode(x, code)) == bits
    checks["ccdm"] = ccdm_ok
    c = make_constellation("ASK", 3)
    p = maxent_pmf(c, 0.05)
    chain = 0.0
    for y in rng.normal(0, 4, 50):
        lik = np.exp(-((y - c.points) ** 2) / 2) * p.pmf
        sym = lik / lik.sum()
        for s in range(c.M):
            bits = c.labels[s]
            prod = 1.0
            for lvl in range(c.m):
                post, _ = bitlevel_posteriors(y, c, p, bits[:lvl], 1.0)
                prod *= post[bits[lvl]]
            chain = max(chain, abs(prod - sym[s]))
    checks["chain_rule"] = chain < TOL_CHAIN
    q = design_distribution(c, 13.0, -1.0)
    sigma = snr_to_sigma(c, q, 13.0)
    info = mutual_information(c, q, sigma)
    vals = [polarization_fractions(estimate_bitchannels(c, q, sigma, N, T, np.random.default_rng(N)),
                                   0.1)["info_per_symbol"]
            for N, T in ((64, 8000), (256, 2500), (1024, 1200))]
    checks["polarization_trend"] = vals[0] < vals[1] < vals[2] < info
    detail = ", ".join(f"{k}={'ok' if v else 'bad'}" for k, v in checks.items())
    detail += "; |I|/N per symbol " + "/".join(f"{v:.3f}" for v in vals) + f" -> I={info:.3f}"
    report(capsys, 7, all(checks.values()), detail)


@pytest.mark.slow
def test_criterion_8_worker_determinism(capsys):
    cfg = load_config(ROOT / "configs" / "ask8_mlhy.yaml")
    cfg.snr_db = [11.0, 11.5]
    cfg.max_frames = 512
    cfg.min_errors = 10 ** 6
    cfg.calibration_frames = 200
    cons = CodeConstruction.load(RESULTS / "ask8_mlhy.construction.json")
    one = fer_sweep(cfg, cons, workers=1)
    eight = fer_sweep(cfg, cons, workers=8)
    a = [(r.frames, r.frame_errors, r.bit_errors) for r in one]
    b = [(r.frames, r.frame_errors, r.bit_errors) for r in eight]
    report(capsys, 8, a == b, f"workers=1 {a}, workers=8 {b}")
