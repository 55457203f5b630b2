"""Time the hot kernels with numba on and off.

Each backend runs in its own interpreter because MLHY_NUMBA is read at import.

    python benchmarks/bench_kernels.py [--repeat 3] [--frames 20]
"""

import argparse
import json
import os
import subprocess
import sys

WORKLOAD = r"""
import json, sys, time
import numpy as np
from mlhy import _accel
from mlhy.bounds import rcu_bound
from mlhy.construction import CodeConstruction, estimate_bitchannels
from mlhy.modem import make_constellation, maxent_pmf, snr_to_sigma
from mlhy.polar import DATA, DM, FROZEN
from mlhy.shaping import mlhy_decode, mlhy_encode

repeat, frames = int(sys.argv[1]), int(sys.argv[2])
c = make_constellation("ASK", 3)
p = maxent_pmf(c, 0.03)
sigma = snr_to_sigma(c, p, 11.5)
rng = np.random.default_rng(0)
roles = rng.choice([FROZEN, DATA, DM], size=(3, 64), p=[0.3, 0.55, 0.15]).astype(np.int8)
cons = CodeConstruction(roles)


def construction():
    estimate_bitchannels(c, p, sigma, 64, 200, np.random.default_rng(1))


def scl():
    r = np.random.default_rng(2)
    for _ in range(frames):
        msg = r.integers(0, 2, cons.payload_bits, dtype=np.uint8)
        cw = mlhy_encode(msg, cons, p, c, 32, "fork")
        y = c.points[cw.symbols] + sigma * r.standard_normal(64)
        mlhy_decode(y, cons, p, c, sigma, 32, dm_rule="fork")


def rcu():
    rcu_bound(c, p, sigma, 64, 1.64, 20, rng=np.random.default_rng(3))


def best_of(fn):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


out = {"numba": _accel.NUMBA_ENABLED}
for name, fn in (("construction_64x200", construction), (f"scl_L32_{frames}frames", scl),
                 ("rcu_20trials", rcu)):
    fn()  # warm-up (and JIT compile)
    out[name] = best_of(fn)
print(json.dumps(out))
"""


def run(flag, repeat, frames):
    env = dict(os.environ, MLHY_NUMBA=flag)
    proc = subprocess.run([sys.executable, "-c", WORKLOAD, str(repeat), str(frames)], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--frames", type=int, default=20)
    args = ap.parse_args(argv)
    fast = run("1", args.repeat, args.frames)
    slow = run("0", args.repeat, args.frames)
    print(f"{'kernel':<24}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for key in fast:
        if key == "numba":
            continue
        print(f"{key:<24}{fast[key]:>12.4f}{slow[key]:>12.4f}{slow[key] / fast[key]:>10.1f}")


if __name__ == "__main__":
    main()
