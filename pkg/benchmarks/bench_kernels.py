"""Compare the numba and numpy scan backends.

    python benchmarks/bench_kernels.py [--repeat 20] [--json out.json]

Prints median microseconds per call for the closest-pair and nearest-gallery
kernels at a few problem sizes, plus one short end-to-end packing run per
backend. Both backends share the BLAS products, so the difference measured is
the scan itself.
"""

import argparse
import json
import os
import statistics
import time

import numpy as np

from hyperpack import _kernels
from hyperpack.sphere import random_units

SIZES = [
    # (rows, gallery rows, dim)
    (50, 256, 32),
    (256, 1024, 64),
    (1000, 1024, 64),
    (4000, 1024, 64),
]


def _median_us(fn, repeat):
    fn()  # compile / warm caches
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return statistics.median(times) * 1e6


def bench_scans(repeat):
    rng = np.random.default_rng(0)
    rows = []
    for n, m, dim in SIZES:
        X = random_units(n, dim, rng)
        G = random_units(m, dim, rng)
        reps = max(3, repeat // (1 + n // 1000))
        row = {"n": n, "gallery": m, "dim": dim}
        for backend in ("numba", "numpy"):
            row[f"min_pair_{backend}"] = _median_us(lambda: _kernels.min_pair(X, backend), reps)
            row[f"nearest_{backend}"] = _median_us(lambda: _kernels.nearest(X, G, backend), reps)
        rows.append(row)
    return rows


def bench_packing(iters):
    """End-to-end iterations per second; the backend flag is process-wide."""
    import subprocess
    import sys

    code = (
        "import time;from hyperpack import *;"
        "g=synthesize_gallery(ManifoldSpec(dim=64,n_points=512,seed=1));"
        "c=PackingConfig(n_id=300,dim=64,n_itr=%d,alpha=0.5);optimize(PackingConfig(n_id=8,dim=4,n_itr=2,alpha=0.0));"
        "t=time.perf_counter();optimize(c,g);print(time.perf_counter()-t)" % iters
    )
    out = {}
    for flag in ("1", "0"):
        env = dict(os.environ, HYPERPACK_NUMBA=flag)
        sec = float(subprocess.check_output([sys.executable, "-c", code], env=env, text=True))
        out["numba" if flag == "1" else "numpy"] = iters / sec
    return out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--iters", type=int, default=300, help="packing iterations per backend")
    ap.add_argument("--json", help="write raw numbers here")
    args = ap.parse_args()
    if not _kernels.HAS_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    scans = bench_scans(args.repeat)
    print(f"{'n':>5} {'gal':>5} {'dim':>4} | {'min_pair us':>23} | {'nearest us':>23}")
    print(f"{'':>16} | {'numba':>11} {'numpy':>11} | {'numba':>11} {'numpy':>11}")
    for r in scans:
        print(f"{r['n']:>5} {r['gallery']:>5} {r['dim']:>4} | "
              f"{r['min_pair_numba']:>11.0f} {r['min_pair_numpy']:>11.0f} | "
              f"{r['nearest_numba']:>11.0f} {r['nearest_numpy']:>11.0f}")
    packing = bench_packing(args.iters)
    print(f"\npacking n=300 dim=64 alpha=0.5: numba {packing['numba']:.0f} it/s, "
          f"numpy {packing['numpy']:.0f} it/s")
    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"scans": scans, "packing_it_per_s": packing}, fh, indent=2)


if __name__ == "__main__":
    main()
