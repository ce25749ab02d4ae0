"""Time the batch coverage kernel on both backends.

Spawns one subprocess per backend (the backend is fixed at import time
by the DYNSUB_NO_NUMBA environment flag) and prints a small table.

Usage: python3 benchmarks/bench_kernels.py [--samples N] [--items M]
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = """
import json, sys, time
import numpy as np
from dynsub import _kernels

n_items, n_sup, n_samples, reps = json.loads(sys.argv[1])
rng = np.random.default_rng(0)
weights = rng.random(n_items)
cover = (rng.random((n_items, n_sup)) < 0.2).astype(np.uint8)
samples = (rng.random((n_samples, n_sup)) < 0.5).astype(np.uint8)

_kernels.coverage_batch_eval(weights, cover, samples)  # warm up / compile
best = float("inf")
for _ in range(reps):
    t0 = time.perf_counter()
    out = _kernels.coverage_batch_eval(weights, cover, samples)
    best = min(best, time.perf_counter() - t0)
total = float(out.sum())
print(json.dumps({"backend": _kernels.backend_name(),
                  "best_s": best, "checksum": total}))
"""


def run(no_numba, shape):
    env = dict(os.environ)
    if no_numba:
        env["DYNSUB_NO_NUMBA"] = "1"
    else:
        env.pop("DYNSUB_NO_NUMBA", None)
    res = subprocess.run([sys.executable, "-c", WORKER, json.dumps(shape)],
                         env=env, capture_output=True, text=True, check=True)
    return json.loads(res.stdout)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--items", type=int, default=400)
    ap.add_argument("--support", type=int, default=60)
    ap.add_argument("--samples", type=int, default=20000)
    ap.add_argument("--reps", type=int, default=5)
    args = ap.parse_args()
    shape = [args.items, args.support, args.samples, args.reps]
    print(f"batch of {args.samples} sets, {args.items} universe items, "
          f"{args.support} support elements, best of {args.reps}")
    rows = [run(no_numba=True, shape=shape)]
    r = run(no_numba=False, shape=shape)
    if r["backend"] != "numpy":
        rows.append(r)
    else:
        print("numba not importable; only the numpy fallback was timed")
    for row in rows:
        rate = args.samples / row["best_s"]
        print(f"  {row['backend']:>6}: {row['best_s'] * 1e3:8.2f} ms "
              f"({rate:,.0f} sets/s)  checksum {row['checksum']:.6f}")
    if len(rows) == 2 and abs(rows[0]["checksum"] - rows[1]["checksum"]) > 1e-6:
        print("warning: backend checksums disagree", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
