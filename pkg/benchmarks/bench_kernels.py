#!/usr/bin/env python3
"""Compare the numba kernels against their pure-numpy fallbacks.

The two code paths are selected at import time by ``BCDI_DISABLE_NUMBA``,
so each variant runs in a subprocess with the flag set accordingly. The
script reports wall time per call and the agreement between the outputs.

Usage: python3 benchmarks/bench_kernels.py [--sizes 16 24 32] [--repeats 3]

Note that the package's hot path is FFT-bound (numpy's pocketfft); numba
covers only the dense validation oracle and the bilinear interpolation
baseline, which are the loop-heavy kernels.
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = """
import json, os, sys, time
import numpy as np
from bcdi._kernels import NUMBA_ENABLED, bilinear_zoom, dense_transfer_matrix

sizes = json.loads(sys.argv[1])
repeats = int(sys.argv[2])
results = {"numba": NUMBA_ENABLED, "dense": {}, "zoom": {}, "checksum": {}}

for n in sizes:
    dense_transfer_matrix(n, n, 2 * n, 2 * n, n, n)  # warm-up / JIT compile
    t0 = time.perf_counter()
    for _ in range(repeats):
        mat = dense_transfer_matrix(n, n, 2 * n, 2 * n, n, n)
    results["dense"][str(n)] = (time.perf_counter() - t0) / repeats
    results["checksum"][f"dense{n}"] = float(np.abs(mat).sum())

rng = np.random.default_rng(0)
img = rng.uniform(0, 1, (1024, 1024))
bilinear_zoom(img, 1.7)  # warm-up / JIT compile
t0 = time.perf_counter()
for _ in range(repeats):
    out = bilinear_zoom(img, 1.7)
results["zoom"]["1024"] = (time.perf_counter() - t0) / repeats
results["checksum"]["zoom1024"] = float(out.sum())

print(json.dumps(results))
"""


def run_variant(disable_numba, sizes, repeats):
    env = dict(os.environ, BCDI_DISABLE_NUMBA="1" if disable_numba else "0")
    out = subprocess.run([sys.executable, "-c", WORKER, json.dumps(sizes),
                          str(repeats)], env=env, capture_output=True,
                         text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 24])
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    print("running numpy fallback ...")
    ref = run_variant(True, args.sizes, args.repeats)
    print("running numba path ...")
    jit = run_variant(False, args.sizes, args.repeats)
    if not jit["numba"]:
        print("warning: numba unavailable; both runs used the numpy path")

    print(f"\n{'kernel':<18}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>9}")
    for group, key in [("dense", s) for s in map(str, args.sizes)] + [("zoom", "1024")]:
        a = ref[group][key] * 1e3
        b = jit[group][key] * 1e3
        name = f"{group} {key}x{key}"
        print(f"{name:<18}{a:>12.2f}{b:>12.2f}{a / b:>8.1f}x")

    drift = max(abs(ref["checksum"][k] - jit["checksum"][k])
                / max(abs(ref["checksum"][k]), 1.0) for k in ref["checksum"])
    print(f"\nmax relative checksum drift between paths: {drift:.2e}")
    if drift > 1e-9:
        print("ERROR: kernel paths disagree")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
