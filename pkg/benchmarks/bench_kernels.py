"""Compare the compiled and numpy theta-series backends.

    python benchmarks/bench_kernels.py [--repeat 5] [--json out.json]

Times the raw series on batches of points and one end-to-end workload
(the L=12 two-magnon spectrum, run in a subprocess per backend so the
import-time selection applies).
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from inozemtsev import _kernel

END_TO_END = (
    "import time; from inozemtsev.bethe_two import full_spectrum; "
    "from inozemtsev.chain_model import ChainParams; "
    "t=time.perf_counter(); full_spectrum(ChainParams(12, 1.0)); print(time.perf_counter()-t)"
)


def series_points(n: int, seed: int = 0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    return rng.uniform(-np.pi, np.pi, n) + 1j * rng.uniform(-3, 3, n)


def time_series(fn, v, tau, repeat: int) -> float:
    return min(timeit.repeat(lambda: fn(v, tau), number=1, repeat=repeat))


def end_to_end(pure: bool) -> float:
    env = dict(os.environ, INO_PURE_PYTHON="1" if pure else "0")
    out = subprocess.run([sys.executable, "-c", END_TO_END], env=env, capture_output=True, text=True, check=True)
    return float(out.stdout.strip())


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--json", help="write results here")
    args = ap.parse_args(argv)

    if _kernel.compiled_theta_series is None:
        print("compiled extension not built; only the numpy backend is available", file=sys.stderr)
        return 1

    tau = 1j * 0.8
    rows = []
    for n in (1, 10, 100, 1000, 10000):
        v = series_points(n)
        a = _kernel.python_theta_series(v, tau)[0]
        b = _kernel.compiled_theta_series(v, tau)[0]
        agree = float(np.max(np.abs(a - b)))
        tp = time_series(_kernel.python_theta_series, v, tau, args.repeat)
        tc = time_series(_kernel.compiled_theta_series, v, tau, args.repeat)
        rows.append({"points": n, "python_s": tp, "cython_s": tc, "speedup": tp / tc, "max_diff": agree})

    print(f"{'points':>8} {'python [s]':>12} {'cython [s]':>12} {'speedup':>8} {'max diff':>10}")
    for r in rows:
        print(f"{r['points']:>8} {r['python_s']:>12.3e} {r['cython_s']:>12.3e} {r['speedup']:>8.1f} {r['max_diff']:>10.1e}")

    e2e = {"python_s": end_to_end(True), "cython_s": end_to_end(False)}
    e2e["speedup"] = e2e["python_s"] / e2e["cython_s"]
    print(f"\nfull_spectrum(L=12, kappa=1): python {e2e['python_s']:.2f} s, cython {e2e['cython_s']:.2f} s, x{e2e['speedup']:.1f}")

    if args.json:
        with open(args.json, "w") as fh:
            json.dump({"series": rows, "end_to_end": e2e}, fh, indent=1)
    return 0


if __name__ == "__main__":
    sys.exit(main())
