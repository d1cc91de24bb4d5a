"""Compare the numba kernels with their pure-numpy fallbacks.

Kernel timings call both backends directly in one process.  The end-to-end
timings run a short workload in fresh interpreters with and without
``CDO_LAB_DISABLE_JIT=1``, so dispatch goes through the normal switch.

    python3 benchmarks/bench_kernels.py [--repeat 5] [--size 2000000]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from cdo_lab import kernels
from cdo_lab._jit import HAS_NUMBA

WORKLOAD = """
import json, time
from cdo_lab import builtin_element, hulanicki_gap, twisted_product
from cdo_lab.axioms import random_form
import numpy as np

out = {}
f = builtin_element("F2", "srw")
t = time.perf_counter(); p = twisted_product(f, f)
for _ in range(2):
    p = twisted_product(p, p)
out["F2 srw^8 by squaring"] = time.perf_counter() - t

g = random_form(builtin_element("H3", "srw").group, np.random.default_rng(0), n_terms=6, support_radius=2)
t = time.perf_counter(); q = twisted_product(g, g)
for _ in range(2):
    q = twisted_product(q, g)
out["H3 perturbed powers"] = time.perf_counter() - t

t = time.perf_counter(); hulanicki_gap(f, 8, 3)
out["F2 gap radius 8"] = time.perf_counter() - t
print(json.dumps(out))
"""


def best_of(fn, repeat: int) -> float:
    fn()  # warm-up (includes JIT compilation)
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(size: int, repeat: int) -> list[tuple[str, float, float]]:
    rng = np.random.default_rng(0)
    keys = rng.integers(-50, 50, size=(size, 3)).astype(np.int64)
    vals = rng.standard_normal(size) + 1j * rng.standard_normal(size)

    def accumulate(factory):
        def run():
            acc = factory(3, 10**7)
            acc.add(keys, vals)
            acc.result()

        return run

    n_seg = size // 20
    ids = rng.integers(0, n_seg, size=size).astype(np.int64)
    mags = rng.random(size)

    n = 20_000
    rows = rng.integers(0, n, size=size).astype(np.int64)
    cols = rng.integers(0, n, size=size).astype(np.int64)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)

    return [
        ("row accumulate", best_of(accumulate(kernels.numba_row_accumulator), repeat),
         best_of(accumulate(kernels.numpy_row_accumulator), repeat)),
        ("segment max", best_of(lambda: kernels.numba_segment_max(ids, mags, n_seg), repeat),
         best_of(lambda: kernels.numpy_segment_max(ids, mags, n_seg), repeat)),
        ("coo matvec", best_of(lambda: kernels.numba_matvec(rows, cols, vals, x, n), repeat),
         best_of(lambda: kernels.numpy_matvec(rows, cols, vals, x, n), repeat)),
        ("coo rmatvec", best_of(lambda: kernels.numba_rmatvec(rows, cols, vals, x, n), repeat),
         best_of(lambda: kernels.numpy_rmatvec(rows, cols, vals, x, n), repeat)),
    ]


def end_to_end() -> dict[str, tuple[float, float]]:
    runs = {}
    for flag in ("0", "1"):
        env = dict(os.environ, CDO_LAB_DISABLE_JIT=flag)
        res = subprocess.run([sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True)
        if res.returncode != 0:
            raise RuntimeError(f"workload failed (CDO_LAB_DISABLE_JIT={flag}):\n{res.stderr}")
        runs[flag] = json.loads(res.stdout.strip().splitlines()[-1])
    return {k: (runs["0"][k], runs["1"][k]) for k in runs["0"]}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--size", type=int, default=2_000_000, help="entries per kernel call")
    ap.add_argument("--skip-end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if not HAS_NUMBA:
        print("numba is not installed; nothing to compare")
        return 1

    print(f"{'kernel':<28}{'numba s':>10}{'numpy s':>10}{'speedup':>9}")
    for name, a, b in kernel_rows(args.size, args.repeat):
        print(f"{name:<28}{a:>10.4f}{b:>10.4f}{b / a:>8.1f}x")
    if not args.skip_end_to_end:
        print("\nend to end (first call, JIT compile included)")
        for name, (a, b) in end_to_end().items():
            print(f"{name:<28}{a:>10.4f}{b:>10.4f}{b / a:>8.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
