"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--end-to-end]

Kernel timings are best-of-``repeat`` on fixed inputs.  ``--end-to-end``
also times a slice of the GL invariance sweep once per backend in a fresh
interpreter (the backend is chosen at import time).
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import timeit

from logchow import _kernels_py
from logchow.tropical_curve import cycle_graph

try:
    from logchow import _kernels as compiled
except ImportError:
    compiled = None


def inputs():
    rng = random.Random(1)
    theta = cycle_graph(4)
    base = list(theta.slopes_for_divisor({0: -2, 1: 1, 2: 1, 3: 0}))
    cycles = [list(z) for z in theta.fundamental_cycles]
    forms = [[rng.randint(-3, 3) for _ in range(6)] for _ in range(3)]
    pts = [[rng.randint(0, 6) for _ in range(3)] for _ in range(400)]
    fams = [[[rng.randint(-2, 2) for _ in range(3)] for _ in range(2)] for _ in range(200)]
    return {
        "coset_points": ((base, cycles, 12), 200),
        "orthant_rays": ((forms, 6), 200),
        "twistable_points": ((pts, fams), 5),
    }


SWEEP = """
import time
from itertools import product
from logchow.tropical_curve import cycle_graph
from logchow.twist_dr import gl_invariance_check
from logchow import kernels
c = cycle_graph(3)
ds = [v for v in product(range(-2, 3), repeat=3) if sum(v) == 0][:8]
mats = [[[1, 1], [0, 1]], [[0, 1], [1, 0]], [[2, 1], [1, 1]]]
t = time.perf_counter()
for d1, d2, m in product(ds, ds, mats):
    assert gl_invariance_check(c, [d1, d2], m)
print(kernels.BACKEND, time.perf_counter() - t)
"""


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--end-to-end", action="store_true")
    args = ap.parse_args(argv)
    if compiled is None:
        print("compiled kernels are not built; only the fallback is timed")
    print(f"{'kernel':<18}{'python (ms)':>14}{'cython (ms)':>14}{'speedup':>10}")
    for name, (call_args, number) in inputs().items():
        py = getattr(_kernels_py, name)
        t_py = min(timeit.repeat(lambda: py(*call_args), number=number, repeat=args.repeat)) / number * 1e3
        if compiled is not None:
            cy = getattr(compiled, name)
            assert cy(*call_args) == py(*call_args), name
            t_cy = min(timeit.repeat(lambda: cy(*call_args), number=number, repeat=args.repeat)) / number * 1e3
            print(f"{name:<18}{t_py:>14.3f}{t_cy:>14.3f}{t_py / t_cy:>9.1f}x")
        else:
            print(f"{name:<18}{t_py:>14.3f}{'-':>14}{'-':>10}")
    if args.end_to_end:
        for pure in ("1", "0"):
            env = dict(os.environ, LOGCHOW_PURE_PYTHON=pure)
            out = subprocess.run([sys.executable, "-c", SWEEP], env=env, capture_output=True, text=True, check=True)
            backend, seconds = out.stdout.split()
            print(f"GL sweep slice ({backend}): {float(seconds):.2f} s")


if __name__ == "__main__":
    main()
