"""Time the numba kernels against the pure numpy fallback.

Each backend runs in its own interpreter because the switch is read at
import time. JIT compilation is excluded by a warm-up call.

    python benchmarks/bench_kernels.py --repeat 5
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, time
import numpy as np
from starkwell import StarkProblem, SpectrumRequest, backend_name, solve_spectrum
from starkwell.airy import airy_array, airy_eval
from starkwell.tables import _levels, reproduce_table

repeat = int(sys.argv[1])
n = int(sys.argv[2])
x = np.linspace(-80.0, 80.0, n)
xs = x[:: max(1, n // 2000)]

def best(fn):
    fn()
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)

def tables():
    _levels.cache_clear()
    for t in (1, 2, 3, 4):
        reproduce_table(t)

res = {
    "backend": backend_name(),
    "airy_array": best(lambda: airy_array(x)),
    "airy_eval": best(lambda: [airy_eval(v) for v in xs]) / len(xs),
    "spectrum": best(lambda: solve_spectrum(SpectrumRequest(StarkProblem(4.0, 1.0), "mixed", count=10))),
    "tables": best(tables),
}
json.dump(res, sys.stdout)
"""

ROWS = [
    ("airy_array", "Airy vector, {n} points"),
    ("airy_eval", "Airy scalar, per call"),
    ("spectrum", "10 mixed levels, L=4 F=1"),
    ("tables", "all four tables"),
]


def run(disable, repeat, n):
    env = dict(os.environ)
    env.pop("STARKWELL_DISABLE_JIT", None)
    if disable:
        env["STARKWELL_DISABLE_JIT"] = "1"
    out = subprocess.run([sys.executable, "-c", WORKER, str(repeat), str(n)],
                         capture_output=True, text=True, env=env, check=True)
    return json.loads(out.stdout)


def fmt(t):
    if t < 1e-3:
        return f"{t * 1e6:9.2f} us"
    if t < 1:
        return f"{t * 1e3:9.2f} ms"
    return f"{t:9.3f} s "


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--points", type=int, default=200_000)
    args = ap.parse_args(argv)

    jit = run(False, args.repeat, args.points)
    py = run(True, args.repeat, args.points)
    print(f"{'case':<30}{jit['backend']:>13}{py['backend']:>13}{'ratio':>9}")
    for key, label in ROWS:
        a, b = jit[key], py[key]
        print(f"{label.format(n=args.points):<30}{fmt(a):>13}{fmt(b):>13}{b / a:>8.1f}x")


if __name__ == "__main__":
    main()
