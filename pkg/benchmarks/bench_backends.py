"""Time the numba and numpy kernel backends on the hot paths.

Each backend runs in its own interpreter because the choice is fixed at import.

    python benchmarks/bench_backends.py [--size N] [--reps R]
"""

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from relbelief import kernels, BiasSpec, Hyperparameters
from relbelief.bias import simulate_bias_against

size, reps = int(sys.argv[1]), int(sys.argv[2])
rng = np.random.default_rng(0)
center = rng.normal(0, 3, size)
scale = rng.uniform(0.5, 3, size)
df = rng.uniform(2, 40, size)
u = rng.uniform(0, 1, size)

def best(fn, n=3):
    fn()  # warm-up, includes numba compilation / cache load
    out = []
    for _ in range(n):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return min(out)

res = {"backend": kernels.BACKEND}
res["t_interval_mass"] = best(lambda: kernels.t_interval_mass(center, scale, df, -0.5, 0.5))
res["trunc_normal_inv"] = best(lambda: kernels.trunc_normal_inv(0.0, scale, 0.5, 1.5, u))
res["gammainc"] = best(lambda: kernels.gammainc(df, scale * df))
spec = BiasSpec(Hyperparameters(0.0, 0.67, 1.0, 8.0), reps=reps, seed=1)
res["bias_against"] = best(lambda: simulate_bias_against(spec), n=1)
print(json.dumps(res))
"""


def run(disable, size, reps):
    env = dict(os.environ)
    if disable:
        env["RELBELIEF_DISABLE_NUMBA"] = "1"
    else:
        env.pop("RELBELIEF_DISABLE_NUMBA", None)
    out = subprocess.run([sys.executable, "-c", CHILD, str(size), str(reps)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=1_000_000, help="array length for kernel timings")
    ap.add_argument("--reps", type=int, default=100_000, help="bias simulation replications")
    args = ap.parse_args()
    fast = run(False, args.size, args.reps)
    slow = run(True, args.size, args.reps)
    print(f"{'kernel':<18}{fast['backend']:>10}{slow['backend']:>10}{'speedup':>10}")
    for key in ("t_interval_mass", "trunc_normal_inv", "gammainc", "bias_against"):
        a, b = fast[key], slow[key]
        print(f"{key:<18}{a:>9.3f}s{b:>9.3f}s{b / a:>9.1f}x")


if __name__ == "__main__":
    main()
