"""Times each kernel under numba and under the plain fallback.

The backend is fixed at import time, so every measurement runs in a child
process with LOCALITY_LAB_NO_JIT set or cleared. JIT compile time is paid on
a warm-up call and excluded.

    python benchmarks/bench_kernels.py [--repeat 3]
"""
from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

CHILD = r"""
import json, sys, time
import numpy as np
from localitylab import _kernels as K
from localitylab.coloring import SweepRunner, reveal_order
from localitylab.graph import gen_grid, gen_path

repeat = int(sys.argv[1])
path, grid = gen_path(512), gen_grid(16, 16)
ip, ix = K.csr(path.adj)
dist = K.all_pairs_distances(path.adj)
trans = (np.random.default_rng(0).random((12, 12)) < 0.3).astype(np.uint8)
uid = np.random.default_rng(1).permutation(300)
runner = SweepRunner(grid)
order = reveal_order(grid, "random", np.random.default_rng(2))
cases = {
    "apsp path512": lambda: K.all_pairs_distances(path.adj),
    "walk_table 12 states x 400": lambda: K.walk_table(trans, 400),
    "power coloring path512 k=4": lambda: K.power_graph_coloring(dist, 4),
    "power cv path300 k=4": lambda: K.power_cv_coloring(uid, 4, False),
    "color sweep grid16x16": lambda: runner.run(order),
}
out = {}
for name, fn in cases.items():
    fn()
    t = time.perf_counter()
    for _ in range(repeat):
        fn()
    out[name] = (time.perf_counter() - t) / repeat
print(json.dumps({"backend": K.BACKEND, "times": out}))
"""


def measure(no_jit: bool, repeat: int) -> dict:
    env = dict(os.environ)
    env.pop("LOCALITY_LAB_NO_JIT", None)
    if no_jit:
        env["LOCALITY_LAB_NO_JIT"] = "1"
    p = subprocess.run([sys.executable, "-c", CHILD, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(p.stdout)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    a = ap.parse_args()
    jit, plain = measure(False, a.repeat), measure(True, a.repeat)
    print(f"{'kernel':32s} {jit['backend']:>10s} {plain['backend']:>10s} {'speedup':>8s}")
    for name, t in jit["times"].items():
        u = plain["times"][name]
        print(f"{name:32s} {t * 1e3:8.2f}ms {u * 1e3:8.2f}ms {u / t:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
