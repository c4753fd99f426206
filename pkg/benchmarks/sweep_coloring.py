"""Exhaustive 3-coloring sweep through the engine-driven session: every path
n<=512, every even cycle n<=512, every grid a x b with a, b <= 16, 200 random
bipartite graphs n<=512; 17 random orders plus the three scripted orders per
graph.

Takes over ten minutes on one core. The acceptance test covers the same
family through the compiled SweepRunner; this script is the slow path that
does not touch the kernel.

    python benchmarks/sweep_coloring.py [--quick]
"""
from __future__ import annotations

import argparse
import math
import sys
import time

import numpy as np

from localitylab.coloring import color_online, is_proper, reveal_order
from localitylab.cli import random_bipartite
from localitylab.graph import gen_cycle, gen_grid, gen_path


def family(quick: bool):
    step = 37 if quick else 1
    for n in range(1, 513, step):
        yield f"path{n}", gen_path(n)
    for n in range(4, 513, 2 * step):
        yield f"cycle{n}", gen_cycle(n)
    for a in range(1, 17, 5 if quick else 1):
        for b in range(a, 17, 5 if quick else 1):
            yield f"grid{a}x{b}", gen_grid(a, b)
    rng = np.random.default_rng(2024)
    for i in range(20 if quick else 200):
        n = int(rng.integers(2, 513))
        yield f"bipartite#{i}n{n}", random_bipartite(n, min(1.0, 3.0 / n), rng)


def main() -> int:
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    a = ap.parse_args()
    t0 = time.time()
    runs = bad = 0
    worst = 0.0
    for name, g in family(a.quick):
        bound = math.ceil(math.log2(g.n)) if g.n > 1 else 0
        orders = [reveal_order(g, "random", np.random.default_rng(s)) for s in range(17)]
        orders += [reveal_order(g, k) for k in ("farthest-first", "bit-reversal", "doubling-clash")]
        for o in orders:
            r = color_online(g, o)
            runs += 1
            ok = (is_proper(g, r.labels) and len(r.labels) == g.n and set(r.labels.values()) <= {0, 1, 2}
                  and not r.border_violations and r.max_border <= bound)
            worst = max(worst, r.max_border / bound if bound else 0.0)
            if not ok:
                bad += 1
                print(f"FAIL {name} border={r.max_border} bound={bound} {r.border_violations[:2]}", flush=True)
    print(f"runs={runs} failures={bad} worst_border_ratio={worst:.3f} seconds={time.time() - t0:.1f}")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
