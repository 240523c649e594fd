"""Compare the compiled and pure-Python kernel backends.

Each backend runs in its own interpreter (selected through GEOL_KERNELS), so
the import-time choice in ``geol.kernels`` is exercised exactly as in normal
use. Usage::

    python benchmarks/bench_kernels.py [--repeat 5] [--json]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, math, random, sys, timeit
from array import array
from geol import kernels
from geol.geometry import Geometry
from geol.topology import prepare, relate_prepared

repeat = int(sys.argv[1])
rng = random.Random(7)

def rand_segs(n):
    out = array("d")
    for _ in range(n):
        x, y = rng.uniform(0, 100), rng.uniform(0, 100)
        out.extend((x, y, x + rng.uniform(-10, 10), y + rng.uniform(-10, 10)))
    return out

def star(cx, cy, n):
    pts = []
    for k in range(n):
        a = 2 * math.pi * k / n
        r = 10 if k % 2 else 4
        pts.append((cx + r * math.cos(a), cy + r * math.sin(a)))
    return pts + pts[:1]

pts = [(rng.uniform(-1, 1), rng.uniform(-1, 1)) for _ in range(2000)]
segs_a, segs_b = rand_segs(200), rand_segs(200)
ring = array("d", [c for p in star(0, 0, 64) for c in p])
polys = [prepare(Geometry.polygon(star(rng.uniform(0, 20), rng.uniform(0, 20), 32)))
         for _ in range(40)]

cases = {
    "orient2d x2000": lambda: [kernels.orient2d(0.0, 0.0, 1.0, 1.0, x, y) for x, y in pts],
    "split_segments 200x200": lambda: kernels.split_segments(segs_a, segs_b),
    "intersecting_pairs 400": lambda: kernels.intersecting_pairs(segs_a + segs_b),
    "point_in_ring 64-gon x2000": lambda: [kernels.point_in_ring(x * 12, y * 12, ring) for x, y in pts],
    "relate 40x40 stars": lambda: [relate_prepared(a, b) for a in polys for b in polys],
}
out = {"backend": kernels.BACKEND}
for name, fn in cases.items():
    fn()
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def measure(backend: str, repeat: int) -> dict:
    env = dict(os.environ, GEOL_KERNELS=backend)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env,
                          capture_output=True, text=True)
    if proc.returncode != 0:
        raise SystemExit(f"{backend} backend failed:\n{proc.stderr}")
    return json.loads(proc.stdout)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5, help="timing repetitions (best is kept)")
    ap.add_argument("--json", action="store_true", help="print raw results as JSON")
    args = ap.parse_args(argv)

    py = measure("python", args.repeat)
    try:
        cy = measure("cython", args.repeat)
    except SystemExit as exc:
        print(f"compiled backend unavailable ({str(exc).splitlines()[0]}); python only", file=sys.stderr)
        cy = None
    if args.json:
        print(json.dumps({"python": py, "cython": cy}, indent=2))
        return 0
    names = [k for k in py if k != "backend"]
    width = max(map(len, names))
    print(f"{'case':<{width}}  {'python ms':>10}  {'cython ms':>10}  {'speedup':>8}")
    for name in names:
        p = py[name] * 1e3
        if cy is None:
            print(f"{name:<{width}}  {p:>10.2f}  {'-':>10}  {'-':>8}")
        else:
            c = cy[name] * 1e3
            print(f"{name:<{width}}  {p:>10.2f}  {c:>10.2f}  {p / c:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
