"""Wall time and traced peak memory of a default compress run on a large synthetic scene.

    python3 scripts/benchmark_100k.py --points 100000
"""

import argparse
import time
import tracemalloc

from scenecompress import CompressionParams, compress, synth_scene
from scenecompress.kernel import cache_capacity


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=100_000)
    ap.add_argument("--cameras", type=int, default=200)
    ap.add_argument("--extent", type=float, default=1000.0)
    ap.add_argument("--seed", type=int, default=3)
    ap.add_argument("--cache-mb", type=float, default=512.0)
    ap.add_argument("--trace", action="store_true", help="measure peak memory (slower)")
    args = ap.parse_args()

    t0 = time.perf_counter()
    scene = synth_scene(args.points, args.cameras, args.extent, args.seed)
    print(f"synth   {time.perf_counter() - t0:6.1f} s")

    params = CompressionParams(kernel_cache_mb=args.cache_mb)
    if args.trace:
        tracemalloc.start()
    t0 = time.perf_counter()
    out = compress(scene, params)
    dt = time.perf_counter() - t0
    print(f"compress {dt:6.1f} s  kept {len(out.selected)} of {out.source_m}  J = {out.objective.total:.10g}")
    rows = cache_capacity(args.points, args.cache_mb)
    print(f"cache   {rows} rows, {rows * 8 * args.points / 2**20:.0f} MB cap")
    if args.trace:
        _, peak = tracemalloc.get_traced_memory()
        tracemalloc.stop()
        print(f"peak    {peak / 2**20:.0f} MB traced")


if __name__ == "__main__":
    main()
