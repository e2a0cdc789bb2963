"""Retained fraction and cost across nu and iteration budgets on a synthetic scene.

    python3 scripts/nu_sweep.py --points 2000 --iterations 4096 50000
"""

import argparse
import time

from scenecompress import CompressionParams, compress, synth_scene
from scenecompress.compressor import resolve_params
from scenecompress.distinctiveness import compute_scores
from scenecompress.objective import oracle_solve


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=2000)
    ap.add_argument("--cameras", type=int, default=50)
    ap.add_argument("--extent", type=float, default=100.0)
    ap.add_argument("--seed", type=int, default=1)
    ap.add_argument("--nu", type=float, nargs="+", default=[0.02, 0.05, 0.1, 0.2])
    ap.add_argument("--iterations", type=int, nargs="+", default=[4096, 50_000])
    ap.add_argument("--oracle-iters", type=int, default=0, help="also run projected gradient for this many steps")
    args = ap.parse_args()

    scene = synth_scene(args.points, args.cameras, args.extent, args.seed)
    print(f"{'nu':>6} {'iters':>8} {'kept':>6} {'fraction':>9} {'J':>14} {'sec':>6}")
    for nu in args.nu:
        for iters in args.iterations:
            t0 = time.perf_counter()
            out = compress(scene, CompressionParams(nu=nu, iterations=iters, seed=args.seed))
            dt = time.perf_counter() - t0
            print(f"{nu:6.3f} {iters:8d} {len(out.selected):6d} {out.retained_fraction:9.4f} "
                  f"{out.objective.total:14.9f} {dt:6.1f}")
        if args.oracle_iters:
            params = resolve_params(scene, CompressionParams(nu=nu))
            alpha, j = oracle_solve(scene, compute_scores(scene, params.score), params,
                                    max_iters=args.oracle_iters, tol=1e-15)
            kept = int((alpha > params.support_threshold).sum())
            print(f"{nu:6.3f} {'oracle':>8} {kept:6d} {kept / len(scene):9.4f} {j:14.9f}")


if __name__ == "__main__":
    main()
