"""Feasible quadrature order, weight range and covering constant for Fibonacci
spirals of several sizes."""
import argparse
import math
import time

from zfnet.quadrature import compute_weights, order_search
from zfnet.sphere import generate


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[100, 200, 400, 800])
    ap.add_argument("--tol", type=float, default=1e-8)
    args = ap.parse_args()
    print("   M  delta   delta*sqrt(M)  eta    order  min w     max w     residual   seconds")
    for M in args.sizes:
        t0 = time.perf_counter()
        cloud = generate(2, "fibonacci-s2", M)
        n = order_search(cloud, tol=args.tol)
        rule = compute_weights(cloud, n)
        d = cloud.mesh_norm()
        print(f"{M:5d}  {d:.4f}  {d * math.sqrt(M):.3f}          {cloud.separation():.4f} {n:5d}  "
              f"{rule.min_weight:.2e}  {rule.max_weight:.2e}  {rule.residual:.1e}    "
              f"{time.perf_counter() - t0:.1f}")


if __name__ == "__main__":
    main()
