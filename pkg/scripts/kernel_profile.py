"""Equatorial localization of the band-pass kernel with coefficients b_l.

Prints the tail maximum over |pi/2 - theta| >= 0.5 for n = 16..256 and writes
the profiles (theta, value) for plotting.
"""
import argparse
import math
from pathlib import Path

import numpy as np

from zfnet.activation import ActivationSpec, coefficient_sequence
from zfnet.kernels import Cutoff, localization_profile


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--gamma", type=float, default=0.0)
    ap.add_argument("--smoothness", type=int, default=6)
    ap.add_argument("--out", default="results/profile")
    args = ap.parse_args()
    spec = ActivationSpec(args.gamma, 2)
    h = Cutoff(args.smoothness)
    theta = np.linspace(0, math.pi, 2881)
    far = np.abs(theta - math.pi / 2) >= 0.5
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    prev = None
    for n in (16, 32, 64, 128, 256):
        prof = localization_profile(2, coefficient_sequence(spec, n), n, theta, h)
        np.savetxt(out / f"profile_n{n}.csv", prof, delimiter=",", header="theta,value", comments="")
        v = np.abs(prof[:, 1])
        tail = v[far].max()
        peak = theta[np.argmax(v)]
        ratio = f"{tail / prev:.3g}" if prev else "-"
        print(f"n={n:4d} peak at theta={peak:.4f} (pi/2={math.pi / 2:.4f}) "
              f"max={v.max():.3e} tail={tail:.3e} ratio={ratio}")
        prev = tail


if __name__ == "__main__":
    main()
