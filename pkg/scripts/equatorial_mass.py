"""Two-cap target f(x) = ((x.x0 - 0.1)_+)^8 + ((-x.x0 - 0.1)_+)^8 and D_phi f.

D_phi(sigma_N f) is zonal about x0, so it is tabulated against t = x.x0. Two
independent routes are compared: the sample-based kernel sum on the sphere and
a one-dimensional Legendre expansion of f in t. The script reports the share
of the L1 mass lying in |t| <= band for several bands.
"""
import argparse

import numpy as np

from zfnet.activation import ActivationSpec, phi_hat_array
from zfnet.kernels import Cutoff
from zfnet.network import SampleSet, apply_dphi, equatorial_mass_fraction, two_cap_target
from zfnet.orthopoly import JacobiBasis
from zfnet.quadrature import product_rule
from zfnet.sphere import fibonacci_s2


def legendre_route(N, h, t, spec):
    x, w = np.polynomial.legendre.leggauss(400)
    s = 0.45 * x + 0.55  # nodes on [0.1, 1], where the caps live
    T = np.concatenate([s, -s])
    W = np.concatenate([0.45 * w, 0.45 * w])
    F = np.maximum(T - 0.1, 0) ** 8 + np.maximum(-T - 0.1, 0) ** 8
    B = JacobiBasis.build(0.0, 0.0, 2 * N)
    a = B.table(T) @ (W * F)
    hat = phi_hat_array(spec, N)
    c = np.zeros(2 * N + 1)
    for l in range(N + 1):
        c[2 * l] = h(l / N) * a[2 * l] / hat[l]
    return B.series(c, t)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--N", type=int, nargs="+", default=[4, 8, 16])
    ap.add_argument("--grid", type=int, default=20001)
    args = ap.parse_args()
    spec = ActivationSpec(0.0, 2)
    h = Cutoff(7)
    x0 = np.array([0.0, 0.0, 1.0])
    f = two_cap_target(x0)
    grid = fibonacci_s2(args.grid)
    tt = np.linspace(-1, 1, 200001)
    for N in args.N:
        mu = product_rule(2, max(64, 4 * N))
        d = apply_dphi(spec, mu, SampleSet(mu.cloud, f(mu.points), True), N, grid)
        one_d = legendre_route(N, h, tt, spec)
        probe = np.array([0.0, 0.25, 0.5, 0.75, 1.0])
        line = apply_dphi(spec, mu, SampleSet(mu.cloud, f(mu.points), True), N,
                          np.column_stack([np.sqrt(1 - probe**2), 0 * probe, probe]))
        gap = np.max(np.abs(line - legendre_route(N, h, probe, spec)))
        shares = {b: equatorial_mass_fraction(d, grid, x0, b) for b in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6)}
        m = np.abs(one_d)
        shares_1d = {b: m[np.abs(tt) <= b].sum() / m.sum() for b in shares}
        print(f"N={N}: route gap {gap:.1e}; profile at t=0,.25,.5,.75,1: "
              + " ".join(f"{v:+.3f}" for v in line))
        print("   band   sphere   legendre   uniform")
        for b in shares:
            print(f"   {b:.1f}    {shares[b]:.3f}    {shares_1d[b]:.3f}      {b:.1f}")


if __name__ == "__main__":
    main()
