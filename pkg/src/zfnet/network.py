"""Zonal function networks built from scattered samples.

Given samples f(xi) with quadrature weights w~_xi (exact to order 4N) and a
center rule (x_k, w_k) of the same order, the network is

    G(x) = sum_k a_k |x . x_k|^(2 gamma + 1),
    a_k  = w_k sum_xi w~_xi f(xi) Psi_N(x_k . xi),

where Psi_N is the pseudo-inverse kernel from ``kernels.dphi``.
"""
from __future__ import annotations

import json
import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .activation import ActivationSpec, phi_eval
from .kernels import Cutoff, SeriesKernel, default_smoothness, dphi, lowpass
from .quadrature import (
    DEFAULT_TOL,
    InfeasibleOrderError,
    QuadratureRule,
    compute_weights,
    product_rule,
)
from .sphere import PointCloud, Rotation, hemisphere_fibonacci, rotate

log = logging.getLogger(__name__)

BUILD_TOL = 1e-6
_CHUNK = 1 << 21


class EvennessWarning(UserWarning):
    """Samples were not even and have been symmetrized."""


class SiteMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class SampleSet:
    cloud: PointCloud
    values: np.ndarray = field(repr=False)
    even_symmetrized: bool = False
    notes: tuple = ()

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        if len(v) != len(self.cloud):
            raise ValueError(f"{len(v)} values for {len(self.cloud)} sites")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_function(cls, cloud: PointCloud, f: Callable) -> "SampleSet":
        return cls(cloud, f(cloud.points))

    def symmetrize(self, rtol: float = 1e-12) -> "SampleSet":
        """Antipodally closed copy with f(-xi) = f(xi).

        Sites whose antipode is missing get it appended with the same value;
        existing pairs with different values are replaced by their mean and an
        EvennessWarning is issued.
        """
        pts, vals = self.cloud.points, self.values
        d, idx = self.cloud.tree.query(-pts)
        paired = d <= 1e-12
        notes = list(self.notes)
        new_vals = vals.copy()
        if np.any(paired):
            i = np.nonzero(paired)[0]
            other = vals[idx[i]]
            scale = np.maximum(1.0, np.maximum(np.abs(vals[i]), np.abs(other)))
            bad = np.abs(vals[i] - other) > rtol * scale
            if np.any(bad):
                msg = f"{int(bad.sum()) // 2 or 1} antipodal sample pairs disagree; replaced by their mean"
                warnings.warn(msg, EvennessWarning, stacklevel=2)
                notes.append(msg)
            new_vals[i] = 0.5 * (vals[i] + other)
        missing = np.nonzero(~paired)[0]
        if len(missing):
            msg = f"appended {len(missing)} antipodal sites carrying the sample values (even part assumed)"
            warnings.warn(msg, EvennessWarning, stacklevel=2)
            notes.append(msg)
            pts = np.concatenate([pts, -pts[missing]])
            new_vals = np.concatenate([new_vals, new_vals[missing]])
        cloud = self.cloud if not len(missing) else PointCloud(pts)
        return SampleSet(cloud, new_vals, True, tuple(notes))


def _same_sites(rule: QuadratureRule, samples: SampleSet) -> None:
    a, b = rule.points, samples.cloud.points
    if a.shape != b.shape or not np.allclose(a, b, rtol=0, atol=1e-13):
        raise SiteMismatchError("quadrature rule and samples live on different sites")


def _folded(rule: QuadratureRule, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sites and weighted values with antipodal pairs merged (kernels are even)."""
    wf = np.asarray(rule.weights) * values
    if len(rule.cloud) > 1 and rule.cloud.is_antipodal():
        partner = rule.cloud.antipodal_pairs()
        rep = np.nonzero(np.arange(len(partner)) < partner)[0]
        return rule.points[rep], wf[rep] + wf[partner[rep]]
    return rule.points, wf


def kernel_transform(kernel: SeriesKernel, sites: np.ndarray, weighted_values: np.ndarray, x) -> np.ndarray:
    """sum_j weighted_values[j] kernel(x . sites[j]) at every row of x."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    out = np.empty(len(x))
    step = max(1, _CHUNK // max(1, len(sites)))
    for i in range(0, len(x), step):
        t = np.clip(x[i: i + step] @ sites.T, -1.0, 1.0)
        out[i: i + step] = kernel(t) @ weighted_values
    return out


def sigma_apply(mu: QuadratureRule, samples: SampleSet, n: int, x, cutoff: Cutoff | None = None) -> np.ndarray:
    """sigma_n(mu; f, x) = sum_xi w~_xi f(xi) Phi_n(x . xi)."""
    _same_sites(mu, samples)
    if mu.order < 4 * n:
        warnings.warn(f"rule order {mu.order} is below 4n = {4 * n}", RuntimeWarning, stacklevel=2)
    cutoff = cutoff or Cutoff(default_smoothness(mu.q))
    sites, wf = _folded(mu, samples.values)
    return kernel_transform(lowpass(mu.q, cutoff, n), sites, wf, x)


def apply_dphi(spec: ActivationSpec, mu: QuadratureRule, samples: SampleSet, N: int, x,
               cutoff: Cutoff | None = None) -> np.ndarray:
    """D_phi(sigma_N(mu; f)) at the rows of x."""
    _same_sites(mu, samples)
    cutoff = cutoff or Cutoff(default_smoothness(spec.q))
    sites, wf = _folded(mu, samples.values)
    return kernel_transform(dphi(spec, cutoff, N), sites, wf, x)


@dataclass(frozen=True)
class ZFNetwork:
    q: int
    gamma: float
    centers: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    N: int = 0
    center_weights: np.ndarray | None = field(default=None, repr=False)
    build: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.centers, dtype=float))
        a = np.asarray(self.coefficients, dtype=float).reshape(-1)
        if len(c) != len(a):
            raise ValueError("one coefficient per center required")
        if c.shape[1] != self.q + 1:
            raise ValueError("center dimension does not match q")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "coefficients", a)

    def __len__(self):
        return len(self.coefficients)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.q + 1:
            raise ValueError(f"expected points in R^{self.q + 1}, got dimension {x.shape[1]}")
        out = np.empty(len(x))
        step = max(1, _CHUNK // max(1, len(self.centers)))
        for i in range(0, len(x), step):
            out[i: i + step] = phi_eval(self.gamma, x[i: i + step] @ self.centers.T) @ self.coefficients
        return out

    def to_dict(self) -> dict:
        return {
            "q": self.q,
            "gamma": self.gamma,
            "N": self.N,
            "centers": self.centers.tolist(),
            "coefficients": self.coefficients.tolist(),
            "build": self.build,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1)

    @classmethod
    def from_dict(cls, d: dict) -> "ZFNetwork":
        return cls(int(d["q"]), float(d["gamma"]), np.array(d["centers"]), np.array(d["coefficients"]),
                   int(d.get("N", 0)), build=dict(d.get("build", {})))


def eval_network(net: ZFNetwork, x) -> np.ndarray:
    return net(x)


def build_network(spec: ActivationSpec, mu: QuadratureRule, nu: QuadratureRule, samples: SampleSet,
                  N: int, cutoff: Cutoff | None = None, tol: float = BUILD_TOL) -> ZFNetwork:
    """Coefficients a_k = w_k * D_phi(sigma_N(mu; f))(x_k) on the centers of nu."""
    _same_sites(mu, samples)
    if not samples.even_symmetrized:
        raise ValueError("samples must be even-symmetrized (SampleSet.symmetrize)")
    if spec.q != mu.q or spec.q != nu.q:
        raise ValueError("dimension mismatch between activation and rules")
    for name, rule in (("sample", mu), ("center", nu)):
        if rule.order < 4 * N or not rule.residual < tol:
            raise InfeasibleOrderError(
                f"{name} rule has order {rule.order} and residual {rule.residual:.3e}; "
                f"need order >= {4 * N} and residual < {tol:g}",
                residual=rule.residual, order=rule.order)
    cutoff = cutoff or Cutoff(default_smoothness(spec.q))
    d = apply_dphi(spec, mu, samples, N, nu.points, cutoff)
    a = np.asarray(nu.weights) * d
    build = {
        "mu_residual": mu.residual,
        "nu_residual": nu.residual,
        "mu_order": mu.order,
        "nu_order": nu.order,
        "smoothness": cutoff.smoothness,
        "dyadic": N > 0 and (N & (N - 1)) == 0,
    }
    if samples.notes:
        build["notes"] = list(samples.notes)
    return ZFNetwork(spec.q, spec.gamma, nu.points, a, N, np.asarray(nu.weights), build)


def coefficient_l1(net: ZFNetwork) -> float:
    return float(np.sum(np.abs(net.coefficients)))


def coefficient_weighted_l1(net: ZFNetwork) -> float:
    """sum_k w_k |a_k / w_k|: the nu-integral of |D_phi sigma|, which differs
    from sum |a_k| only where center weights are negative."""
    if net.center_weights is None:
        return coefficient_l1(net)
    w = net.center_weights
    return float(np.sum(np.sign(w) * np.abs(net.coefficients)))


# ---------------------------------------------------------------- targets

@dataclass(frozen=True)
class TargetFunction:
    """f(x) = sum_j v_j phi(x . y_j) F(y_j): a discretized continuous network
    whose D_phi is (a discretization of) F."""

    gamma: float
    nodes: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    density: np.ndarray = field(repr=False)

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        wF = self.weights * self.density
        out = np.empty(len(x))
        step = max(1, _CHUNK // max(1, len(self.nodes)))
        for i in range(0, len(x), step):
            out[i: i + step] = phi_eval(self.gamma, x[i: i + step] @ self.nodes.T) @ wF
        return out


def make_target_from_density(spec: ActivationSpec, F: Callable, highorder_rule: QuadratureRule,
                             max_N: int | None = None, tol: float = 1e-10) -> TargetFunction:
    if not highorder_rule.residual < tol:
        raise InfeasibleOrderError(f"high-order rule residual {highorder_rule.residual:.3e} >= {tol:g}",
                                   residual=highorder_rule.residual, order=highorder_rule.order)
    if max_N is not None and highorder_rule.order < 4 * max_N:
        raise InfeasibleOrderError(f"high-order rule order {highorder_rule.order} < {4 * max_N}",
                                   order=highorder_rule.order)
    y = highorder_rule.points
    return TargetFunction(spec.gamma, y, np.asarray(highorder_rule.weights), np.asarray(F(y), dtype=float))


# ---------------------------------------------------------------- studies

def sample_cloud(order: int, oversample: float = 1.2) -> PointCloud:
    """Antipodally symmetric Fibonacci-type sites for a rule of the given order (q = 2)."""
    return PointCloud(hemisphere_fibonacci(int(math.ceil(oversample * (order + 1) ** 2))))


def sup_grid(q: int, size: int = 20000, seed: int = 12345) -> np.ndarray:
    x = np.random.default_rng(seed).standard_normal((size, q + 1))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


@dataclass
class RateReport:
    levels: list = field(default_factory=list)
    errors: list = field(default_factory=list)
    coefficient_l1: list = field(default_factory=list)
    weighted_l1: list = field(default_factory=list)
    network_sizes: list = field(default_factory=list)
    mu_residuals: list = field(default_factory=list)
    nu_residuals: list = field(default_factory=list)
    skipped: list = field(default_factory=list)
    grid_size: int = 0

    @property
    def ratios(self) -> list:
        return [b / a if a > 0 else math.nan for a, b in zip(self.errors, self.errors[1:])]

    @property
    def geometric_mean_ratio(self) -> float:
        r = [x for x in self.ratios if x > 0]
        return float(np.exp(np.mean(np.log(r)))) if r else math.nan

    def rows(self) -> list[dict]:
        ratios = [math.nan] + self.ratios
        return [
            {"n": n, "N": 2**n, "error": e, "l1": l1, "ratio": r, "centers": m}
            for n, e, l1, r, m in zip(self.levels, self.errors, self.coefficient_l1, ratios, self.network_sizes)
        ]


def rate_study(spec: ActivationSpec, target: Callable, levels: Sequence[int],
               cutoff: Cutoff | None = None, grid: np.ndarray | None = None,
               sample_points: Callable[[int], PointCloud] = sample_cloud,
               center_rule: Callable[[int], QuadratureRule] | None = None,
               probe_count: int = 2000, tol: float = BUILD_TOL) -> RateReport:
    """Sup-grid error of the network built at N = 2^n for each level n.

    Sample sites come from ``sample_points(order)`` with weights computed by
    ``compute_weights``; centers from ``center_rule(order)`` (product Gauss
    rule by default), both at order 2^(n+2).
    """
    cutoff = cutoff or Cutoff(default_smoothness(spec.q))
    grid = sup_grid(spec.q) if grid is None else grid
    center_rule = center_rule or (lambda order: product_rule(spec.q, order))
    f_grid = target(grid)
    report = RateReport(grid_size=len(grid))
    for n in levels:
        N = 2**n
        order = 4 * N
        cloud = sample_points(order)
        mu = compute_weights(cloud, order, tol=tol, probe_count=probe_count)
        nu = center_rule(order)
        if not (mu.residual < tol and nu.residual < tol):
            report.skipped.append({"n": n, "mu_residual": mu.residual, "nu_residual": nu.residual})
            log.warning("level %d skipped: residuals %.2e / %.2e", n, mu.residual, nu.residual)
            continue
        samples = SampleSet(cloud, target(cloud.points), even_symmetrized=True)
        net = build_network(spec, mu, nu, samples, N, cutoff, tol)
        err = float(np.max(np.abs(f_grid - net(grid))))
        log.info("level %d: N=%d, %d sites, %d centers, error %.3e", n, N, len(cloud), len(net), err)
        report.levels.append(n)
        report.errors.append(err)
        report.coefficient_l1.append(coefficient_l1(net))
        report.weighted_l1.append(coefficient_weighted_l1(net))
        report.network_sizes.append(len(net))
        report.mu_residuals.append(mu.residual)
        report.nu_residuals.append(nu.residual)
    return report


def rotation_check(spec: ActivationSpec, f: Callable, mu: QuadratureRule, nu: QuadratureRule,
                   U: Rotation, N: int, test_points: np.ndarray, cutoff: Cutoff | None = None) -> float:
    """max_x |G(f o U; x) - G(f; U x)|.

    The first network uses the original sites and centers with data f(U xi);
    the second rotates sites and centers by U, keeps both weight vectors and
    uses the same data at the rotated sites.
    """
    fU = f(rotate(mu.points, U))
    plain = SampleSet(mu.cloud, fU, even_symmetrized=True)
    g1 = build_network(spec, mu, nu, plain, N, cutoff)
    mu_r = QuadratureRule(rotate(mu.cloud, U), mu.weights, mu.order, mu.residual, mu.tolerance)
    nu_r = QuadratureRule(rotate(nu.cloud, U), nu.weights, nu.order, nu.residual, nu.tolerance)
    turned = SampleSet(mu_r.cloud, fU, even_symmetrized=True)
    g2 = build_network(spec, mu_r, nu_r, turned, N, cutoff)
    x = np.atleast_2d(test_points)
    return float(np.max(np.abs(g1(x) - g2(rotate(x, U)))))


# ---------------------------------------------------------------- equatorial mass

def two_cap_target(x0, shift: float = 0.1, power: int = 8) -> Callable:
    """f(x) = ((x.x0 - shift)_+)^power + ((-x.x0 - shift)_+)^power."""
    x0 = np.asarray(x0, dtype=float)
    x0 = x0 / np.linalg.norm(x0)

    def f(x):
        t = np.atleast_2d(x) @ x0
        return np.maximum(t - shift, 0.0) ** power + np.maximum(-t - shift, 0.0) ** power

    return f


def equatorial_mass_fraction(values: np.ndarray, points: np.ndarray, x0, band: float = 0.3) -> float:
    """Share of sum |values| carried by points with |x . x0| <= band.

    The points should be close to equal-area (a Fibonacci grid, say) so the
    sum approximates the L1 integral.
    """
    x0 = np.asarray(x0, dtype=float)
    x0 = x0 / np.linalg.norm(x0)
    m = np.abs(np.asarray(values))
    near = np.abs(np.asarray(points) @ x0) <= band
    total = float(m.sum())
    return float(m[near].sum()) / total if total > 0 else math.nan
