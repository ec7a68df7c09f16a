"""Quadrature weights on scattered points of S^q.

Weights for order n solve G w = 1 with G_jk = K_n(x_j . x_k), K_n the
reproducing kernel of Pi_n^q. By the addition formula this is the normal form
of the moment system sum_j w_j Y(x_j) = int Y, so the truncated-pseudoinverse
solution is its minimum-norm solution and no spherical harmonics are needed.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh

from .kernels import even_series
from .orthopoly import JacobiBasis, jacobi_at_one, polynomial_space_dimension
from .sphere import PointCloud, chord_radius, product_nodes, surface_area

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-8
DEFAULT_TRUNCATION = 1e-12
_CHUNK = 1 << 21


class InfeasibleOrderError(RuntimeError):
    """The point set cannot carry a quadrature rule of the requested order."""

    def __init__(self, message, residual=None, order=None):
        super().__init__(message)
        self.residual = residual
        self.order = order


class DegenerateGeometryError(InfeasibleOrderError):
    pass


def _kernel_coefficients(q: int, n: int, parity: str = "all") -> np.ndarray:
    a = q / 2.0 - 1.0
    om = surface_area(q - 1)
    if parity == "even":
        # coefficients of p_{2l}, 2l <= n
        return np.array([jacobi_at_one(2 * l, a, a) for l in range(n // 2 + 1)]) / om
    return np.array([jacobi_at_one(l, a, a) for l in range(n + 1)]) / om


def reproducing_kernel(q: int, n: int, t, parity: str = "all"):
    """K_n(t) = omega_{q-1}^-1 sum_{l<=n} p_l(1) p_l(t).

    ``parity="even"`` keeps only the even degrees (the kernel of the even
    polynomials in Pi_n).
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    t = np.asarray(t, dtype=float)
    if np.any(np.abs(t) > 1.0 + 1e-12):
        raise ValueError("argument must lie in [-1, 1]")
    t = np.clip(t, -1.0, 1.0)
    c = _kernel_coefficients(q, n, parity)
    if parity == "even":
        out = even_series(q, c, t)
    else:
        a = q / 2.0 - 1.0
        out = JacobiBasis.build(a, a, n).series(c, t)
    return out if out.ndim else float(out)


def kernel_matrix(q: int, n: int, X: np.ndarray, Y: np.ndarray, parity: str = "all") -> np.ndarray:
    """K_n(X Y^T), assembled in row blocks."""
    out = np.empty((len(X), len(Y)))
    step = max(1, _CHUNK // max(1, len(Y)))
    for i in range(0, len(X), step):
        t = np.clip(X[i: i + step] @ Y.T, -1.0, 1.0)
        out[i: i + step] = reproducing_kernel(q, n, t, parity)
    return out


@dataclass(frozen=True)
class QuadratureRule:
    cloud: PointCloud
    weights: np.ndarray = field(repr=False)
    order: int
    residual: float
    tolerance: float = DEFAULT_TOL
    condition: float = 1.0
    rank: int = 0

    @property
    def points(self) -> np.ndarray:
        return self.cloud.points

    @property
    def q(self) -> int:
        return self.cloud.q

    @property
    def weight_sum(self) -> float:
        return float(np.sum(self.weights))

    @property
    def min_weight(self) -> float:
        return float(np.min(self.weights))

    @property
    def max_weight(self) -> float:
        return float(np.max(self.weights))

    @property
    def positive(self) -> bool:
        return self.min_weight > 0.0

    @property
    def exact(self) -> bool:
        return self.residual < self.tolerance

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))

    def diagnostics(self) -> dict:
        return {
            "order": self.order,
            "residual": self.residual,
            "weight_sum": self.weight_sum,
            "min_weight": self.min_weight,
            "max_weight": self.max_weight,
            "condition": self.condition,
            "rank": self.rank,
            "points": len(self.cloud),
            "negative_weights": int(np.sum(self.weights <= 0)),
        }


def _solve_truncated(G: np.ndarray, tau: float) -> tuple[np.ndarray, float, int]:
    lam, V = eigh(G, driver="evd")
    lmax = float(lam[-1])
    if not lmax > 0:
        raise DegenerateGeometryError("Gram matrix has no positive eigenvalue")
    keep = lam > tau * lmax
    if not np.any(keep):
        raise DegenerateGeometryError("all eigenvalues fall below the truncation threshold")
    Vk = V[:, keep]
    w = Vk @ ((Vk.T @ np.ones(len(G))) / lam[keep])
    return w, lmax / float(lam[keep][0]), int(np.sum(keep))


def _representatives(cloud: PointCloud) -> tuple[np.ndarray, np.ndarray]:
    partner = cloud.antipodal_pairs()
    rep = np.nonzero(np.arange(len(cloud)) < partner)[0]
    return rep, partner


def compute_weights(cloud: PointCloud, n: int, tau: float = DEFAULT_TRUNCATION,
                    tol: float = DEFAULT_TOL, probe_count: int | None = None,
                    seed: int = 0) -> QuadratureRule:
    """Minimum-norm weights integrating Pi_n^q exactly (when feasible).

    For antipodally symmetric clouds the minimum-norm solution is itself
    symmetric, so only the even-degree system on one point of every pair is
    solved; the result is the same rule at a quarter of the Gram size.
    """
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    if n < 0:
        raise ValueError("order must be nonnegative")
    X = cloud.points
    q = cloud.q
    if len(cloud) > 1 and cloud.is_antipodal():
        rep, partner = _representatives(cloud)
        G = 2.0 * kernel_matrix(q, n, X[rep], X[rep], parity="even")
        v, cond, rank = _solve_truncated(G, tau)
        w = np.empty(len(cloud))
        w[rep] = v
        w[partner[rep]] = v
        own = float(np.max(np.abs(G @ v - 1.0)))
    else:
        G = kernel_matrix(q, n, X, X)
        w, cond, rank = _solve_truncated(G, tau)
        own = float(np.max(np.abs(G @ w - 1.0)))
    w.setflags(write=False)
    rule = QuadratureRule(cloud, w, n, own, tol, cond, rank)
    res = exactness_residual(rule, probe_count, seed, own_residual=own)
    return QuadratureRule(cloud, w, n, res, tol, cond, rank)


def default_probe_count(q: int, n: int) -> int:
    return 20 * polynomial_space_dimension(q, n)


def _uniform(q: int, count: int, seed: int) -> np.ndarray:
    x = np.random.default_rng(seed).standard_normal((count, q + 1))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def exactness_residual(rule: QuadratureRule, probe_count: int | None = None, seed: int = 0,
                       own_residual: float | None = None) -> float:
    """max_x |sum_j w_j K_n(x . x_j) - 1| over seeded probes and the rule's points.

    Zero exactly when the rule integrates Pi_n^q; the function x -> K_n(x . y)
    spans Pi_n^q and integrates to one.
    """
    q, n = rule.q, rule.order
    X, w = rule.points, np.asarray(rule.weights)
    if probe_count is None:
        probe_count = default_probe_count(q, n)
    probes = _uniform(q, probe_count, seed) if probe_count else np.empty((0, q + 1))
    if own_residual is None:
        probes = np.concatenate([probes, X])
    if len(rule.cloud) > 1 and rule.cloud.is_antipodal():
        rep, _ = _representatives(rule.cloud)
        Xs, ws, parity, scale = X[rep], w[rep], "even", 2.0
    else:
        Xs, ws, parity, scale = X, w, "all", 1.0
    worst = 0.0 if own_residual is None else own_residual
    step = max(1, _CHUNK // max(1, len(Xs)))
    for i in range(0, len(probes), step):
        K = kernel_matrix(q, n, probes[i: i + step], Xs, parity)
        worst = max(worst, float(np.max(np.abs(scale * (K @ ws) - 1.0))))
    return worst


def order_search(cloud: PointCloud, tol: float = DEFAULT_TOL, c: float = 3.0,
                 tau: float = DEFAULT_TRUNCATION, probe_count: int | None = None,
                 seed: int = 0) -> int:
    """Largest n <= ceil(c / mesh_norm) whose weights pass the residual test."""
    n_max = int(math.ceil(c / cloud.mesh_norm()))
    for n in range(n_max, -1, -1):
        rule = compute_weights(cloud, n, tau=tau, tol=tol, probe_count=probe_count, seed=seed)
        log.debug("order %d residual %.3e", n, rule.residual)
        if rule.residual < tol:
            return n
    return 0


def search_rule(cloud: PointCloud, tol: float = DEFAULT_TOL, **kw) -> QuadratureRule:
    n = order_search(cloud, tol, **kw)
    return compute_weights(cloud, n, tol=tol, probe_count=kw.get("probe_count"), seed=kw.get("seed", 0))


def product_rule(q: int, n: int, probe_count: int | None = 0, seed: int = 0) -> QuadratureRule:
    """Product Gauss rule on S^q exact for Pi_n^q, with positive weights."""
    m = n // 2 + 1
    pts, w = product_nodes(q, m)
    cloud = PointCloud(pts)
    w.setflags(write=False)
    rule = QuadratureRule(cloud, w, n, 0.0)
    res = exactness_residual(rule, probe_count, seed)
    return QuadratureRule(cloud, w, n, res)


@dataclass(frozen=True)
class RegularityEstimate:
    d: float
    value: float
    probe_count: int


def regularity_estimate(rule: QuadratureRule, d: float, probe_count: int = 2000,
                        seed: int = 0) -> RegularityEstimate:
    """max over probe caps B(x, d) of sum |w_j| / d^q."""
    if not 0 < d <= 1:
        raise ValueError("d must lie in (0, 1]")
    centers = np.concatenate([_uniform(rule.q, probe_count, seed), rule.points])
    absw = np.abs(np.asarray(rule.weights))
    hits = rule.cloud.tree.query_ball_point(centers, chord_radius(d) * (1 + 1e-12))
    mass = max(float(absw[idx].sum()) if len(idx) else 0.0 for idx in hits)
    return RegularityEstimate(d, mass / d**rule.q, len(centers))
