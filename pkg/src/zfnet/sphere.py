"""Point sets on the unit sphere S^q in R^(q+1)."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .orthopoly import log_gamma


class PointsFileError(ValueError):
    """Malformed row in a points or samples file."""


def surface_area(q: int) -> float:
    """omega_q = 2 pi^((q+1)/2) / Gamma((q+1)/2)."""
    if q < 0:
        raise ValueError("q must be nonnegative")
    if q == 0:
        return 2.0
    return 2.0 * math.exp(0.5 * (q + 1) * math.log(math.pi) - log_gamma(0.5 * (q + 1)))


def cap_measure(q: int, r: float) -> float:
    """Surface measure of a cap of geodesic radius r on S^q."""
    from scipy.integrate import quad

    r = min(max(r, 0.0), math.pi)
    val, _ = quad(lambda t: math.sin(t) ** (q - 1), 0.0, r)
    return surface_area(q - 1) * val


def _normalize(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    n = np.linalg.norm(x, axis=-1, keepdims=True)
    # rows already at unit length (to rounding) are kept bit-for-bit
    return np.where(np.abs(n - 1.0) <= 4e-16, x, x / n)


@dataclass(frozen=True)
class SpherePoint:
    coords: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coords, dtype=float)
        n = np.linalg.norm(c)
        if n == 0.0:
            raise ValueError("zero vector is not a sphere point")
        c = c / n
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def q(self) -> int:
        return len(self.coords) - 1


def geodesic(x, y) -> float:
    x = x.coords if isinstance(x, SpherePoint) else np.asarray(x, dtype=float)
    y = y.coords if isinstance(y, SpherePoint) else np.asarray(y, dtype=float)
    if x.shape[-1] != y.shape[-1]:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")
    return np.arccos(np.clip(np.sum(x * y, axis=-1), -1.0, 1.0))


def chord_radius(theta: float) -> float:
    """Euclidean radius of a cap of geodesic radius theta."""
    return 2.0 * math.sin(min(theta, math.pi) / 2.0)


@dataclass(eq=False)
class PointCloud:
    """Finite subset of S^q stored as an (M, q+1) array of unit vectors."""

    points: np.ndarray
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        pts = _normalize(pts)
        pts.setflags(write=False)
        self.points = pts

    @property
    def q(self) -> int:
        return self.points.shape[1] - 1

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def tree(self) -> cKDTree:
        if "tree" not in self._cache:
            self._cache["tree"] = cKDTree(self.points)
        return self._cache["tree"]

    def mesh_norm(self) -> float:
        if "delta" not in self._cache:
            self._cache["delta"] = mesh_norm(self)
        return self._cache["delta"]

    def separation(self) -> float:
        if "eta" not in self._cache:
            self._cache["eta"] = separation(self)
        return self._cache["eta"]

    def is_antipodal(self, tol: float = 1e-12) -> bool:
        """True when -x is in the cloud for every x (within tol)."""
        if "antipodal" not in self._cache:
            d, _ = self.tree.query(-self.points)
            self._cache["antipodal"] = bool(np.all(d <= tol))
        return self._cache["antipodal"]

    def antipodal_pairs(self, tol: float = 1e-12) -> np.ndarray:
        """Index of the antipode of each point (requires is_antipodal)."""
        d, idx = self.tree.query(-self.points)
        if np.any(d > tol):
            raise ValueError("cloud is not antipodally symmetric")
        return idx


# ---------------------------------------------------------------- generators

GOLDEN_ANGLE = math.pi * (3.0 - math.sqrt(5.0))


def fibonacci_s2(M: int) -> np.ndarray:
    i = np.arange(M, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / M
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = GOLDEN_ANGLE * i
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def product_nodes(q: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of the product Gauss rule on S^q with m polar nodes per
    level and 2m azimuthal nodes; exact for polynomials of degree <= 2m-1."""
    from .orthopoly import gauss_jacobi

    if q == 1:
        ang = np.pi * np.arange(2 * m) / m
        return np.column_stack([np.cos(ang), np.sin(ang)]), np.full(2 * m, math.pi / m)
    a = q / 2.0 - 1.0
    rule = gauss_jacobi(a, a, m)
    sub, subw = product_nodes(q - 1, m)
    t = rule.nodes[:, None, None]
    s = np.sqrt(1.0 - rule.nodes**2)[:, None, None]
    pts = np.concatenate([np.broadcast_to(s * sub[None], (m,) + sub.shape),
                          np.broadcast_to(t, (m, len(sub), 1))], axis=-1)
    w = rule.weights[:, None] * subw[None, :]
    return pts.reshape(-1, q + 1), w.reshape(-1)


def generate(q: int, kind: str, M: int, seed: int | None = None) -> PointCloud:
    """Point cloud of (about) M points.

    kinds: ``uniform-random`` (normalized Gaussian vectors, needs seed),
    ``fibonacci-s2`` (golden-angle spiral, q = 2 only) and ``tensor-design``
    (nodes of the smallest product Gauss rule with at least M points).
    """
    if M < 1:
        raise ValueError("M must be positive")
    if kind == "uniform-random":
        if seed is None:
            raise ValueError("uniform-random requires an explicit seed")
        rng = np.random.default_rng(seed)
        return PointCloud(rng.standard_normal((M, q + 1)))
    if kind == "fibonacci-s2":
        if q != 2:
            raise ValueError("fibonacci-s2 is only defined for q = 2")
        return PointCloud(fibonacci_s2(M))
    if kind == "tensor-design":
        m = 1
        while 2 * m * m ** (q - 1) < M:
            m += 1
        return PointCloud(product_nodes(q, m)[0])
    raise ValueError(f"unsupported point generator {kind!r} for q={q}")


def antipodal_closure(points: np.ndarray) -> np.ndarray:
    """points followed by their antipodes."""
    points = np.asarray(points, dtype=float)
    return np.concatenate([points, -points])


def hemisphere_fibonacci(M: int) -> np.ndarray:
    """Antipodally symmetric S^2 set of 2*ceil(M/2) points: a Fibonacci spiral on
    the upper hemisphere and its reflection."""
    half = (M + 1) // 2
    i = np.arange(half, dtype=float)
    z = 1.0 - (i + 0.5) / half
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = GOLDEN_ANGLE * i
    upper = np.column_stack([r * np.cos(phi), r * np.sin(phi), z])
    return antipodal_closure(upper)


# ---------------------------------------------------------------- geometry

def _probe_points(cloud: PointCloud, probe_density: int, seed: int) -> np.ndarray:
    M = len(cloud)
    count = probe_density * M
    if cloud.q == 2:
        # an odd count puts a probe on the equator
        probes = fibonacci_s2(max(count, 2) | 1)
    else:
        probes = _normalize(np.random.default_rng(seed).standard_normal((count, cloud.q + 1)))
    return np.concatenate([probes, -cloud.points])


def mesh_norm(cloud: PointCloud, probe_density: int = 50, seed: int = 0) -> float:
    """Largest distance from a probe point to the cloud: a lower bound for the
    covering radius, tight up to the probe spacing."""
    if len(cloud) == 0:
        raise ValueError("empty cloud")
    if probe_density < 10:
        raise ValueError("probe set must be at least 10 times denser than the cloud")
    probes = _probe_points(cloud, probe_density, seed)
    d, _ = cloud.tree.query(probes)
    chord = float(np.max(d))
    return 2.0 * math.asin(min(1.0, chord / 2.0))


def separation(cloud: PointCloud) -> float:
    """Exact minimum pairwise geodesic distance."""
    if len(cloud) < 2:
        raise ValueError("separation needs at least two points")
    d, _ = cloud.tree.query(cloud.points, k=2)
    chord = float(np.min(d[:, 1]))
    return 2.0 * math.asin(min(1.0, chord / 2.0))


def _greedy_thin(points: np.ndarray, radius: float) -> np.ndarray:
    tree = cKDTree(points)
    keep = np.ones(len(points), dtype=bool)
    removed = np.zeros(len(points), dtype=bool)
    cr = chord_radius(radius)
    for i in range(len(points)):
        if removed[i]:
            continue
        for j in tree.query_ball_point(points[i], cr * (1 - 1e-12)):
            if j > i:
                removed[j] = True
                keep[j] = False
    return keep


def _well_separated(cloud: PointCloud) -> bool:
    if len(cloud) < 2:
        return True
    eta, delta = separation(cloud), mesh_norm(cloud)
    return eta <= 2 * delta <= 4 * eta


def prune_close(cloud: PointCloud) -> PointCloud:
    """Drop points until separation and mesh norm satisfy eta <= 2 delta <= 4 eta.

    Greedy thinning at radius r keeps separation >= r and raises the mesh norm
    to at most delta + r; r = delta always satisfies the target, smaller radii
    are tried first so that as few points as possible are removed.
    """
    if _well_separated(cloud):
        return cloud
    delta = mesh_norm(cloud)
    for frac in (1e-9, 0.125, 0.25, 0.5, 0.75, 1.0):
        keep = _greedy_thin(cloud.points, frac * delta)
        out = PointCloud(cloud.points[keep])
        if _well_separated(out):
            return out
    return out


# ---------------------------------------------------------------- rotations

@dataclass(frozen=True)
class Rotation:
    matrix: np.ndarray

    def __post_init__(self):
        U = np.asarray(self.matrix, dtype=float)
        if U.ndim != 2 or U.shape[0] != U.shape[1]:
            raise ValueError("rotation must be a square matrix")
        if np.max(np.abs(U @ U.T - np.eye(len(U)))) > 1e-12:
            raise ValueError("matrix is not orthogonal")
        if np.linalg.det(U) < 0:
            raise ValueError("matrix has determinant -1")
        U = U.copy()
        U.setflags(write=False)
        object.__setattr__(self, "matrix", U)

    @classmethod
    def random(cls, q: int, seed: int) -> "Rotation":
        """Haar-distributed rotation from the QR factorization of a seeded
        Gaussian matrix."""
        rng = np.random.default_rng(seed)
        A = rng.standard_normal((q + 1, q + 1))
        Q, R = np.linalg.qr(A)
        Q = Q * np.sign(np.diag(R))
        if np.linalg.det(Q) < 0:
            Q[:, 0] = -Q[:, 0]
        return cls(Q)

    @classmethod
    def identity(cls, q: int) -> "Rotation":
        return cls(np.eye(q + 1))


def rotate(obj, U: Rotation):
    M = U.matrix
    if isinstance(obj, PointCloud):
        return PointCloud(obj.points @ M.T)
    if isinstance(obj, SpherePoint):
        return SpherePoint(M @ obj.coords)
    return np.asarray(obj, dtype=float) @ M.T


# ---------------------------------------------------------------- files

def load_points(path, tol: float = 1e-6) -> PointCloud:
    """Read a CSV of unit vectors, one per row."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row) or row[0].lstrip().startswith("#"):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError as exc:
                raise PointsFileError(f"{path}:{lineno}: cannot parse {row!r}") from exc
            if width is None:
                width = len(vals)
            if len(vals) != width or width < 2:
                raise PointsFileError(f"{path}:{lineno}: expected {width} coordinates, got {len(vals)}")
            if abs(math.sqrt(sum(v * v for v in vals)) - 1.0) > tol:
                raise PointsFileError(f"{path}:{lineno}: row is not a unit vector")
            rows.append(vals)
    if not rows:
        raise PointsFileError(f"{path}: no points")
    return PointCloud(np.array(rows))


def save_points(path, cloud: PointCloud) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        for p in cloud.points:
            w.writerow([repr(float(v)) for v in p])
