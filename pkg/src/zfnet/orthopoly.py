"""Orthonormal Jacobi polynomials, Gauss-Jacobi rules and log-gamma.

Everything here uses the orthonormal normalization

    int_{-1}^{1} p_i(t) p_j(t) (1-t)^alpha (1+t)^beta dt = delta_ij,

with positive leading coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eigh_tridiagonal, LinAlgError


class DomainError(ValueError):
    """Argument outside the domain of a special function."""


class DegreeError(ValueError):
    """Requested degree exceeds what a basis was built for."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to converge."""


# Lanczos approximation, g = 7, 9 terms.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


def _lanczos_log(x: float) -> float:
    # log Gamma(x) for x >= 0.5
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return _HALF_LOG_2PI + (z + 0.5) * math.log(t) - t + math.log(acc)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for finite x > 0."""
    x = float(x)
    if not math.isfinite(x) or x <= 0.0:
        raise DomainError(f"log_gamma requires a finite positive argument, got {x!r}")
    if x == 1.0 or x == 2.0:
        return 0.0
    if x < 0.5:
        # Gamma(x) Gamma(1-x) = pi / sin(pi x)
        return math.log(math.pi / math.sin(math.pi * x)) - _lanczos_log(1.0 - x)
    return _lanczos_log(x)


def signed_log_gamma(x: float) -> tuple[float, float]:
    """Return (sign, ln|Gamma(x)|), valid for negative non-integer x as well."""
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite argument {x!r}")
    if x > 0.0:
        return 1.0, log_gamma(x)
    if x == math.floor(x):
        raise DomainError(f"Gamma has a pole at {x!r}")
    # Gamma(x) = pi / (sin(pi x) Gamma(1-x))
    s = math.sin(math.pi * x)
    return math.copysign(1.0, s), math.log(math.pi / abs(s)) - log_gamma(1.0 - x)


def _check_params(alpha: float, beta: float) -> None:
    if not (alpha > -1.0 and beta > -1.0):
        raise DomainError(f"Jacobi parameters must exceed -1, got ({alpha}, {beta})")


def jacobi_mass(alpha: float, beta: float) -> float:
    """Total mass of the weight (1-t)^alpha (1+t)^beta on [-1, 1]."""
    _check_params(alpha, beta)
    return math.exp(
        (alpha + beta + 1.0) * math.log(2.0)
        + log_gamma(alpha + 1.0)
        + log_gamma(beta + 1.0)
        - log_gamma(alpha + beta + 2.0)
    )


def recurrence_coefficients(alpha: float, beta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Jacobi matrix entries for degrees 0..n-1.

    Returns ``(diag, offdiag)`` where ``diag[k]`` is the k-th diagonal entry and
    ``offdiag[k]`` couples degrees k and k+1 (length n, the last entry is the
    coupling to degree n).
    """
    _check_params(alpha, beta)
    k = np.arange(n, dtype=float)
    ab = alpha + beta
    diag = np.empty(n)
    if n:
        diag[0] = (beta - alpha) / (ab + 2.0)
        kk = k[1:]
        diag[1:] = (beta**2 - alpha**2) / ((2 * kk + ab) * (2 * kk + ab + 2.0))
    # offdiag[k] = sqrt(b_{k+1}) with b_j the monic recurrence coefficient
    j = k + 1.0
    b = np.empty(n)
    if n:
        b[0] = 4.0 * (1 + alpha) * (1 + beta) / ((2 + ab) ** 2 * (3 + ab))
        jj = j[1:]
        b[1:] = (
            4.0 * jj * (jj + alpha) * (jj + beta) * (jj + ab)
            / ((2 * jj + ab) ** 2 * (2 * jj + ab + 1.0) * (2 * jj + ab - 1.0))
        )
    return diag, np.sqrt(b)


@dataclass(frozen=True)
class JacobiBasis:
    """Orthonormal Jacobi family p_0..p_L for the weight (1-t)^alpha (1+t)^beta."""

    alpha: float
    beta: float
    max_degree: int
    diag: np.ndarray = field(repr=False)
    offdiag: np.ndarray = field(repr=False)
    p0: float = field(repr=False)

    @classmethod
    def build(cls, alpha: float, beta: float, max_degree: int) -> "JacobiBasis":
        _check_params(alpha, beta)
        if max_degree < 0:
            raise DegreeError("max_degree must be nonnegative")
        diag, off = recurrence_coefficients(alpha, beta, max_degree + 1)
        diag.setflags(write=False)
        off.setflags(write=False)
        return cls(float(alpha), float(beta), int(max_degree), diag, off,
                   1.0 / math.sqrt(jacobi_mass(alpha, beta)))

    def _prepare(self, t, degree: int):
        if degree > self.max_degree:
            raise DegreeError(f"degree {degree} exceeds max_degree {self.max_degree}")
        t = np.asarray(t, dtype=float)
        if np.any(np.abs(t) > 1.0 + 1e-14):
            raise DomainError("Jacobi polynomials are evaluated on [-1, 1] only")
        return t

    def eval(self, degree: int, t):
        """p_degree(t) by upward three-term recurrence."""
        t = self._prepare(t, degree)
        prev = np.zeros_like(t)
        cur = np.full_like(t, self.p0)
        for k in range(degree):
            nxt = ((t - self.diag[k]) * cur - (self.offdiag[k - 1] if k else 0.0) * prev) / self.offdiag[k]
            prev, cur = cur, nxt
        return cur if cur.ndim else float(cur)

    def table(self, t, degree: int | None = None) -> np.ndarray:
        """Array of shape (degree+1, *t.shape) holding p_0(t)..p_degree(t)."""
        degree = self.max_degree if degree is None else degree
        t = self._prepare(t, degree)
        out = np.empty((degree + 1,) + t.shape)
        out[0] = self.p0
        if degree >= 1:
            out[1] = (t - self.diag[0]) * out[0] / self.offdiag[0]
        for k in range(1, degree):
            out[k + 1] = ((t - self.diag[k]) * out[k] - self.offdiag[k - 1] * out[k - 1]) / self.offdiag[k]
        return out

    def series(self, coeffs, t):
        """sum_k coeffs[k] p_k(t), accumulated in ascending degree."""
        coeffs = np.asarray(coeffs, dtype=float)
        degree = len(coeffs) - 1
        t = self._prepare(t, max(degree, 0))
        acc = np.zeros_like(t)
        if degree < 0:
            return acc
        prev = np.zeros_like(t)
        cur = np.full_like(t, self.p0)
        acc += coeffs[0] * cur
        for k in range(degree):
            nxt = ((t - self.diag[k]) * cur - (self.offdiag[k - 1] if k else 0.0) * prev) / self.offdiag[k]
            prev, cur = cur, nxt
            if coeffs[k + 1] != 0.0:
                acc += coeffs[k + 1] * cur
        return acc


def jacobi_eval(basis: JacobiBasis, degree: int, t):
    return basis.eval(degree, t)


def _log_p_at_one(l: int, alpha: float, beta: float) -> float:
    ab = alpha + beta
    if l == 0:
        log_norm = log_gamma(ab + 2.0)  # (alpha+beta+1) Gamma(alpha+beta+1)
    else:
        log_norm = math.log(2 * l + ab + 1.0) + log_gamma(l + ab + 1.0)
    log_sq = (
        log_norm - (ab + 1.0) * math.log(2.0)
        + log_gamma(l + 1.0)
        - log_gamma(l + alpha + 1.0)
        - log_gamma(l + beta + 1.0)
    )
    return 0.5 * log_sq + log_gamma(l + alpha + 1.0) - log_gamma(alpha + 1.0) - log_gamma(l + 1.0)


def jacobi_at_one(l: int, alpha: float, beta: float) -> float:
    """Closed form of the orthonormal p_l^(alpha,beta)(1)."""
    _check_params(alpha, beta)
    return math.exp(_log_p_at_one(int(l), alpha, beta))


def even_jacobi_at_zero(l: int, alpha: float) -> float:
    """p_{2l}^(alpha,alpha)(0) from p_{2l}(1) and the ratio p_{2l}(1)/p_{2l}(0)."""
    _check_params(alpha, alpha)
    log_ratio = (0.5 * math.log(math.pi) + log_gamma(l + alpha + 1.0)
                 - log_gamma(alpha + 1.0) - log_gamma(l + 0.5))
    val = math.exp(_log_p_at_one(2 * l, alpha, alpha) - log_ratio)
    return -val if l % 2 else val


@dataclass(frozen=True)
class GaussJacobiRule:
    alpha: float
    beta: float
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    def integrate(self, values) -> float:
        return float(np.dot(self.weights, values))


def gauss_jacobi(alpha: float, beta: float, m: int, dtype=np.float64) -> GaussJacobiRule:
    """m-point Gauss-Jacobi rule via the Golub-Welsch eigenproblem.

    Nodes from the symmetric tridiagonal eigensolve are polished by Newton steps
    on p_m and the weights are taken from the Christoffel function
    1 / sum_k p_k(x)^2, both carried out in ``dtype`` (``np.longdouble`` gives
    extra digits where an oracle needs them).
    """
    _check_params(alpha, beta)
    if m < 1:
        raise ValueError("need at least one node")
    diag, off = recurrence_coefficients(alpha, beta, m)
    try:
        x0 = eigh_tridiagonal(diag, off[:-1], eigvals_only=True) if m > 1 else diag.copy()
    except LinAlgError as exc:
        raise NumericError(f"Golub-Welsch eigensolve failed for alpha={alpha}, beta={beta}, m={m}: {exc}") from exc
    x0 = np.sort(x0)

    # recurrence in the working precision
    d_ld, o_ld = _recurrence_exact(alpha, beta, m)
    d = np.array(d_ld, dtype=dtype)
    o = np.array(o_ld, dtype=dtype)
    x = x0.astype(dtype)
    for _ in range(3):
        p, dp, _ = _orthonormal_with_derivative(x, d, o, m)
        x = x - p / dp
    _, _, sq = _orthonormal_with_derivative(x, d, o, m)
    mass = _mass_in(alpha, beta, dtype)
    w = mass / sq
    if np.any(np.diff(x) <= 0) or np.any(w <= 0):
        raise NumericError("Gauss-Jacobi rule lost monotone nodes or positive weights")
    return GaussJacobiRule(float(alpha), float(beta), x, w)


def _recurrence_exact(alpha, beta, n):
    # same entries as recurrence_coefficients, evaluated in longdouble
    ab = alpha + beta
    diag, off = [], []
    for k in range(n):
        if k == 0:
            diag.append(np.longdouble(beta - alpha) / np.longdouble(ab + 2.0))
        else:
            kk = np.longdouble(k)
            diag.append((np.longdouble(beta) ** 2 - np.longdouble(alpha) ** 2)
                        / ((2 * kk + ab) * (2 * kk + ab + 2)))
        j = np.longdouble(k + 1)
        if k == 0:
            b = 4 * (1 + np.longdouble(alpha)) * (1 + np.longdouble(beta)) / ((2 + np.longdouble(ab)) ** 2 * (3 + np.longdouble(ab)))
        else:
            b = (4 * j * (j + alpha) * (j + beta) * (j + ab)
                 / ((2 * j + ab) ** 2 * (2 * j + ab + 1) * (2 * j + ab - 1)))
        off.append(np.sqrt(b))
    return diag, off


def recurrence_longdouble(alpha: float, beta: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """recurrence_coefficients in np.longdouble."""
    _check_params(alpha, beta)
    d, o = _recurrence_exact(alpha, beta, n)
    return np.array(d, dtype=np.longdouble), np.array(o, dtype=np.longdouble)


def _mass_in(alpha, beta, dtype):
    if np.dtype(dtype) == np.dtype(np.float64):
        return jacobi_mass(alpha, beta)
    # the mass only scales the weights; double accuracy is enough here
    return np.longdouble(jacobi_mass(alpha, beta))


def _orthonormal_with_derivative(x, diag, off, m):
    """p_m(x), p_m'(x) and sum_{k<m} p_k(x)^2 for the family scaled so p_0 = 1."""
    one = np.ones_like(x)
    prev, cur = np.zeros_like(x), one.copy()
    dprev, dcur = np.zeros_like(x), np.zeros_like(x)
    sq = one.copy()
    for k in range(m):
        ok1 = off[k - 1] if k else 0
        nxt = ((x - diag[k]) * cur - ok1 * prev) / off[k]
        dnxt = (cur + (x - diag[k]) * dcur - ok1 * dprev) / off[k]
        prev, cur = cur, nxt
        dprev, dcur = dcur, dnxt
        if k < m - 1:
            sq = sq + cur * cur
    return cur, dcur, sq


def harmonic_dimension(q: int, l: int) -> int:
    """Dimension of the space of degree-l spherical harmonics on S^q."""
    if q < 1 or l < 0:
        raise ValueError("need q >= 1 and l >= 0")
    if l == 0:
        return 1
    return (2 * l + q - 1) * math.comb(l + q - 1, l) // (l + q - 1)


def polynomial_space_dimension(q: int, n: int) -> int:
    """dim Pi_n^q, the sum of harmonic dimensions up to degree n."""
    return harmonic_dimension(q + 1, n)
