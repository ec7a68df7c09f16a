"""Cutoff functions and the univariate kernels built from even ultraspherical
series sum_l c_l p_{2l}(1) p_{2l}(t) / omega_{q-1}."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .activation import ActivationSpec, CoefficientSequence, coefficient_sequence, phi_eval, phi_hat_array
from .orthopoly import JacobiBasis, jacobi_at_one
from .sphere import surface_area


def default_smoothness(q: int) -> int:
    return q + 5


@dataclass(frozen=True)
class Cutoff:
    """C^S function equal to 1 on [0, 1/2] and 0 on [1, inf).

    The transition is 1 - s(2t - 1) with s the degree 2S+1 smoothstep whose
    first S derivatives vanish at both ends.
    """

    smoothness: int = 7
    coeffs: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        S = int(self.smoothness)
        if S < 1:
            raise ValueError("smoothness must be a positive integer")
        # s(u) = u^(S+1) sum_k C(S+k, k) (1-u)^k, expanded in powers of u
        poly = np.polynomial.Polynomial([0.0])
        one_minus_u = np.polynomial.Polynomial([1.0, -1.0])
        for k in range(S + 1):
            poly = poly + math.comb(S + k, k) * one_minus_u**k
        poly = poly * np.polynomial.Polynomial([0.0] * (S + 1) + [1.0])
        object.__setattr__(self, "coeffs", poly.coef)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        u = np.clip(2.0 * t - 1.0, 0.0, 1.0)
        out = 1.0 - np.polynomial.polynomial.polyval(u, self.coeffs)
        out = np.where(t <= 0.5, 1.0, np.where(t >= 1.0, 0.0, out))
        return out if out.ndim else float(out)

    def band(self, t):
        """g(t) = h(t) - h(2t), supported in [1/4, 1]."""
        t = np.asarray(t, dtype=float)
        out = self(t) - self(2.0 * t)
        return out if np.ndim(out) else float(out)


def cutoff_eval(cutoff: Cutoff, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("cutoff is defined for t >= 0")
    return cutoff(t)


def band_eval(cutoff: Cutoff, t):
    if np.any(np.asarray(t) < 0):
        raise ValueError("band function is defined for t >= 0")
    return cutoff.band(t)


# ---------------------------------------------------------------- even series

@lru_cache(maxsize=64)
def _half_basis(alpha: float, L: int) -> JacobiBasis:
    return JacobiBasis.build(alpha, -0.5, L)


@lru_cache(maxsize=64)
def even_endpoint_values(q: int, L: int) -> np.ndarray:
    """p_{2l}^(a,a)(1) for l = 0..L-1, a = q/2 - 1."""
    a = q / 2.0 - 1.0
    out = np.array([jacobi_at_one(2 * l, a, a) for l in range(L)])
    out.setflags(write=False)
    return out


def even_series(q: int, coeffs, t):
    """sum_l coeffs[l] p_{2l}^(a,a)(t) with a = q/2 - 1.

    Evaluated through p_{2l}^(a,a)(t) = 2^(a/2+1/4) p_l^(a,-1/2)(2t^2 - 1), so
    the recurrence has only len(coeffs) steps.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    a = q / 2.0 - 1.0
    t = np.asarray(t, dtype=float)
    u = np.clip(2.0 * t * t - 1.0, -1.0, 1.0)
    if len(coeffs) == 0:
        return np.zeros_like(t)
    basis = _half_basis(a, max(len(coeffs) - 1, 0))
    return 2.0 ** (a / 2.0 + 0.25) * basis.series(coeffs, u)


@dataclass(frozen=True)
class SeriesKernel:
    """t -> sum_{l < n} coeffs[l] p_{2l}(1) p_{2l}(t) / omega_{q-1}."""

    q: int
    coeffs: np.ndarray = field(repr=False)
    n: int

    @property
    def alpha(self) -> float:
        return self.q / 2.0 - 1.0

    @property
    def series_coefficients(self) -> np.ndarray:
        """Coefficients of p_{2l}(t) in the kernel."""
        L = len(self.coeffs)
        return self.coeffs * even_endpoint_values(self.q, L) / surface_area(self.q - 1)

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(np.abs(t) > 1.0 + 1e-12):
            raise ValueError("kernel argument must lie in [-1, 1]")
        out = even_series(self.q, self.series_coefficients, np.clip(t, -1.0, 1.0))
        return out if out.ndim else float(out)


def _trim(c: np.ndarray) -> np.ndarray:
    nz = np.nonzero(c)[0]
    return c[: nz[-1] + 1] if len(nz) else c[:1] * 0.0


def lowpass(q: int, cutoff: Cutoff, n: int) -> SeriesKernel:
    if n < 1:
        raise ValueError("n must be at least 1")
    l = np.arange(n + 1)
    return SeriesKernel(q, _trim(cutoff(l / n)), n)


def tilted(q: int, H: Callable, seq: CoefficientSequence, n: int) -> SeriesKernel:
    """Kernel with coefficients (-1)^l b_l H(l/n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    l = np.arange(n + 1)
    weights = np.asarray(H(l / n), dtype=float)
    need = int(np.nonzero(weights)[0].max()) + 1 if np.any(weights) else 1
    if len(seq.values) < need:
        raise ValueError(f"coefficient sequence has {len(seq.values)} terms, bandwidth needs {need}")
    b = np.asarray(seq.values[:need])
    signs = np.where(np.arange(need) % 2 == 0, 1.0, -1.0)
    return SeriesKernel(q, _trim(signs * b * weights[:need]), n)


def dphi(spec: ActivationSpec, cutoff: Cutoff, N: int) -> SeriesKernel:
    """Kernel with coefficients h(l/N) / phi_hat(2l): the pseudo-inverse of
    phi applied to the low-pass kernel."""
    if N < 1:
        raise ValueError("N must be at least 1")
    l = np.arange(N + 1)
    hv = cutoff(l / N)
    hat = phi_hat_array(spec, N)
    active = hv != 0.0
    if np.any(active & (hat == 0.0)):
        raise AssertionError("zero activation coefficient under the cutoff")
    inv = np.zeros_like(hat)
    inv[hat != 0.0] = 1.0 / hat[hat != 0.0]
    return SeriesKernel(spec.q, _trim(hv * inv), N)


def lowpass_kernel(q: int, cutoff: Cutoff, n: int, t):
    return lowpass(q, cutoff, n)(t)


def tilted_kernel(q: int, H: Callable, seq: CoefficientSequence, n: int, t):
    return tilted(q, H, seq, n)(t)


def dphi_kernel(spec: ActivationSpec, cutoff: Cutoff, N: int, t):
    return dphi(spec, cutoff, N)(t)


def phi_series_error(spec: ActivationSpec, cutoff: Cutoff, n: int, grid_size: int = 4001) -> float:
    """max_t |phi(t) - tilted kernel with H = h| over a uniform grid with endpoints."""
    if grid_size < 1000:
        raise ValueError("grid_size must be at least 1000")
    t = np.linspace(-1.0, 1.0, grid_size)
    seq = coefficient_sequence(spec, n)
    approx = tilted(spec.q, cutoff, seq, n)(t)
    return float(np.max(np.abs(phi_eval(spec.gamma, t) - approx)))


def localization_profile(q: int, seq: CoefficientSequence, n: int, theta_grid, cutoff: Cutoff) -> np.ndarray:
    """Rows (theta, value) of the band-pass tilted kernel at cos(theta)."""
    theta = np.asarray(theta_grid, dtype=float)
    if np.any((theta < 0) | (theta > math.pi)):
        raise ValueError("theta must lie in [0, pi]")
    vals = tilted(q, cutoff.band, seq, n)(np.cos(theta))
    return np.column_stack([theta, vals])
