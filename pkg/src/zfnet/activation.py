"""The activation |t|^(2 gamma + 1), its ultraspherical coefficients and the
smoothness diagnostics for coefficient sequences."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .orthopoly import gauss_jacobi, jacobi_at_one, jacobi_mass, log_gamma, recurrence_longdouble, signed_log_gamma
from .sphere import surface_area


class AdmissibilityError(ValueError):
    """gamma <= -1/2 or 2 gamma + 1 an even integer."""


@dataclass(frozen=True)
class ActivationSpec:
    gamma: float
    q: int

    def __post_init__(self):
        if not self.gamma > -0.5:
            raise AdmissibilityError(f"gamma must exceed -1/2, got {self.gamma}")
        e = 2.0 * self.gamma + 1.0
        nearest_even = 2.0 * round(e / 2.0)
        if abs(e - nearest_even) < 1e-12:
            raise AdmissibilityError(f"2*gamma+1 = {e} is an even integer")
        if self.q < 2:
            raise ValueError("sphere dimension q must be at least 2")

    @property
    def alpha(self) -> float:
        return self.q / 2.0 - 1.0

    @property
    def smoothness(self) -> float:
        """Decay exponent s = (4 gamma + 3 + q) / 2 of the coefficients."""
        return (4.0 * self.gamma + 3.0 + self.q) / 2.0


def phi_eval(gamma: float, t):
    return np.abs(t) ** (2.0 * gamma + 1.0)


def _as_spec(spec_or_gamma, q=None) -> ActivationSpec:
    if isinstance(spec_or_gamma, ActivationSpec):
        return spec_or_gamma
    return ActivationSpec(float(spec_or_gamma), int(q))


@lru_cache(maxsize=None)
def _phi_hat_table(gamma: float, q: int, L: int) -> np.ndarray:
    # The even integrand folds onto [0, 1]; u = 2 t^2 - 1 together with
    # p_{2l}^{(a,a)}(t) = 2^{a/2+1/4} p_l^{(a,-1/2)}(u) turns the coefficient
    # integral into a degree-l polynomial against (1-u)^a (1+u)^gamma, which a
    # Gauss-Jacobi(a, gamma) rule with l+2 nodes integrates exactly. The sums
    # run in longdouble because the result is tiny compared with the terms.
    a = q / 2.0 - 1.0
    rule = gauss_jacobi(a, gamma, L + 2, dtype=np.longdouble)
    u = rule.nodes
    diag, off = recurrence_longdouble(a, -0.5, L + 1)
    p0 = np.longdouble(1) / np.sqrt(np.longdouble(jacobi_mass(a, -0.5)))
    prev = np.zeros_like(u)
    cur = np.full_like(u, p0)
    integrals = np.empty(L + 1, dtype=np.longdouble)
    integrals[0] = np.sum(rule.weights * cur)
    for k in range(L):
        ok1 = off[k - 1] if k else np.longdouble(0)
        nxt = ((u - diag[k]) * cur - ok1 * prev) / off[k]
        prev, cur = cur, nxt
        integrals[k + 1] = np.sum(rule.weights * cur)
    scale = np.longdouble(2.0) ** np.longdouble(a / 2.0 + 0.25 - 1.0 - gamma - a)
    out = np.empty(L + 1)
    omega = surface_area(q - 1)
    for l in range(L + 1):
        out[l] = float(omega * scale * integrals[l]) / jacobi_at_one(2 * l, a, a)
    out.setflags(write=False)
    return out


def phi_hat(spec: ActivationSpec, l: int) -> float:
    """Coefficient of p_{2l}(1) p_{2l}(x.y) / omega_{q-1} in the expansion of phi.

    ``l`` is the half-degree; odd-degree coefficients vanish and are not stored.
    """
    return float(phi_hat_array(spec, l)[l])


def phi_hat_array(spec: ActivationSpec, L: int) -> np.ndarray:
    """phi_hat(spec, l) for l = 0..L."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    # Tables are cached at a coarse size so repeated calls with growing L reuse work.
    size = max(16, 1 << (int(L) - 1).bit_length()) if L > 0 else 16
    return _phi_hat_table(float(spec.gamma), int(spec.q), size)[: L + 1]


def phi_hat_closed_form_magnitude(spec: ActivationSpec, l: int) -> float:
    """|phi_hat| from the gamma-function closed form."""
    g, q = spec.gamma, spec.q
    _, lg = signed_log_gamma(l - g - 0.5)
    log_mag = (
        log_gamma(q / 2.0) + log_gamma(2.0 * g + 2.0)
        - (2.0 * g + 1.0) * math.log(2.0) - 0.5 * math.log(math.pi)
        + lg - log_gamma(l + g + q / 2.0 + 1.0)
    )
    return surface_area(q - 1) * abs(math.cos(math.pi * g)) * math.exp(log_mag)


@dataclass(frozen=True)
class CoefficientSequence:
    """b_l = (-1)^l phi_hat(2l), l = 0..L, with the smoothness exponent s."""

    values: np.ndarray = field(repr=False)
    s: float

    @property
    def L(self) -> int:
        return len(self.values) - 1

    def __len__(self):
        return len(self.values)


def coefficient_sequence(spec: ActivationSpec, L: int) -> CoefficientSequence:
    hat = phi_hat_array(spec, L)
    signs = np.where(np.arange(L + 1) % 2 == 0, 1.0, -1.0)
    vals = signs * hat
    vals.setflags(write=False)
    return CoefficientSequence(vals, spec.smoothness)


def forward_difference(seq, r: int, l: int) -> float:
    """Delta^r a_l with Delta a_l = a_{l+1} - a_l."""
    seq = np.asarray(seq, dtype=float)
    if r < 0 or l < 0 or l + r >= len(seq):
        raise IndexError(f"forward difference of order {r} at {l} needs index {l + r} < {len(seq)}")
    return float(np.diff(seq[l: l + r + 1], n=r)[0]) if r else float(seq[l])


def bs_diagnostic(seq: CoefficientSequence, r_max: int = 4) -> np.ndarray:
    """max_l (l+1)^r |Delta^r ((l+1)^s b_l)| for r = 0..r_max."""
    if r_max > 6:
        raise ValueError("r_max is limited to 6")
    idx = np.arange(len(seq.values), dtype=float) + 1.0
    scaled = idx**seq.s * np.asarray(seq.values)
    out = np.zeros(r_max + 1)
    for r in range(r_max + 1):
        d = np.diff(scaled, n=r)
        if len(d):
            out[r] = np.max(idx[: len(d)] ** r * np.abs(d))
    return out


def bs_growth_ratio(seq: CoefficientSequence, r_max: int = 4) -> float:
    """Ratio of the weighted-difference maximum over the second half of the
    index range to that over the first half (worst over r = 1..r_max).

    Values well above 1 indicate that (l+1)^s b_l is not an s-sequence on the
    sampled range.
    """
    idx = np.arange(len(seq.values), dtype=float) + 1.0
    scaled = idx**seq.s * np.asarray(seq.values)
    worst = 0.0
    for r in range(1, r_max + 1):
        d = idx[: len(scaled) - r] ** r * np.abs(np.diff(scaled, n=r))
        half = len(d) // 2
        first, second = np.max(d[:half]), np.max(d[half:])
        worst = max(worst, second / first if first > 0 else math.inf)
    return worst


def decay_slope(spec: ActivationSpec, lo: int = 20, hi: int = 60, corrections: int = 2) -> float:
    """Least-squares exponent m in log|phi_hat(2l)| ~ c + m log l over lo..hi.

    ``corrections`` adds terms l^-1, ..., l^-k to the model; the ratio of
    gamma functions behind the coefficients has an expansion in inverse
    powers of l, so the plain fit (corrections=0) carries an O(1/l) bias.
    """
    l = np.arange(lo, hi + 1, dtype=float)
    y = np.log(np.abs(phi_hat_array(spec, hi)[lo:]))
    cols = [np.ones_like(l), np.log(l)] + [l ** -k for k in range(1, corrections + 1)]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), y, rcond=None)
    return float(coef[1])
