import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from zfnet.activation import ActivationSpec, coefficient_sequence, phi_eval
from zfnet.kernels import (
    Cutoff,
    SeriesKernel,
    band_eval,
    cutoff_eval,
    default_smoothness,
    dphi,
    dphi_kernel,
    localization_profile,
    lowpass,
    lowpass_kernel,
    phi_series_error,
    tilted,
    tilted_kernel,
)
from zfnet.orthopoly import gauss_jacobi
from zfnet.sphere import surface_area

H = Cutoff(7)


def test_cutoff_values():
    assert cutoff_eval(H, 0.3) == 1.0
    assert cutoff_eval(H, 1.5) == 0.0
    assert cutoff_eval(H, 0.75) == pytest.approx(0.5, abs=1e-15)
    assert H(0.5) == 1.0 and H(1.0) == 0.0
    with pytest.raises(ValueError):
        cutoff_eval(H, -0.1)


@pytest.mark.parametrize("S", [3, 6, 7, 10])
def test_cutoff_flat_ends(S):
    c = Cutoff(S)
    poly = np.polynomial.Polynomial(c.coeffs)
    for k in range(1, S + 1):
        d = poly.deriv(k)
        scale = np.abs(d.coef).max()
        assert abs(d(0.0)) < 1e-6 * scale and abs(d(1.0)) < 1e-6 * scale
    assert poly(0.0) == 0.0 and math.isclose(poly(1.0), 1.0, rel_tol=1e-12)


@given(st.floats(0, 2), st.floats(0, 2))
def test_cutoff_monotone(a, b):
    lo, hi = min(a, b), max(a, b)
    assert 0.0 <= H(hi) <= H(lo) <= 1.0


def test_band_support():
    assert band_eval(H, 0.1) == 0.0
    assert band_eval(H, 2.0) == 0.0
    t = np.linspace(0, 1.2, 500)
    g = H.band(t)
    assert np.all(g[(t < 0.25) | (t > 1)] == 0.0)


@given(st.floats(0, 4), st.integers(1, 6))
def test_partition_identity(t, n):
    lhs = H(t) + sum(H.band(t / 2**m) for m in range(1, n + 1))
    assert abs(lhs - H(t / 2**n)) < 1e-13


def test_partition_identity_example():
    t, n = 0.9, 3
    assert abs(H(t) + sum(H.band(t / 2**m) for m in range(1, n + 1)) - H(t / 2**n)) < 1e-13


def test_default_smoothness():
    assert default_smoothness(2) == 7


@pytest.mark.parametrize("q", [2, 3, 4])
def test_lowpass_n1_constant(q):
    t = np.linspace(-1, 1, 9)
    assert np.allclose(lowpass_kernel(q, H, 1, t), 1 / surface_area(q), rtol=1e-14)


@pytest.mark.parametrize("q,n", [(2, 8), (3, 5), (4, 12)])
def test_lowpass_integrates_to_one(q, n):
    a = q / 2 - 1
    rule = gauss_jacobi(a, a, 2 * n + 2)
    k = lowpass(q, H, n)
    # int_{S^q} K(x.y) dmu(y) = omega_{q-1} int_{-1}^{1} K(t) (1-t^2)^a dt
    assert math.isclose(surface_area(q - 1) * rule.integrate(k(rule.nodes)), 1.0, rel_tol=1e-12)


def test_tilted_and_dphi_n1():
    spec = ActivationSpec(0.0, 2)
    seq = coefficient_sequence(spec, 4)
    assert tilted_kernel(2, H, seq, 1, 0.3) == pytest.approx(0.5, rel=1e-14)
    assert dphi_kernel(spec, H, 1, -0.7) == pytest.approx(1 / (8 * math.pi**2), rel=1e-13)


def test_tilted_length_error():
    seq = coefficient_sequence(ActivationSpec(0.0, 2), 3)
    with pytest.raises(ValueError):
        tilted(2, H, seq, 16)


@given(st.floats(-1, 1))
def test_kernels_even(t):
    spec = ActivationSpec(0.25, 3)
    seq = coefficient_sequence(spec, 20)
    for k in (lowpass(3, H, 9), tilted(3, H.band, seq, 9), dphi(spec, H, 9)):
        assert math.isclose(k(t), k(-t), rel_tol=1e-12, abs_tol=1e-12)


def test_band_limited():
    k = lowpass(2, H, 8)
    assert len(k.coeffs) <= 8
    padded = SeriesKernel(2, np.concatenate([k.coeffs, np.zeros(5)]), 8)
    t = np.linspace(-1, 1, 21)
    assert np.allclose(padded(t), k(t), rtol=0, atol=1e-14)


def test_out_of_range_argument():
    with pytest.raises(ValueError):
        lowpass(2, H, 4)(1.1)


def test_deterministic_evaluation():
    t = np.linspace(-1, 1, 1001)
    k = dphi(ActivationSpec(0.0, 2), H, 32)
    assert np.array_equal(k(t), k(t.copy()))


def test_funk_hecke_against_phi():
    """int phi(x.y) Psi_N(y.z) dmu(y) = Phi_N(x.z) on S^2."""
    spec = ActivationSpec(0.0, 2)
    N = 8
    psi = dphi(spec, H, N)
    phi_n = lowpass(2, H, N)
    # x at the north pole; |t| has a kink at t = 0, so split the polar rule there
    xg, wg = np.polynomial.legendre.leggauss(60)
    t = np.concatenate([(xg - 1) / 2, (xg + 1) / 2])
    wt = np.concatenate([wg, wg]) / 2
    m = 80
    ph = 2 * np.pi * np.arange(m) / m
    st_ = np.sqrt(1 - t**2)
    Y = np.stack([np.outer(st_, np.cos(ph)), np.outer(st_, np.sin(ph)), np.repeat(t[:, None], m, 1)], -1).reshape(-1, 3)
    W = np.repeat(wt, m) * (2 * np.pi / m)
    rng = np.random.default_rng(5)
    Z = rng.standard_normal((6, 3))
    Z /= np.linalg.norm(Z, axis=1, keepdims=True)
    lhs = (W * phi_eval(0.0, Y[:, 2]))[None, :] * psi(np.clip(Z @ Y.T, -1, 1))
    assert np.allclose(lhs.sum(1), phi_n(Z[:, 2]), rtol=0, atol=1e-8)


def test_series_error_contracts():
    spec = ActivationSpec(0.0, 2)
    errs = [phi_series_error(spec, H, n) for n in (16, 32, 64, 128)]
    ratios = [b / a for a, b in zip(errs, errs[1:])]
    assert all(r <= 0.6 for r in ratios)
    assert all(np.diff(errs) < 0)
    with pytest.raises(ValueError):
        phi_series_error(spec, H, 16, grid_size=500)


def test_localization_profile():
    spec = ActivationSpec(0.0, 2)
    h6 = Cutoff(6)
    theta = np.linspace(0, math.pi, 1441)
    tails = []
    for n in (32, 64, 128):
        prof = localization_profile(2, coefficient_sequence(spec, n), n, theta, h6)
        v = prof[:, 1]
        assert np.allclose(v, v[::-1], rtol=1e-9, atol=1e-12 * np.abs(v).max())
        assert abs(theta[np.argmax(np.abs(v))] - math.pi / 2) <= 2 / n
        tails.append(np.abs(v[np.abs(math.pi / 2 - theta) >= 0.5]).max())
    assert tails[1] / tails[0] <= 0.6 and tails[2] / tails[1] <= 0.6
    with pytest.raises(ValueError):
        localization_profile(2, coefficient_sequence(spec, 8), 8, [4.0], h6)
