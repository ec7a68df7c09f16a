import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.integrate import quad

from zfnet.activation import (
    ActivationSpec,
    AdmissibilityError,
    bs_diagnostic,
    bs_growth_ratio,
    coefficient_sequence,
    decay_slope,
    forward_difference,
    phi_eval,
    phi_hat,
    phi_hat_array,
    phi_hat_closed_form_magnitude,
)
from zfnet.orthopoly import JacobiBasis
from zfnet.sphere import surface_area

GRID = [(g, q) for g in (0.0, 0.25, 1.0) for q in (2, 3, 4)]


def test_legendre_values_q2_gamma0():
    spec = ActivationSpec(0.0, 2)
    assert abs(phi_hat(spec, 0) - 2 * math.pi) < 1e-12
    assert abs(phi_hat(spec, 1) - math.pi / 2) < 1e-12
    assert abs(phi_hat(spec, 2) + math.pi / 12) < 1e-12


@pytest.mark.parametrize("gamma,q", [(0.25, 2), (0.0, 3), (1.0, 4)])
def test_against_adaptive_quadrature(gamma, q):
    spec = ActivationSpec(gamma, q)
    a = q / 2 - 1
    b = JacobiBasis.build(a, a, 8)
    for l in range(4):
        pl1 = float(b.eval(2 * l, 1.0))
        num = 2 * quad(lambda t: t ** (2 * gamma + 1) * float(b.eval(2 * l, t)) * (1 - t * t) ** a,
                       0, 1, limit=200, epsabs=1e-14)[0]
        ref = surface_area(q - 1) * num / pl1
        assert math.isclose(phi_hat(spec, l), ref, rel_tol=1e-8, abs_tol=1e-12)


@pytest.mark.parametrize("gamma,q", GRID)
def test_closed_form_magnitude(gamma, q):
    spec = ActivationSpec(gamma, q)
    hat = phi_hat_array(spec, 60)
    mag = np.array([phi_hat_closed_form_magnitude(spec, l) for l in range(61)])
    assert np.max(np.abs(np.abs(hat) - mag) / mag) < 1e-9


@pytest.mark.parametrize("gamma,q", GRID)
def test_decay_exponent(gamma, q):
    spec = ActivationSpec(gamma, q)
    assert abs(decay_slope(spec) + spec.smoothness) < 0.05


def test_plain_slope_q2_gamma0():
    assert abs(decay_slope(ActivationSpec(0.0, 2), corrections=0) + 2.5) < 0.05


@pytest.mark.parametrize("gamma", [0.5, 1.5, -0.5, -0.7])
def test_inadmissible(gamma):
    with pytest.raises(AdmissibilityError):
        ActivationSpec(gamma, 2)


def test_q_must_be_two_or_more():
    with pytest.raises(ValueError):
        ActivationSpec(0.0, 1)


def test_smoothness_exponent():
    assert ActivationSpec(0.0, 2).smoothness == 2.5
    assert ActivationSpec(1.0, 4).smoothness == 5.5


@given(st.floats(-1, 1), st.sampled_from([0.0, 0.25, 1.0]))
def test_phi_even(t, gamma):
    assert phi_eval(gamma, t) == phi_eval(gamma, -t)


def test_sequence_sign_pattern():
    # b_l = (-1)^l phi_hat(2l) keeps one sign once l > gamma + 1/2
    for gamma in (0.0, 0.25, 1.0):
        seq = coefficient_sequence(ActivationSpec(gamma, 2), 40)
        tail = seq.values[int(gamma + 0.5) + 1:]
        assert np.all(np.sign(tail) == np.sign(tail[0]))


def test_prefix_stability():
    spec = ActivationSpec(0.25, 3)
    assert np.allclose(phi_hat_array(spec, 10), phi_hat_array(spec, 100)[:11], rtol=1e-13)


def test_forward_difference():
    a = np.arange(10.0) ** 2
    assert forward_difference(a, 0, 3) == 9.0
    assert forward_difference(a, 1, 3) == 7.0
    assert forward_difference(a, 2, 0) == 2.0
    assert forward_difference(a, 3, 5) == 0.0
    with pytest.raises(IndexError):
        forward_difference(a, 3, 7)


@given(st.lists(st.floats(-5, 5), min_size=6, max_size=20), st.floats(-3, 3))
def test_forward_difference_linear(values, c):
    a = np.array(values)
    assert math.isclose(forward_difference(c * a, 2, 1), c * forward_difference(a, 2, 1), abs_tol=1e-9)


def test_bs_diagnostic_bounded():
    seq = coefficient_sequence(ActivationSpec(0.0, 2), 200)
    d = bs_diagnostic(seq, 4)
    assert d.shape == (5,) and np.all(np.isfinite(d))
    assert bs_growth_ratio(seq, 4) < 1.0
    with pytest.raises(ValueError):
        bs_diagnostic(seq, 7)
