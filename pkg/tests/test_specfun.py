import math

import mpmath
import numpy as np
import pytest
from numpy.testing import assert_allclose

from helfer_flux import specfun
from helfer_flux.errors import ParameterError
from helfer_flux.models import ProfileBranch

mpmath.mp.dps = 50

# away from the zeros of Ci (0.6165, 3.3842, 6.4270, ...)
CI_POINTS = [1e-6, 1e-3, 0.05, 0.2, 0.4, 1.0, 1.7, 2.5, 4.0, 5.5, 8.0, 11.0, 15.0, 26.5, 40.0, 60.0, 100.0,
             250.0, 1000.0, 5000.0]
E1_POINTS = [1e-6, 1e-3, 0.01, 0.1, 0.2, 0.5, 1.0, 2.0, 3.0, 5.0, 7.5, 10.0, 15.0, 20.0, 30.0, 50.0, 80.0,
             120.0, 200.0, 500.0]


def _mp_f2(x):
    x = mpmath.mpf(x)
    return 4 * mpmath.pi * (3 * (x ** 2 - 2) * mpmath.sin(x) - x * (x ** 2 - 6) * mpmath.cos(x)) / x ** 5


def _mp_ball(x):
    x = mpmath.mpf(x)
    return 4 * mpmath.pi * (mpmath.sin(x) - x * mpmath.cos(x)) / x ** 3


def _mp_g2(x):
    x = mpmath.mpf(x)
    return 4 * mpmath.pi * (3 * x * mpmath.cos(x) + (x ** 2 - 3) * mpmath.sin(x)) / x ** 4


def test_cosine_integral_against_mpmath():
    values = specfun.cosine_integral(np.array(CI_POINTS))
    reference = [float(mpmath.ci(mpmath.mpf(x))) for x in CI_POINTS]
    assert_allclose(values, reference, rtol=1e-12, atol=1e-15)


def test_exp_integral_against_mpmath():
    values = specfun.exp_integral_e1(np.array(E1_POINTS))
    reference = [float(mpmath.e1(mpmath.mpf(x))) for x in E1_POINTS]
    assert_allclose(values, reference, rtol=1e-12)


def test_scalar_in_scalar_out():
    assert isinstance(specfun.cosine_integral(1.0), float)
    assert isinstance(specfun.exp_integral_e1(1.0), float)
    assert isinstance(specfun.f2(1.0, 0.3), float)


@pytest.mark.parametrize("func", [specfun.cosine_integral, specfun.exp_integral_e1])
@pytest.mark.parametrize("x", [0.0, -1.0])
def test_special_functions_reject_nonpositive(func, x):
    with pytest.raises(ParameterError):
        func(x)


REDUCED_RADII = [1e-3, 0.1, 0.3, 0.49, 0.51, 1.0, 2.0, 3.7, 5.0, 7.0, 10.0, 30.0]


def test_f2_against_high_precision_closed_form():
    values = specfun.f2(1.0, np.array(REDUCED_RADII))
    reference = [float(_mp_f2(x)) for x in REDUCED_RADII]
    assert_allclose(values, reference, rtol=1e-11, atol=1e-13 * 4 * math.pi / 5)


def test_f1_against_high_precision_closed_form():
    values = specfun.f1(1.0, np.array(REDUCED_RADII))
    reference = [float(_mp_ball(x) ** 2) for x in REDUCED_RADII]
    assert_allclose(values, reference, rtol=1e-11, atol=1e-13 * (4 * math.pi / 3) ** 2)


def test_g2_against_high_precision_closed_form():
    values = specfun.g2(1.0, np.array(REDUCED_RADII))
    reference = [float(_mp_g2(x)) for x in REDUCED_RADII]
    assert_allclose(values, reference, rtol=1e-11, atol=1e-13 * 4 * math.pi / 15)


def test_profile_scaling_with_p0():
    assert specfun.f2(2.0, 0.75) == pytest.approx(2.0 ** 5 * specfun.f2(1.0, 1.5), rel=1e-13)
    assert specfun.f1(2.0, 0.75) == pytest.approx(2.0 ** 6 * specfun.f1(1.0, 1.5), rel=1e-13)
    assert specfun.g2(2.0, 0.75) == pytest.approx(2.0 ** 5 * specfun.g2(1.0, 1.5), rel=1e-13)


def test_values_at_origin():
    assert specfun.f2(1.0, 0.0) == pytest.approx(4 * math.pi / 5, rel=1e-15)
    assert specfun.f1(1.0, 0.0) == pytest.approx((4 * math.pi / 3) ** 2, rel=1e-15)
    assert specfun.g2(1.0, 0.0) == 0.0


def test_branches_agree_at_switch():
    x = np.array([specfun.SERIES_SWITCH])
    assert_allclose(specfun._f2_series(x), specfun._f2_closed(x), rtol=1e-10)
    assert_allclose(specfun._ball_series(x), specfun._ball_closed(x), rtol=1e-10)
    assert_allclose(specfun._g2_series(x), specfun._g2_closed(x), rtol=1e-10)


def test_flux_profile_divergence_identity():
    # (1/r^2) d(r^2 g2)/dr = -f2
    h = 1e-5
    for r in (0.3, 1.3, 2.7, 6.0):
        derivative = ((r + h) ** 2 * specfun.g2(1.0, r + h) - (r - h) ** 2 * specfun.g2(1.0, r - h)) / (2 * h)
        assert derivative / r ** 2 == pytest.approx(-specfun.f2(1.0, r), rel=1e-7)


def test_profile_value_reports_branch():
    near = specfun.profile_value("f2", 1.0, 0.1)
    far = specfun.profile_value("g2", 1.0, 1.0)
    assert near.branch == ProfileBranch.SERIES
    assert far.branch == ProfileBranch.CLOSED_FORM
    assert far.value == specfun.g2(1.0, 1.0)
    with pytest.raises(ParameterError):
        specfun.profile_value("h3", 1.0, 1.0)


def test_profile_rejects_negative_radius():
    with pytest.raises(ParameterError):
        specfun.f2(1.0, -0.1)
    with pytest.raises(ParameterError):
        specfun.f1(0.0, 1.0)


def test_array_shape_preserved():
    r = np.linspace(0.0, 4.0, 12).reshape(3, 4)
    assert specfun.f2(1.0, r).shape == (3, 4)
    assert specfun.g2(1.0, r).shape == (3, 4)


def test_far_field_asymptotics():
    assert specfun.f2(1.0, 50.0) == pytest.approx(specfun.f2_asymptotic(1.0, 50.0, "far"), rel=0.03)
    assert specfun.g2(1.0, 100.0) == pytest.approx(4 * math.pi * math.sin(100.0) / 100.0 ** 2, rel=0.06)


def test_near_field_asymptotics():
    assert specfun.f2(1.0, 0.01) == pytest.approx(specfun.f2_asymptotic(1.0, 0.01, "near"), rel=1e-4)
    assert specfun.f1(1.0, 0.01) == pytest.approx(specfun.f1_asymptotic(1.0, 0.01, "near"), rel=1e-4)
    with pytest.raises(ParameterError):
        specfun.f1_asymptotic(1.0, 1.0, "middle")
