import math

import numpy as np
import pytest

from helfer_flux import vacuum
from helfer_flux.errors import GridError, LightConeError, ParameterError
from helfer_flux.models import CaseLabel, GridScale, GridSpec

FIT_RANGE = GridSpec(min=10.0, max=1000.0, count=64, scale=GridScale.LOG)


def test_corr2d_reference_value():
    sample = vacuum.corr2d(2.0, -1.0)
    assert sample.c_value == pytest.approx(10.0 / (81.0 * math.pi ** 2), rel=1e-12)
    assert sample.case_label == CaseLabel.A_POSITIVE


@pytest.mark.parametrize(
    "x, tprime, label, sign",
    [
        (1.0, -0.5, CaseLabel.A_POSITIVE, 1),
        (-1.0, -0.5, CaseLabel.A_NEGATIVE, -1),
        (1.0, 0.5, CaseLabel.B_NEGATIVE, -1),
        (-1.0, 0.5, CaseLabel.B_POSITIVE, 1),
        (0.5, -2.0, CaseLabel.A_POSITIVE, 1),
        (-0.5, 2.0, CaseLabel.B_POSITIVE, 1),
    ],
)
def test_corr2d_quadrants(x, tprime, label, sign):
    sample = vacuum.corr2d(x, tprime)
    assert sample.case_label == label
    assert np.sign(sample.c_value) == sign


def test_corr2d_matches_direct_formula():
    for x, tp in [(0.3, 1.7), (-2.5, 0.4), (4.0, -3.0)]:
        expected = -x * tp * (x * x + tp * tp) / (math.pi ** 2 * (x * x - tp * tp) ** 4)
        assert vacuum.corr2d(x, tp).c_value == pytest.approx(expected, rel=1e-13)


def test_corr2d_lightcone_and_axes():
    on_cone = vacuum.corr2d(1.0, 1.0)
    assert on_cone.case_label == CaseLabel.LIGHTCONE
    assert on_cone.c_value is None
    on_axis = vacuum.corr2d(0.0, 0.7)
    assert on_axis.case_label == CaseLabel.UNCORRELATED
    assert on_axis.c_value == 0.0
    with pytest.raises(LightConeError):
        vacuum.corr2d_general(2.0, -2.0)


def test_corr4d_reference_value():
    sample = vacuum.corr4d(2.0, 1.0)
    assert sample.c_value == pytest.approx(40.0 / (729.0 * math.pi ** 4), rel=1e-12)
    assert sample.case_label == CaseLabel.OUTGOING


def test_corr4d_sign_follows_time_separation():
    rng = np.random.default_rng(20090127)
    r = rng.uniform(0.01, 5.0, 10_000)
    dt = rng.uniform(-5.0, 5.0, 10_000)
    off_cone = np.abs(r * r - dt * dt) > 1e-6
    for ri, di in zip(r[off_cone], dt[off_cone]):
        sample = vacuum.corr4d(float(ri), float(di))
        assert np.sign(sample.c_value) == np.sign(di)
        assert sample.case_label == (CaseLabel.OUTGOING if di > 0 else CaseLabel.INGOING)


def test_corr4d_requires_positive_radius():
    with pytest.raises(ParameterError):
        vacuum.corr4d(0.0, 1.0)
    assert vacuum.corr4d(1.0, 0.0).case_label == CaseLabel.UNCORRELATED
    assert vacuum.corr4d(1.0, -1.0).case_label == CaseLabel.LIGHTCONE


def test_green_functions():
    g1, g2 = vacuum.green_4d(1.0)
    assert g1 == pytest.approx(-1.0 / (8.0 * math.pi ** 2))
    assert g2 == pytest.approx(1.0 / (4.0 * math.pi ** 2))
    g1, g2 = vacuum.green_2d(2.0)
    assert g1 == pytest.approx(-1.0 / (8.0 * math.pi))
    assert g2 == pytest.approx(1.0 / (16.0 * math.pi))


@pytest.mark.parametrize(
    "mode, direction, expected",
    [("2d", "space", -5.0), ("2d", "time", -5.0), ("4d", "space", -9.0), ("4d", "time", -9.0)],
)
def test_falloff_exponents(mode, direction, expected):
    slope = vacuum.falloff_exponent(vacuum.falloff_evaluator(mode, direction), 1.0, FIT_RANGE)
    assert slope == pytest.approx(expected, abs=0.05)


def test_falloff_range_checks():
    evaluator = vacuum.falloff_evaluator("2d", "space")
    with pytest.raises(GridError):
        vacuum.falloff_exponent(evaluator, 1.0, GridSpec(min=10.0, max=1000.0, count=64))
    with pytest.raises(GridError):
        vacuum.falloff_exponent(evaluator, 1.0, GridSpec(min=10.0, max=1000.0, count=16, scale=GridScale.LOG))
    with pytest.raises(GridError):
        vacuum.falloff_exponent(evaluator, 2.0, FIT_RANGE)
    with pytest.raises(ParameterError):
        vacuum.falloff_exponent(evaluator, 0.0, FIT_RANGE)
    with pytest.raises(ParameterError):
        vacuum.falloff_evaluator("3d", "space")


def test_corr_grid_row_major():
    samples = vacuum.corr_grid("2d", GridSpec(min=1.0, max=2.0, count=2), GridSpec(min=-0.5, max=0.5, count=3))
    assert [(s.coord_a, s.coord_b) for s in samples] == [
        (1.0, -0.5), (1.0, 0.0), (1.0, 0.5), (2.0, -0.5), (2.0, 0.0), (2.0, 0.5)
    ]


def test_corr_grid_reports_lightcone_indices():
    with pytest.raises(LightConeError) as excinfo:
        vacuum.corr_grid("4d", GridSpec(min=0.5, max=2.0, count=4), GridSpec(min=1.0, max=1.0, count=1))
    assert excinfo.value.indices == ((1, 0),)
    assert "(1, 0)" in str(excinfo.value)


def test_every_label_has_a_narrative():
    for label in CaseLabel:
        assert vacuum.correlation_narrative(label)


def _off_cone_pairs(seed, size=2000):
    rng = np.random.default_rng(seed)
    a = rng.uniform(-5.0, 5.0, size)
    b = rng.uniform(-5.0, 5.0, size)
    keep = (np.abs(a * a - b * b) > 1e-3) & (np.abs(a) > 1e-3) & (np.abs(b) > 1e-3)
    return list(zip(a[keep].tolist(), b[keep].tolist()))


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_corr2d_antisymmetric_in_both_arguments(seed):
    for x, tp in _off_cone_pairs(seed):
        value = vacuum.corr2d(x, tp).c_value
        assert vacuum.corr2d(-x, tp).c_value == pytest.approx(-value, rel=1e-14)
        assert vacuum.corr2d(x, -tp).c_value == pytest.approx(-value, rel=1e-14)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_corr4d_antisymmetric_in_time(seed):
    for r, dt in _off_cone_pairs(seed):
        r = abs(r)
        assert vacuum.corr4d(r, -dt).c_value == pytest.approx(-vacuum.corr4d(r, dt).c_value, rel=1e-14)


@pytest.mark.parametrize("a, b", [(2.0, -1.0), (0.3, 1.7), (-4.0, 2.5), (1e-2, 3.0)])
def test_corr2d_exchange_symmetry(a, b):
    assert abs(vacuum.corr2d(a, b).c_value) == pytest.approx(abs(vacuum.corr2d(b, a).c_value), rel=1e-14)


@pytest.mark.parametrize("seed", [4, 5])
def test_sign_carried_by_odd_prefactor(seed):
    for a, b in _off_cone_pairs(seed):
        assert vacuum.corr2d(a, b).c_value / (-a * b) > 0
        assert vacuum.corr4d(abs(a), b).c_value / (abs(a) * b) > 0
