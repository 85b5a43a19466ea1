import math

import numpy as np
import pytest
from scipy import integrate

from levydim import Interval, IsotropicStable, Point, SlowlyVaryingFn, SymmetricRegVarying
from levydim.intersections import heat_mass, intersect_criterion, kahane_kernel, kfold_gauge
from levydim.simulate import intersection_probe, probe_trend


@pytest.mark.parametrize("alpha", [0.7, 1.5, 2.0])
def test_heat_mass_against_quadrature(alpha):
    s = 0.3
    ref = 2 * integrate.quad(lambda r: math.exp(-s * r ** alpha), 0, math.inf)[0]
    assert heat_mass(IsotropicStable(alpha, 1), s)[0] == pytest.approx(ref, rel=1e-8)


def test_heat_mass_radial_path():
    # constant kappa reduces to the stable case but takes the generic radial branch
    psi = SymmetricRegVarying(1.5, SlowlyVaryingFn.constant(1.0), 2)
    s = np.array([0.1, 2.0])
    np.testing.assert_allclose(heat_mass(psi, s), heat_mass(IsotropicStable(1.5, 2), s), rtol=1e-6)


def test_kahane_kernel_uses_sum_of_coordinates():
    psi = IsotropicStable(2.0, 3)
    assert kahane_kernel(psi, [0.2, -0.3]) == pytest.approx(heat_mass(psi, 0.5)[0])


def test_two_fold_gauge():
    psi = IsotropicStable(2.0, 2)
    val = kfold_gauge(psi, 2, [0.4, 0.6])
    assert val == pytest.approx(heat_mass(psi, 1.0)[0] / (2 * math.pi) ** 2)


def test_three_fold_gauge_gaussian():
    # quadratic form in (xi_1, xi_2) with matrix [[x0 + x1, -x1], [-x1, x1 + x2]]
    x = np.array([0.3, 0.5, 0.7])
    det = (x[0] + x[1]) * (x[1] + x[2]) - x[1] ** 2
    exact = math.pi / math.sqrt(det) / (2 * math.pi) ** 2
    assert kfold_gauge(IsotropicStable(2.0, 1), 3, x) == pytest.approx(exact, rel=0.02)


def test_probe_trend_rules():
    assert probe_trend([0.4, 0.2, 0.1, 0.05], [52, 22, 5, 0], 2000) == "decay"
    assert probe_trend([0.2, 0.1, 0.05], [1012, 910, 856], 2000) == "plateau"
    assert probe_trend([0.2, 0.1], [3, 1], 2000) == "unclear"
    assert probe_trend([0.2, 0.1], [100, 40], 2000) == "unclear"


def test_kfold_rejects_degenerate_point():
    with pytest.raises(ValueError):
        kfold_gauge(IsotropicStable(2.0, 1), 3, [0.0, 0.0, 1.0])


def test_kahane_reference_values():
    assert kahane_kernel(IsotropicStable(1.0, 1), [1.0, 1.0]) == pytest.approx(1.0)
    psi = IsotropicStable(2.0, 1)
    assert kahane_kernel(psi, [1.0, 0.0]) == pytest.approx(math.sqrt(math.pi))
    a = kahane_kernel(psi, [0.3, 0.8])
    assert kahane_kernel(psi, [0.8, 0.3]) == pytest.approx(a)
    assert kahane_kernel(psi, [-0.3, 0.8]) == pytest.approx(a)


def test_two_fold_ratio_random_points():
    rng = np.random.default_rng(2)
    psi = IsotropicStable(1.3, 2)
    for x in rng.uniform(0.05, 2, (20, 2)):
        assert kfold_gauge(psi, 2, x) / kahane_kernel(psi, x) == pytest.approx((2 * math.pi) ** -2, rel=0.01)
        assert kfold_gauge(psi, 2, x[::-1]) == pytest.approx(kfold_gauge(psi, 2, x))


def test_three_fold_scaling():
    psi = IsotropicStable(2.0, 1)
    x = np.ones(3)
    assert kfold_gauge(psi, 3, x / 2) / kfold_gauge(psi, 3, x) == pytest.approx(2.0, rel=0.02)


def test_point_factor_gives_zero():
    verdict, detail = intersect_criterion(IsotropicStable(2.0, 3), Point(0.5), Interval(2, 3))
    assert verdict == "zero"


def test_overlapping_sets_rejected():
    with pytest.raises(ValueError):
        intersect_criterion(IsotropicStable(2.0, 2), Interval(0, 1), Interval(0.5, 2))
    with pytest.raises(ValueError):
        intersection_probe(IsotropicStable(2.0, 2), Interval(0, 1), Interval(0.5, 2), [0.1], n_paths=2)
